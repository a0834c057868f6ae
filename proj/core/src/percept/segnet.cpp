#include "boneloc/percept/segnet.hpp"

#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::percept {

using nn::Cache;
using nn::Tensor;

SegNet::SegNet(const SegNetConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  Rng rng(init_seed);
  enc1_ = std::make_unique<nn::Linear>(3, cfg_.enc1, &rng);
  enc2_ = std::make_unique<nn::Linear>(cfg_.enc1, cfg_.enc2, &rng);
  enc3_ = std::make_unique<nn::Linear>(cfg_.enc2, cfg_.enc3, &rng);
  const int dec_in = cfg_.midlayer ? cfg_.enc2 + cfg_.enc3 : cfg_.enc3;
  dec1_ = std::make_unique<nn::Linear>(dec_in, cfg_.dec1, &rng);
  dec2_ = std::make_unique<nn::Linear>(cfg_.dec1, cfg_.dec2, &rng);
  // zero-init output layer: probabilities start at 0.5 instead of inside the
  // sigmoid's saturated (zero-gradient) tails
  dec3_ = std::make_unique<nn::Linear>(cfg_.dec2, 1);
}

// cache layout: [enc1, relu1, enc2, relu2, enc3, relu3, gmp, dec1, relu4,
//                dec2, relu5, dec3, sigmoid]
Tensor SegNet::probs_tensor(const geom::PointCloud& centered, std::vector<Cache>* caches,
                            Tensor* local_out) const {
  const int n = int(centered.size());
  if (n == 0) fail("empty cloud", "SegNet: empty input cloud");
  Tensor x({n, 3});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) x.values[std::size_t(i) * 3 + k] = centered.points[i][k] * cfg_.coord_scale;

  if (caches) caches->assign(13, Cache{});
  auto c = [&](int i) { return caches ? &(*caches)[i] : nullptr; };

  Tensor h = relu_.forward(enc1_->forward(x, c(0)), c(1));
  Tensor local = relu_.forward(enc2_->forward(h, c(2)), c(3));  // {N, enc2}
  Tensor feat = relu_.forward(enc3_->forward(local, c(4)), c(5));
  Tensor global = gmp_.forward(feat, c(6));  // {enc3}

  const int dec_in = cfg_.midlayer ? cfg_.enc2 + cfg_.enc3 : cfg_.enc3;
  Tensor d({n, dec_in});
  for (int i = 0; i < n; ++i) {
    double* row = d.data() + std::size_t(i) * dec_in;
    int off = 0;
    if (cfg_.midlayer) {
      const double* lrow = local.data() + std::size_t(i) * cfg_.enc2;
      for (int k = 0; k < cfg_.enc2; ++k) row[k] = lrow[k];
      off = cfg_.enc2;
    }
    for (int k = 0; k < cfg_.enc3; ++k) row[off + k] = global.values[k];
  }
  if (local_out) *local_out = std::move(local);

  Tensor y = relu_.forward(dec1_->forward(d, c(7)), c(8));
  y = relu_.forward(dec2_->forward(y, c(9)), c(10));
  y = dec3_->forward(y, c(11));
  return sigmoid_.forward(y, c(12));  // {N, 1}
}

void SegNet::backward(const Tensor& dprobs, std::vector<Cache>& caches) {
  Tensor dy = sigmoid_.backward(dprobs, caches[12]);
  dy = dec3_->backward(dy, caches[11]);
  dy = relu_.backward(dy, caches[10]);
  dy = dec2_->backward(dy, caches[9]);
  dy = relu_.backward(dy, caches[8]);
  Tensor dd = dec1_->backward(dy, caches[7]);  // {N, dec_in}

  const int n = dd.shape[0];
  const int dec_in = dd.shape[1];
  const int local_w = cfg_.midlayer ? cfg_.enc2 : 0;
  Tensor dglobal({cfg_.enc3});
  Tensor dlocal_extra;
  if (cfg_.midlayer) dlocal_extra = Tensor({n, cfg_.enc2});
  for (int i = 0; i < n; ++i) {
    const double* row = dd.data() + std::size_t(i) * dec_in;
    if (cfg_.midlayer)
      for (int k = 0; k < cfg_.enc2; ++k)
        dlocal_extra.values[std::size_t(i) * cfg_.enc2 + k] = row[k];
    for (int k = 0; k < cfg_.enc3; ++k) dglobal.values[k] += row[local_w + k];
  }

  Tensor dfeat = gmp_.backward(dglobal, caches[6]);
  dfeat = relu_.backward(dfeat, caches[5]);
  Tensor dlocal = enc3_->backward(dfeat, caches[4]);
  if (cfg_.midlayer)
    for (std::int64_t i = 0; i < dlocal.size(); ++i) dlocal.values[i] += dlocal_extra.values[i];
  dlocal = relu_.backward(dlocal, caches[3]);
  Tensor dh = enc2_->backward(dlocal, caches[2]);
  dh = relu_.backward(dh, caches[1]);
  enc1_->backward(dh, caches[0]);
}

SegmentationResult SegNet::forward(const geom::PointCloud& centered) const {
  const Tensor probs = probs_tensor(centered, nullptr, nullptr);
  SegmentationResult out;
  out.tau = cfg_.tau;
  out.probabilities.assign(probs.values.begin(), probs.values.end());
  for (int i = 0; i < int(out.probabilities.size()); ++i)
    if (out.probabilities[i] > cfg_.tau) out.femur_indices.push_back(i);
  return out;
}

double segmentation_loss(const std::vector<double>& probs, const std::vector<double>& labels) {
  if (probs.size() != labels.size())
    fail("shape mismatch", "segmentation_loss: length mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0)
      fail("bad labels", "segmentation_loss: labels must be binary");
    loss += std::abs(probs[i] - labels[i]);
  }
  return loss;
}

double SegNet::loss_and_grad(const geom::PointCloud& centered, const std::vector<double>& labels,
                             double grad_scale) {
  std::vector<Cache> caches;
  const Tensor probs = probs_tensor(centered, &caches, nullptr);
  if (size_t(probs.shape[0]) != labels.size())
    fail("shape mismatch", "SegNet::loss_and_grad: label count mismatch");

  double loss = 0.0;
  Tensor dprobs(probs.shape);
  for (std::int64_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0)
      fail("bad labels", "SegNet::loss_and_grad: labels must be binary");
    const double d = probs.values[i] - labels[i];
    loss += std::abs(d);
    dprobs.values[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * grad_scale;
  }
  backward(dprobs, caches);
  return loss;
}

double SegNet::loss_only(const geom::PointCloud& centered,
                         const std::vector<double>& labels) const {
  const Tensor probs = probs_tensor(centered, nullptr, nullptr);
  std::vector<double> p(probs.values.begin(), probs.values.end());
  return segmentation_loss(p, labels);
}

std::vector<Tensor*> SegNet::params() {
  std::vector<Tensor*> out;
  for (nn::Linear* l : {enc1_.get(), enc2_.get(), enc3_.get(), dec1_.get(), dec2_.get(),
                        dec3_.get()})
    for (Tensor* p : l->params()) out.push_back(p);
  return out;
}

nn::ModelFile SegNet::to_model_file() const {
  nn::ModelFile file;
  file.kind = "segnet";
  file.config["enc1"] = cfg_.enc1;
  file.config["enc2"] = cfg_.enc2;
  file.config["enc3"] = cfg_.enc3;
  file.config["dec1"] = cfg_.dec1;
  file.config["dec2"] = cfg_.dec2;
  file.config["coord_scale"] = cfg_.coord_scale;
  file.config["tau"] = cfg_.tau;
  file.config["midlayer"] = cfg_.midlayer ? 1.0 : 0.0;
  auto* self = const_cast<SegNet*>(this);
  int idx = 0;
  for (Tensor* p : self->params()) file.tensors.push_back({"p" + std::to_string(idx++), *p});
  for (nn::Linear* l : {enc1_.get(), enc2_.get(), enc3_.get()})
    file.layer_specs.push_back(l->spec());
  file.layer_specs.push_back("global-max-pool");
  for (nn::Linear* l : {dec1_.get(), dec2_.get(), dec3_.get()})
    file.layer_specs.push_back(l->spec());
  return file;
}

SegNet SegNet::from_model_file(const nn::ModelFile& file) {
  if (file.kind != "segnet") fail("bad model file", "expected kind segnet, got " + file.kind);
  SegNetConfig cfg;
  cfg.enc1 = int(file.config.at("enc1"));
  cfg.enc2 = int(file.config.at("enc2"));
  cfg.enc3 = int(file.config.at("enc3"));
  cfg.dec1 = int(file.config.at("dec1"));
  cfg.dec2 = int(file.config.at("dec2"));
  cfg.coord_scale = file.config.at("coord_scale");
  cfg.tau = file.config.at("tau");
  cfg.midlayer = file.config.at("midlayer") != 0.0;

  SegNet net(cfg, 0);
  auto params = net.params();
  if (params.size() != file.tensors.size()) fail("bad model file", "segnet: tensor count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape != file.tensors[i].tensor.shape)
      fail("bad model file", "segnet: tensor " + std::to_string(i) + " shape mismatch");
    params[i]->values = file.tensors[i].tensor.values;
  }
  return net;
}

}  // namespace boneloc::percept
