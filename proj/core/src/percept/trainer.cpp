#include "boneloc/percept/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "boneloc/error.hpp"
#include "boneloc/nn/adam.hpp"
#include "boneloc/percept/crop.hpp"
#include "boneloc/rng.hpp"
#include "boneloc/synthcam/dataset.hpp"

namespace boneloc::percept {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Split {
  std::vector<int> train, val;
};

Split split_8_2(int n, std::uint64_t seed) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(mix(seed, 0x5171));
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_index(std::uint64_t(i) + 1)]);
  const int n_train = std::max(1, int(std::lround(0.8 * n)));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + std::min(n_train, n));
  s.val.assign(idx.begin() + std::min(n_train, n), idx.end());
  return s;
}

void shuffle_in_place(std::vector<int>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

void write_log(const std::string& path, const std::vector<EpochLog>& log) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) fail("io", "cannot write training log " + path);
  os << "epoch,train_loss,val_loss,metric\n";
  for (const auto& e : log)
    os << e.epoch << "," << e.train_loss << "," << e.val_loss << "," << e.metric << "\n";
}

std::vector<std::string> capture_dirs(const std::string& dataset_dir, int max_captures) {
  const auto manifest = synthcam::load_manifest(dataset_dir);
  if (manifest.captures.empty()) fail("empty dataset", "no captures in " + dataset_dir);
  std::vector<std::string> dirs;
  for (const auto& e : manifest.captures) dirs.push_back(dataset_dir + "/" + e.dir);
  if (max_captures > 0 && int(dirs.size()) > max_captures) dirs.resize(max_captures);
  return dirs;
}

// generic epoch loop shared by both trainers
template <typename Net, typename SampleLossGrad, typename SampleLoss, typename Metric>
TrainResult run_training(Net& net, int n_samples, const TrainOptions& opt, int default_batch,
                         SampleLossGrad&& loss_grad, SampleLoss&& loss_only, Metric&& metric,
                         std::function<void(const Net&)> persist) {
  const int batch = opt.batch_size > 0 ? opt.batch_size : default_batch;
  const Split split = split_8_2(n_samples, opt.seed);

  nn::OptimizerState optim;
  optim.base_lr = opt.base_lr;
  optim.decay_per_epoch = opt.lr_decay;
  auto params = net.params();

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  double best_metric = -std::numeric_limits<double>::infinity();
  std::vector<nn::Tensor> best_params;

  std::vector<int> order = split.train;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    optim.epoch = epoch;
    Rng shuffle_rng(mix(opt.seed, 0xe60c + std::uint64_t(epoch)));
    shuffle_in_place(order, shuffle_rng);

    double train_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      nn::zero_grads(params);
      const double scale = 1.0 / double(end - start);
      for (size_t i = start; i < end; ++i) train_loss += loss_grad(order[i], scale);
      nn::adam_step(optim, params);
    }
    train_loss /= double(order.size());

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = train_loss;
    if (!split.val.empty()) {
      double val_loss = 0.0;
      for (int i : split.val) val_loss += loss_only(i);
      log.val_loss = val_loss / double(split.val.size());
      log.metric = metric(split.val);
      // checkpoint on the validation metric; val loss breaks ties
      if (log.metric > best_metric ||
          (log.metric == best_metric && log.val_loss < result.best_val_loss)) {
        best_metric = log.metric;
        result.best_val_loss = log.val_loss;
        result.best_epoch = epoch;
        best_params.clear();
        for (nn::Tensor* p : params) best_params.push_back(*p);
      }
    } else {
      log.val_loss = std::numeric_limits<double>::quiet_NaN();
      log.metric = std::numeric_limits<double>::quiet_NaN();
    }
    result.epochs.push_back(log);
  }

  if (!best_params.empty()) {
    for (size_t i = 0; i < params.size(); ++i) params[i]->values = best_params[i].values;
  }
  persist(net);
  return result;
}

}  // namespace

std::uint64_t crop_seed(std::uint64_t capture_seed) { return mix(capture_seed, 0xc409); }

TrainResult train_roinet(const std::string& dataset_dir, const TrainOptions& opt,
                         RoiNet* out_net) {
  const auto dirs = capture_dirs(dataset_dir, opt.max_captures);

  RoiNetConfig cfg;
  cfg.midlayer = opt.midlayer;
  RoiNet net(cfg, mix(opt.seed, 0x401));

  // keep frames as uint8; prepared tensors are built per visit
  std::vector<geom::RgbFrame> frames;
  std::vector<geom::RoiRect> gt_canvas;
  std::vector<geom::RoiRect> gt_frame;
  frames.reserve(dirs.size());
  for (const auto& dir : dirs) {
    auto cap = synthcam::read_capture(dir);
    const Letterbox lb = net.letterbox_for(cap.rgb);
    gt_frame.push_back(cap.roi_gt);
    gt_canvas.push_back(to_canvas(lb, cap.roi_gt));
    frames.push_back(std::move(cap.rgb));
  }

  auto result = run_training<RoiNet>(
      net, int(frames.size()), opt, 4,
      [&](int i, double scale) {
        return net.loss_and_grad(net.prepare_input(frames[i]), gt_canvas[i], scale);
      },
      [&](int i) { return net.loss_only(net.prepare_input(frames[i]), gt_canvas[i]); },
      [&](const std::vector<int>& val) {
        int hits = 0;
        for (int i : val) {
          try {
            if (geom::rect_iou(net.predict(frames[i]), gt_frame[i]) > 0.5) ++hits;
          } catch (const Error&) {
          }
        }
        return double(hits) / double(val.size());
      },
      [&](const RoiNet& trained) {
        if (!opt.model_out.empty()) nn::save_model(opt.model_out, trained.to_model_file());
      });
  write_log(opt.log_csv, result.epochs);
  if (out_net) *out_net = std::move(net);
  return result;
}

TrainResult train_segnet(const std::string& dataset_dir, const TrainOptions& opt,
                         SegNet* out_net) {
  const auto dirs = capture_dirs(dataset_dir, opt.max_captures);

  SegNetConfig cfg;
  cfg.tau = opt.tau;
  cfg.midlayer = opt.midlayer;
  SegNet net(cfg, mix(opt.seed, 0x5e6));

  // precompute resampled clouds + labels once; resampling is seeded per capture
  std::vector<geom::PointCloud> clouds;
  std::vector<std::vector<double>> labels;
  clouds.reserve(dirs.size());
  for (const auto& dir : dirs) {
    const auto cap = synthcam::read_capture(dir);
    const auto sample =
        crop_and_resample(cap.depth, cap.roi_gt, cap.intrinsics, opt.n_points, crop_seed(cap.seed));
    std::vector<double> label(sample.source_pixel.size());
    for (size_t i = 0; i < label.size(); ++i)
      label[i] = cap.femur_mask[size_t(sample.source_pixel[i])] ? 1.0 : 0.0;
    clouds.push_back(sample.centered);
    labels.push_back(std::move(label));
  }

  auto point_iou = [&](int i) {
    const auto seg = net.forward(clouds[i]);
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (size_t j = 0; j < labels[i].size(); ++j) {
      const bool pred = seg.probabilities[j] > cfg.tau;
      const bool gt = labels[i][j] != 0.0;
      tp += pred && gt;
      fp += pred && !gt;
      fn += !pred && gt;
    }
    return tp + fp + fn == 0 ? 1.0 : double(tp) / double(tp + fp + fn);
  };

  auto result = run_training<SegNet>(
      net, int(clouds.size()), opt, 32,
      [&](int i, double scale) { return net.loss_and_grad(clouds[i], labels[i], scale); },
      [&](int i) { return net.loss_only(clouds[i], labels[i]); },
      [&](const std::vector<int>& val) {
        double sum = 0.0;
        for (int i : val) sum += point_iou(i);
        return sum / double(val.size());
      },
      [&](const SegNet& trained) {
        if (!opt.model_out.empty()) nn::save_model(opt.model_out, trained.to_model_file());
      });
  write_log(opt.log_csv, result.epochs);
  if (out_net) *out_net = std::move(net);
  return result;
}

}  // namespace boneloc::percept
