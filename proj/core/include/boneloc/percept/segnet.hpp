#pragma once

#include <memory>
#include <vector>

#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/nn/layers.hpp"
#include "boneloc/nn/weights_io.hpp"

namespace boneloc::percept {

/// PointNet-style per-point segmenter: shared MLPs 3->32->64->256, symmetric
/// max pooling into a global descriptor, mid-layer local-feature concat and
/// a shared decoder ending in one sigmoid channel. Input clouds are expected
/// centroid-centered; coord_scale tames the mm magnitudes.
struct SegNetConfig {
  int enc1 = 32, enc2 = 64, enc3 = 256;
  int dec1 = 128, dec2 = 64;
  double coord_scale = 0.01;
  double tau = 0.8;
  bool midlayer = true;  // concat the 64-wide local features with the global descriptor
};

struct SegmentationResult {
  std::vector<double> probabilities;  // p_j in (0,1), one per point
  std::vector<int> femur_indices;     // indices with p_j > tau
  double tau = 0.8;
};

class SegNet {
public:
  SegNet(const SegNetConfig& cfg, std::uint64_t init_seed);

  const SegNetConfig& config() const { return cfg_; }

  SegmentationResult forward(const geom::PointCloud& centered) const;

  /// Eq.-style L1 loss against binary labels; accumulates parameter
  /// gradients scaled by grad_scale.
  double loss_and_grad(const geom::PointCloud& centered, const std::vector<double>& labels,
                       double grad_scale = 1.0);
  double loss_only(const geom::PointCloud& centered, const std::vector<double>& labels) const;

  std::vector<nn::Tensor*> params();

  nn::ModelFile to_model_file() const;
  static SegNet from_model_file(const nn::ModelFile& file);

private:
  nn::Tensor probs_tensor(const geom::PointCloud& centered, std::vector<nn::Cache>* caches,
                          nn::Tensor* local_feat) const;
  void backward(const nn::Tensor& dprobs, std::vector<nn::Cache>& caches);

  SegNetConfig cfg_;
  std::unique_ptr<nn::Linear> enc1_, enc2_, enc3_;
  nn::Relu relu_;
  nn::GlobalMaxPool gmp_;
  std::unique_ptr<nn::Linear> dec1_, dec2_, dec3_;
  nn::Sigmoid sigmoid_;
};

/// Per-point sum of |p_j - label_j|; labels must be exactly 0 or 1.
double segmentation_loss(const std::vector<double>& probs, const std::vector<double>& labels);

}  // namespace boneloc::percept
