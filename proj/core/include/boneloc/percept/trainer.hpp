#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boneloc/percept/roinet.hpp"
#include "boneloc/percept/segnet.hpp"

namespace boneloc::percept {

struct TrainOptions {
  int epochs = 10;
  std::uint64_t seed = 1;
  double base_lr = 1e-3;
  double lr_decay = 0.95;
  int batch_size = 0;  // 0 = module default (4 for RoI, 32 for Seg)
  bool midlayer = true;
  int n_points = 2000;
  double tau = 0.8;
  std::string model_out;  // best-validation checkpoint path; empty = don't persist
  std::string log_csv;    // per-epoch CSV: epoch,train_loss,val_loss,metric
  int max_captures = 0;   // 0 = whole dataset
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when the validation split is empty
  double metric = 0.0;    // RoI success rate / point IoU on validation
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

/// Train on the labelled dataset with a seeded 8:2 train/validation split.
/// Deterministic given (dataset, options.seed). When `out_net` is non-null
/// it receives the best-validation weights.
TrainResult train_roinet(const std::string& dataset_dir, const TrainOptions& options,
                         RoiNet* out_net = nullptr);
TrainResult train_segnet(const std::string& dataset_dir, const TrainOptions& options,
                         SegNet* out_net = nullptr);

/// Derived per-capture resampling seed shared by training and tracking.
std::uint64_t crop_seed(std::uint64_t capture_seed);

}  // namespace boneloc::percept
