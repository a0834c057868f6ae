#pragma once

#include <map>
#include <string>
#include <vector>

#include "boneloc/nn/tensor.hpp"

namespace boneloc::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// On-disk model: 8-byte magic "BLOCMDL1", uint32 LE version, uint64 LE
/// header length, JSON header (kind, numeric config, layer specs, tensor
/// names + shapes), then raw little-endian doubles per tensor in declaration
/// order.
struct ModelFile {
  std::string kind;                      // "roinet" | "segnet" | ...
  std::map<std::string, double> config;  // architecture scalars
  std::vector<std::string> layer_specs;  // human-readable layer list
  std::vector<NamedTensor> tensors;
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace boneloc::nn
