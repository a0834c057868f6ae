#include "boneloc/nn/weights_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "boneloc/error.hpp"

namespace boneloc::nn {

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'L', 'O', 'C', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
  // little-endian host assumed; static_assert guards the build platform
  static_assert(std::endian::native == std::endian::little);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model) {
  nlohmann::json header;
  header["kind"] = model.kind;
  header["config"] = model.config;
  header["layers"] = model.layer_specs;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : model.tensors) {
    tensors.push_back({{"name", t.name}, {"shape", t.tensor.shape}});
  }
  header["tensors"] = tensors;
  const std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) fail("io", "save_model: cannot open " + path);
  os.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(os, kVersion);
  write_le<std::uint64_t>(os, header_str.size());
  os.write(header_str.data(), std::streamsize(header_str.size()));
  for (const auto& t : model.tensors) {
    os.write(reinterpret_cast<const char*>(t.tensor.data()),
             std::streamsize(t.tensor.values.size() * sizeof(double)));
  }
  if (!os) fail("io", "save_model: write failed for " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "load_model: cannot open " + path);

  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) fail("bad model file", "load_model: bad magic in " + path);
  const auto version = read_le<std::uint32_t>(is);
  if (version != kVersion)
    fail("bad model file", "load_model: unsupported version " + std::to_string(version));
  const auto header_len = read_le<std::uint64_t>(is);
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), std::streamsize(header_len));
  if (!is) fail("bad model file", "load_model: truncated header in " + path);

  nlohmann::json header = nlohmann::json::parse(header_str);
  ModelFile model;
  model.kind = header.at("kind").get<std::string>();
  model.config = header.at("config").get<std::map<std::string, double>>();
  model.layer_specs = header.value("layers", std::vector<std::string>{});
  for (const auto& entry : header.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.tensor = Tensor(entry.at("shape").get<std::vector<int>>());
    is.read(reinterpret_cast<char*>(t.tensor.values.data()),
            std::streamsize(t.tensor.values.size() * sizeof(double)));
    model.tensors.push_back(std::move(t));
  }
  if (!is) fail("bad model file", "load_model: truncated tensor data in " + path);
  return model;
}

}  // namespace boneloc::nn
