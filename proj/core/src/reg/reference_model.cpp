#include "boneloc/reg/reference_model.hpp"

#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "boneloc/error.hpp"

namespace boneloc::reg {

void save_reference(const std::string& path, const ReferenceModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail("io", "save_reference: cannot open " + path);
  static_assert(std::endian::native == std::endian::little);
  const std::uint64_t count = model.surface.size();
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& p : model.surface.points)
    os.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(double));
  if (!os) fail("io", "save_reference: short write to " + path);

  nlohmann::json side;
  side["hip"] = {model.hip_center.x(), model.hip_center.y(), model.hip_center.z()};
  side["count"] = count;
  std::ofstream js(path + ".json");
  if (!js) fail("io", "save_reference: cannot open " + path + ".json");
  js << side.dump(2) << "\n";
}

ReferenceModel load_reference(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "load_reference: cannot open " + path);
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  geom::PointCloud cloud;
  cloud.points.resize(count);
  for (auto& p : cloud.points) is.read(reinterpret_cast<char*>(p.data()), 3 * sizeof(double));
  if (!is) fail("io", "load_reference: truncated cloud in " + path);

  std::ifstream js(path + ".json");
  if (!js) fail("io", "load_reference: missing sidecar " + path + ".json");
  const auto side = nlohmann::json::parse(js);
  const auto& hip = side.at("hip");
  const Eigen::Vector3d hip_center(hip.at(0).get<double>(), hip.at(1).get<double>(),
                                   hip.at(2).get<double>());
  return ReferenceModel(std::move(cloud), hip_center);
}

}  // namespace boneloc::reg
