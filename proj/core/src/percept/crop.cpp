#include "boneloc/percept/crop.hpp"

#include <algorithm>
#include <cmath>

#include "boneloc/error.hpp"
#include "boneloc/rng.hpp"

namespace boneloc::percept {

SegSample crop_and_resample(const geom::DepthFrame& depth, const geom::RoiRect& roi,
                            const geom::CameraIntrinsics& k, int n, std::uint64_t seed) {
  const geom::RoiRect box = roi.clamped(depth.width, depth.height);
  std::vector<int> valid;
  const int ylo = std::max(0, int(std::ceil(box.y0 - 1e-9)));
  const int yhi = std::min(depth.height - 1, int(std::floor(box.y1 - 1e-9)));
  const int xlo = std::max(0, int(std::ceil(box.x0 - 1e-9)));
  const int xhi = std::min(depth.width - 1, int(std::floor(box.x1 - 1e-9)));
  for (int y = ylo; y <= yhi; ++y) {
    for (int x = xlo; x <= xhi; ++x) {
      if (!box.contains_pixel(x, y)) continue;
      if (depth.at(x, y) > 0.0) valid.push_back(y * depth.width + x);
    }
  }
  if (valid.empty()) fail("empty roi", "crop_and_resample: no valid depth pixels inside roi");

  Rng rng(seed);
  std::vector<int> chosen;
  chosen.reserve(n);
  if (int(valid.size()) >= n) {
    // partial Fisher-Yates draw of n without replacement
    for (int i = 0; i < n; ++i) {
      const auto j = i + int(rng.uniform_index(valid.size() - i));
      std::swap(valid[i], valid[j]);
      chosen.push_back(valid[i]);
    }
  } else {
    chosen = valid;  // keep every distinct pixel
    while (int(chosen.size()) < n)
      chosen.push_back(valid[rng.uniform_index(valid.size())]);
  }

  SegSample sample;
  sample.source_pixel = std::move(chosen);
  sample.centered.points.reserve(n);
  for (int px : sample.source_pixel) {
    const int x = px % depth.width, y = px / depth.width;
    sample.centered.points.push_back(geom::unproject_pixel(x, y, depth.at(x, y), k));
  }
  sample.centroid = sample.centered.centroid();
  for (auto& p : sample.centered.points) p -= sample.centroid;
  return sample;
}

}  // namespace boneloc::percept
