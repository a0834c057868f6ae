#include "boneloc/synthcam/noise.hpp"

#include <algorithm>
#include <cmath>

#include "boneloc/rng.hpp"

namespace boneloc::synthcam {

geom::DepthFrame inject_noise(const geom::DepthFrame& clean, const NoiseParams& params,
                              std::uint64_t seed) {
  geom::DepthFrame out(clean.width, clean.height);
  Rng rng(seed);
  const int w = clean.width, h = clean.height;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = rng.normal(0.0, params.sigma_xy);
      const double dy = rng.normal(0.0, params.sigma_xy);
      const double dz = rng.normal(0.0, params.z_spread);

      double value;
      if (dx == 0.0 && dy == 0.0) {
        value = clean.at(x, y);  // exact fetch keeps the zero-noise path bit-identical
      } else {
        const double sx = std::clamp(x + dx, 0.0, double(w - 1));
        const double sy = std::clamp(y + dy, 0.0, double(h - 1));
        const int x0 = std::min(int(sx), w - 2 >= 0 ? w - 2 : 0);
        const int y0 = std::min(int(sy), h - 2 >= 0 ? h - 2 : 0);
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double v00 = clean.at(x0, y0), v10 = clean.at(x1, y0);
        const double v01 = clean.at(x0, y1), v11 = clean.at(x1, y1);
        if (v00 == 0.0 || v10 == 0.0 || v01 == 0.0 || v11 == 0.0) {
          out.at(x, y) = 0.0;  // dropout propagates through the footprint
          continue;
        }
        const double fx = sx - x0, fy = sy - y0;
        value = v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
                v11 * fx * fy;
      }
      if (value == 0.0) {
        out.at(x, y) = 0.0;
        continue;
      }
      out.at(x, y) = params.z_scale != 0.0 ? std::max(0.0, value + params.z_scale * dz) : value;
    }
  }
  return out;
}

}  // namespace boneloc::synthcam
