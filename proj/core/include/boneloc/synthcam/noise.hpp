#pragma once

#include <cstdint>

#include "boneloc/geom/camera.hpp"
#include "boneloc/synthcam/scene.hpp"

namespace boneloc::synthcam {

/// Pixel-offset + depth-deviation sampling noise. Each output pixel is the
/// bilinear sample of `clean` at (x+dx, y+dy) plus z_scale*dz, with
/// (dx, dy) ~ N(0, sigma_xy) and dz ~ N(0, z_spread). A sample whose 2x2
/// footprint touches a zero-depth cell propagates 0. Deterministic per seed:
/// three normal draws per pixel in row-major order, regardless of outcome.
geom::DepthFrame inject_noise(const geom::DepthFrame& clean, const NoiseParams& params,
                              std::uint64_t seed);

}  // namespace boneloc::synthcam
