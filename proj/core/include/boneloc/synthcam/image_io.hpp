#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boneloc/geom/camera.hpp"

namespace boneloc::synthcam {

/// Binary P6, 8-bit.
void write_ppm(const std::string& path, const geom::RgbFrame& frame);
geom::RgbFrame read_ppm(const std::string& path);

/// Binary P5, 16-bit big-endian, value = mm * 10 (0.1 mm ticks, 0 = invalid).
void write_depth_pgm(const std::string& path, const geom::DepthFrame& depth);
geom::DepthFrame read_depth_pgm(const std::string& path);

/// Binary P5, 8-bit, 255 = femur.
void write_mask_pgm(const std::string& path, const std::vector<std::uint8_t>& mask, int width,
                    int height);
std::vector<std::uint8_t> read_mask_pgm(const std::string& path, int* width, int* height);

}  // namespace boneloc::synthcam
