#include "boneloc/synthcam/image_io.hpp"

#include <cmath>
#include <fstream>

#include "boneloc/error.hpp"

namespace boneloc::synthcam {

namespace {

void write_header(std::ostream& os, const char* magic, int w, int h, int maxval) {
  os << magic << "\n" << w << " " << h << "\n" << maxval << "\n";
}

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_header(std::istream& is, const std::string& path) {
  PnmHeader hd;
  is >> hd.magic >> hd.width >> hd.height >> hd.maxval;
  if (!is || hd.width <= 0 || hd.height <= 0) fail("io", "bad PNM header in " + path);
  is.get();  // single whitespace after maxval
  return hd;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "cannot open " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail("io", "cannot open " + path + " for writing");
  return os;
}

}  // namespace

void write_ppm(const std::string& path, const geom::RgbFrame& frame) {
  auto os = open_out(path);
  write_header(os, "P6", frame.width, frame.height, 255);
  os.write(reinterpret_cast<const char*>(frame.rgb.data()), std::streamsize(frame.rgb.size()));
  if (!os) fail("io", "short write to " + path);
}

geom::RgbFrame read_ppm(const std::string& path) {
  auto is = open_in(path);
  const auto hd = read_header(is, path);
  if (hd.magic != "P6" || hd.maxval != 255) fail("io", "expected 8-bit P6 in " + path);
  geom::RgbFrame frame(hd.width, hd.height);
  is.read(reinterpret_cast<char*>(frame.rgb.data()), std::streamsize(frame.rgb.size()));
  if (!is) fail("io", "truncated P6 data in " + path);
  return frame;
}

void write_depth_pgm(const std::string& path, const geom::DepthFrame& depth) {
  auto os = open_out(path);
  write_header(os, "P5", depth.width, depth.height, 65535);
  std::vector<std::uint8_t> buf(depth.pixel_count() * 2);
  for (size_t i = 0; i < depth.pixel_count(); ++i) {
    const double ticks = std::lround(depth.z_mm[i] * 10.0);
    const auto v = std::uint16_t(std::min(ticks, 65535.0));
    buf[2 * i] = std::uint8_t(v >> 8);  // big-endian per the PGM convention
    buf[2 * i + 1] = std::uint8_t(v & 0xff);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!os) fail("io", "short write to " + path);
}

geom::DepthFrame read_depth_pgm(const std::string& path) {
  auto is = open_in(path);
  const auto hd = read_header(is, path);
  if (hd.magic != "P5" || hd.maxval != 65535) fail("io", "expected 16-bit P5 in " + path);
  geom::DepthFrame depth(hd.width, hd.height);
  std::vector<std::uint8_t> buf(depth.pixel_count() * 2);
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (!is) fail("io", "truncated P5 data in " + path);
  for (size_t i = 0; i < depth.pixel_count(); ++i) {
    const auto v = std::uint16_t((buf[2 * i] << 8) | buf[2 * i + 1]);
    depth.z_mm[i] = double(v) / 10.0;
  }
  return depth;
}

void write_mask_pgm(const std::string& path, const std::vector<std::uint8_t>& mask, int width,
                    int height) {
  auto os = open_out(path);
  write_header(os, "P5", width, height, 255);
  std::vector<std::uint8_t> buf(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) buf[i] = mask[i] ? 255 : 0;
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!os) fail("io", "short write to " + path);
}

std::vector<std::uint8_t> read_mask_pgm(const std::string& path, int* width, int* height) {
  auto is = open_in(path);
  const auto hd = read_header(is, path);
  if (hd.magic != "P5" || hd.maxval != 255) fail("io", "expected 8-bit P5 in " + path);
  std::vector<std::uint8_t> buf(std::size_t(hd.width) * hd.height);
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (!is) fail("io", "truncated P5 data in " + path);
  for (auto& v : buf) v = v >= 128 ? 1 : 0;
  if (width) *width = hd.width;
  if (height) *height = hd.height;
  return buf;
}

}  // namespace boneloc::synthcam
