#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace carloc {

/// 8-bit single-channel raster, indexed (y, x).
using GrayU8 = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Bit raster stored one byte per pixel with values in {0, 1}, indexed (y, x).
using BinaryImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Real-valued single-channel plane, indexed (y, x).
using Plane = Eigen::ArrayXXf;

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size = 3 * width * height, row-major rgb

  std::uint8_t& at(int y, int x, int c) { return pixels[std::size_t(3) * (std::size_t(y) * width + x) + c]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[std::size_t(3) * (std::size_t(y) * width + x) + c]; }
};

RgbImage make_rgb(int width, int height, std::uint8_t fill = 0);

// Binary PPM (P6) / PGM (P5) codecs, maxval 255.
void write_ppm(const RgbImage& img, const std::string& path);
RgbImage read_ppm(const std::string& path);
void write_pgm(const GrayU8& img, const std::string& path);
GrayU8 read_pgm(const std::string& path);

/// Reads only the dimensions of a PPM/PGM/PNG/JPEG file.
/// Throws UnreadableImage if the file is missing or the header is not recognized.
void probe_image_size(const std::string& path, int& width, int& height);

/// Bilinear resample with half-pixel-center alignment.
Plane resize_bilinear(const Plane& src, int out_h, int out_w);

/// Mirrors a plane left-right.
inline Plane hflip(const Plane& p) { return p.rowwise().reverse(); }

}  // namespace carloc
