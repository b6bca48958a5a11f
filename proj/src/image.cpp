#include "carloc/image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "carloc/errors.hpp"

namespace carloc {

RgbImage make_rgb(int width, int height, std::uint8_t fill) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(std::size_t(3) * width * height, fill);
  return img;
}

namespace {

// Skips whitespace and '#' comments inside a PNM header.
int pnm_next_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF) throw UnreadableImage("truncated PNM header: " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

void read_pnm_header(std::istream& in, const std::string& path, const char* magic,
                     int& width, int& height) {
  char m0 = char(in.get()), m1 = char(in.get());
  if (m0 != magic[0] || m1 != magic[1])
    throw UnreadableImage(std::string("expected ") + magic + " file: " + path);
  width = pnm_next_int(in, path);
  height = pnm_next_int(in, path);
  const int maxval = pnm_next_int(in, path);
  if (width < 1 || height < 1 || maxval != 255)
    throw UnreadableImage("unsupported PNM geometry in " + path);
}

}  // namespace

void write_ppm(const RgbImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableImage("cannot open for write: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
  if (!out) throw UnreadableImage("short write: " + path);
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableImage("cannot open: " + path);
  int w = 0, h = 0;
  read_pnm_header(in, path, "P6", w, h);
  RgbImage img = make_rgb(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (in.gcount() != std::streamsize(img.pixels.size()))
    throw UnreadableImage("truncated pixel data: " + path);
  return img;
}

void write_pgm(const GrayU8& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableImage("cannot open for write: " + path);
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < img.cols(); ++x)
      out.put(char(img(y, x)));
  if (!out) throw UnreadableImage("short write: " + path);
}

GrayU8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableImage("cannot open: " + path);
  int w = 0, h = 0;
  read_pnm_header(in, path, "P5", w, h);
  GrayU8 img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int c = in.get();
      if (c == EOF) throw UnreadableImage("truncated pixel data: " + path);
      img(y, x) = std::uint8_t(c);
    }
  return img;
}

namespace {

bool probe_jpeg(std::ifstream& in, int& width, int& height) {
  // Walk the marker segments until a start-of-frame header.
  unsigned char b[4];
  in.seekg(2);
  while (in.read(reinterpret_cast<char*>(b), 2)) {
    if (b[0] != 0xFF) return false;
    unsigned char marker = b[1];
    while (marker == 0xFF) {
      if (!in.read(reinterpret_cast<char*>(&marker), 1)) return false;
    }
    if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) continue;
    if (!in.read(reinterpret_cast<char*>(b), 2)) return false;
    const int seg_len = (b[0] << 8) | b[1];
    const bool is_sof = (marker >= 0xC0 && marker <= 0xCF) && marker != 0xC4 &&
                        marker != 0xC8 && marker != 0xCC;
    if (is_sof) {
      unsigned char sof[5];
      if (!in.read(reinterpret_cast<char*>(sof), 5)) return false;
      height = (sof[1] << 8) | sof[2];
      width = (sof[3] << 8) | sof[4];
      return width > 0 && height > 0;
    }
    in.seekg(seg_len - 2, std::ios::cur);
  }
  return false;
}

bool probe_png(std::ifstream& in, int& width, int& height) {
  unsigned char b[8];
  in.seekg(16);
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  width = (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3];
  height = (b[4] << 24) | (b[5] << 16) | (b[6] << 8) | b[7];
  return width > 0 && height > 0;
}

}  // namespace

void probe_image_size(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableImage("cannot open: " + path);
  unsigned char magic[8] = {0};
  in.read(reinterpret_cast<char*>(magic), 8);
  if (in.gcount() < 2) throw UnreadableImage("file too short: " + path);
  in.clear();

  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    in.seekg(2);
    width = pnm_next_int(in, path);
    height = pnm_next_int(in, path);
    return;
  }
  if (magic[0] == 0xFF && magic[1] == 0xD8) {
    if (probe_jpeg(in, width, height)) return;
    throw UnreadableImage("no JPEG frame header found: " + path);
  }
  if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
    if (probe_png(in, width, height)) return;
    throw UnreadableImage("bad PNG header: " + path);
  }
  throw UnreadableImage("unrecognized image format: " + path);
}

Plane resize_bilinear(const Plane& src, int out_h, int out_w) {
  const int in_h = int(src.rows()), in_w = int(src.cols());
  Plane dst(out_h, out_w);
  if (in_h == out_h && in_w == out_w) {
    dst = src;
    return dst;
  }
  const float sy = float(in_h) / float(out_h);
  const float sx = float(in_w) / float(out_w);
  for (int y = 0; y < out_h; ++y) {
    const float fy = std::clamp((y + 0.5f) * sy - 0.5f, 0.0f, float(in_h - 1));
    const int y0 = int(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const float wy = fy - float(y0);
    for (int x = 0; x < out_w; ++x) {
      const float fx = std::clamp((x + 0.5f) * sx - 0.5f, 0.0f, float(in_w - 1));
      const int x0 = int(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const float wx = fx - float(x0);
      const float top = src(y0, x0) * (1.0f - wx) + src(y0, x1) * wx;
      const float bot = src(y1, x0) * (1.0f - wx) + src(y1, x1) * wx;
      dst(y, x) = top * (1.0f - wy) + bot * wy;
    }
  }
  return dst;
}

}  // namespace carloc
