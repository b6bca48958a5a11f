#include "carloc/viz.hpp"

#include <algorithm>

namespace carloc {

namespace {

void draw_rect(RgbImage& img, const BBox& b, std::uint8_t r, std::uint8_t g, std::uint8_t bl) {
  const int thickness = 2;
  auto paint = [&](int y, int x) {
    img.at(y, x, 0) = r;
    img.at(y, x, 1) = g;
    img.at(y, x, 2) = bl;
  };
  for (int t = 0; t < std::min(thickness, b.h); ++t)
    for (int x = b.x; x < b.x + b.w; ++x) {
      paint(b.y + t, x);
      paint(b.y + b.h - 1 - t, x);
    }
  for (int t = 0; t < std::min(thickness, b.w); ++t)
    for (int y = b.y; y < b.y + b.h; ++y) {
      paint(y, b.x + t);
      paint(y, b.x + b.w - 1 - t);
    }
}

}  // namespace

RgbImage render_overlay(const RgbImage& image, const BBox& pred,
                        const std::optional<BBox>& gt) {
  auto check = [&](const BBox& b, const char* what) {
    if (b.x < 0 || b.y < 0 || b.x + b.w > image.width || b.y + b.h > image.height)
      throw OutOfBounds(std::string(what) + " box leaves the image");
  };
  check(pred, "prediction");
  if (gt) check(*gt, "ground-truth");

  RgbImage out = image;
  draw_rect(out, pred, 230, 40, 40);
  if (gt) draw_rect(out, *gt, 40, 200, 70);  // drawn last, wins per pixel
  return out;
}

GrayU8 render_cam_panel(const std::vector<GrayU8>& heatmaps, int columns) {
  if (heatmaps.empty()) throw InvalidCount("panel needs at least one heatmap");
  if (columns < 1) throw InvalidCount("columns must be >= 1");

  Eigen::Index cell_h = 1, cell_w = 1;
  for (const auto& m : heatmaps) {
    cell_h = std::max(cell_h, m.rows());
    cell_w = std::max(cell_w, m.cols());
  }
  const int n = int(heatmaps.size());
  const int rows = (n + columns - 1) / columns;

  GrayU8 panel = GrayU8::Zero(rows * cell_h, Eigen::Index(columns) * cell_w);
  for (int i = 0; i < n; ++i) {
    const auto& m = heatmaps[std::size_t(i)];
    const Eigen::Index oy = Eigen::Index(i / columns) * cell_h;
    const Eigen::Index ox = Eigen::Index(i % columns) * cell_w;
    panel.block(oy, ox, m.rows(), m.cols()) = m;
  }
  return panel;
}

}  // namespace carloc
