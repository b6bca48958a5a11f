#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "carloc/errors.hpp"

namespace carloc {

/// Axis-aligned integer rectangle in pixel coordinates.
/// Covers the half-open pixel set [x, x+w) x [y, y+h), so area() equals the
/// number of raster pixels inside the box.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  std::int64_t area() const { return std::int64_t(w) * std::int64_t(h); }

  friend bool operator==(const BBox& a, const BBox& b) = default;
};

/// Validating constructor; the only sanctioned way to build a BBox from
/// untrusted input.
inline BBox make_bbox(int x, int y, int w, int h) {
  if (w < 1 || h < 1)
    throw NonPositiveExtent("bbox extent must be positive, got w=" + std::to_string(w) +
                            " h=" + std::to_string(h));
  if (x < 0 || y < 0)
    throw NegativeOrigin("bbox origin must be non-negative, got x=" + std::to_string(x) +
                         " y=" + std::to_string(y));
  return BBox{x, y, w, h};
}

/// Number of pixels shared by both boxes, in exact integer arithmetic.
inline std::int64_t bbox_intersection_area(const BBox& a, const BBox& b) {
  const std::int64_t iw =
      std::min<std::int64_t>(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const std::int64_t ih =
      std::min<std::int64_t>(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return std::max<std::int64_t>(0, iw) * std::max<std::int64_t>(0, ih);
}

/// Intersection over union. The union is computed in integer arithmetic, so
/// identical boxes give exactly 1.0 and disjoint boxes exactly 0.0.
inline double bbox_iou(const BBox& a, const BBox& b) {
  const std::int64_t inter = bbox_intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Translates the box by (dx, dy) without validation.
inline BBox bbox_shift(const BBox& b, int dx, int dy) {
  return BBox{b.x + dx, b.y + dy, b.w, b.h};
}

/// Clips the box to the image rectangle [0,width) x [0,height).
/// A box entirely outside degenerates to the nearest 1x1 in-bounds box.
inline BBox bbox_clip(const BBox& b, int width, int height) {
  int x0 = std::clamp(b.x, 0, width - 1);
  int y0 = std::clamp(b.y, 0, height - 1);
  int x1 = std::clamp(b.x + b.w, x0 + 1, width);
  int y1 = std::clamp(b.y + b.h, y0 + 1, height);
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

/// A single image on disk, as referenced by a dataset manifest.
struct ImageRef {
  std::string id;
  std::string path;
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageRef& a, const ImageRef& b) = default;
};

}  // namespace carloc
