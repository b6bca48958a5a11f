#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "carloc/bbox.hpp"
#include "carloc/image.hpp"

namespace carloc {

/// One border of a binary image, as traced by topological border following.
/// region_area and component_box describe the 8-connected foreground
/// component the border belongs to (for a hole border, the component that
/// surrounds the hole).
struct Contour {
  std::vector<std::pair<int, int>> points;  // ordered (x, y) border chain
  std::int64_t region_area = 0;
  bool is_outer = true;
  BBox component_box;
};

/// Border following over the binary image: returns every outer and hole
/// border in raster discovery order. Foreground uses 8-connectivity,
/// background 4-connectivity; the image is treated as framed by background.
std::vector<Contour> find_contours(const BinaryImage& image);

/// The outer contour with the largest region_area; ties go to the contour
/// whose component appears first in raster order (the list order). Throws
/// EmptyContourSet when the list holds no outer contour.
const Contour& largest_contour(const std::vector<Contour>& contours);

/// Tight bounding box of the contour's component pixels.
BBox bounding_rect(const Contour& contour);

}  // namespace carloc
