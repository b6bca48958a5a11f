#pragma once

#include <optional>
#include <vector>

#include "carloc/bbox.hpp"
#include "carloc/image.hpp"

namespace carloc {

/// Draws a 2-px rectangle outline for the prediction (red) and optionally the
/// ground truth (green, drawn last). Throws OutOfBounds when a box leaves the
/// image.
RgbImage render_overlay(const RgbImage& image, const BBox& pred,
                        const std::optional<BBox>& gt = std::nullopt);

/// Row-major grid montage of grayscale cells, each padded to the largest cell
/// size with black.
GrayU8 render_cam_panel(const std::vector<GrayU8>& heatmaps, int columns);

}  // namespace carloc
