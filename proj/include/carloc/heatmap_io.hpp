#pragma once

#include <string>
#include <vector>

#include "carloc/camnet.hpp"

namespace carloc {

/// Writes <dir>/<image_id>.f32 (raw little-endian float32, row-major) and the
/// sidecar <dir>/<image_id>.json with {image_id, class_index, height, width}.
void save_heatmap(const Heatmap& h, const std::string& dir);

/// Loads a heatmap by image id from its .f32/.json pair.
Heatmap load_heatmap(const std::string& dir, const std::string& image_id);

/// Image ids present in a heatmap directory, sorted.
std::vector<std::string> list_heatmaps(const std::string& dir);

}  // namespace carloc
