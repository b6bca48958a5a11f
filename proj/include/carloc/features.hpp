#pragma once

#include <string>

#include "carloc/kmeans.hpp"
#include "carloc/manifest.hpp"

namespace carloc {

/// Runs every manifest image through the named backbone and keeps the
/// global-average-pooled final convolutional features (the classifier input).
/// Inference only: deterministic resize to `image_size` on the shorter side,
/// center crop, normalization; no augmentation, no parameter updates.
/// Throws UnreadableImage naming the offending id.
FeatureTable extract_features(const DatasetManifest& manifest, const std::string& extractor,
                              int image_size = 64);

}  // namespace carloc
