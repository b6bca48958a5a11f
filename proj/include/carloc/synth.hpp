#pragma once

#include <string>

#include "carloc/manifest.hpp"

namespace carloc {

/// Configuration for the synthetic desk-scale dataset.
///
/// Every image holds one "car" glyph on a grayscale noise background. The
/// category triple controls the glyph deterministically:
///   make  -> shape family (ellipse, box, triangle, diamond, cross, ring)
///   model -> shape variant within the family (aspect ratio and scale)
///   year  -> hue band of the fill color
/// Backgrounds are strictly achromatic and glyphs strictly chromatic, so the
/// tight foreground extent is recoverable from pixels alone.
struct SynthConfig {
  int n_images = 500;
  int image_size = 64;
  int n_makes = 4;
  int models_per_make = 3;
  int n_years = 4;
  std::uint64_t seed = 1;
  double background_noise = 0.2;  // in [0, 1]
};

/// Renders cfg.n_images PPM images into images_dir (created if needed) and
/// returns the manifest describing them. Ground-truth boxes are the tight
/// pixel extent of each rendered glyph; the split is ~70/30 train/test.
/// Byte-identical output for identical configs.
DatasetManifest synth_generate(const SynthConfig& cfg, const std::string& images_dir);

/// Rewrites image paths relative to new_base so the manifest can be saved
/// there and stay relocatable alongside its images.
DatasetManifest rebase_paths(const DatasetManifest& m, const std::string& new_base);

}  // namespace carloc
