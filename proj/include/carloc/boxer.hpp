#pragma once

#include "carloc/camnet.hpp"
#include "carloc/contours.hpp"
#include "carloc/morphology.hpp"

namespace carloc {

/// Knobs of the heatmap-to-box conversion.
struct BoxerConfig {
  double threshold_fraction = 0.2;  // of the normalized grayscale range
  int kernel_size = 3;              // square structuring element side
  int iterations = 8;               // closing repetitions

  void validate() const;
};

/// Min-max normalization to 8-bit: floor(255 * (v - min) / (max - min)).
/// A constant heatmap maps to all zeros, which triggers the whole-image
/// fallback downstream.
GrayU8 to_grayscale(const Heatmap& h);

/// bit = 1 iff pixel >= round(255 * threshold_fraction).
/// Throws InvalidThreshold outside (0, 1).
BinaryImage binarize(const GrayU8& g, double threshold_fraction);

/// Full conversion: grayscale -> binarize -> close -> contours -> largest ->
/// bounding rect, clipped to the heatmap grid. An empty binary image yields
/// the whole-image box, so every finite heatmap produces a valid box.
BBox heatmap_to_bbox(const Heatmap& h, const BoxerConfig& cfg);

}  // namespace carloc
