#include "carloc/boxer.hpp"

#include <cmath>

namespace carloc {

void BoxerConfig::validate() const {
  if (threshold_fraction <= 0.0 || threshold_fraction >= 1.0)
    throw InvalidThreshold("threshold_fraction must lie in (0,1)");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw InvalidConfig("kernel_size must be odd and >= 1");
  if (iterations < 0) throw InvalidConfig("iterations must be >= 0");
}

GrayU8 to_grayscale(const Heatmap& h) {
  const float lo = h.values.minCoeff();
  const float hi = h.values.maxCoeff();
  GrayU8 g(h.values.rows(), h.values.cols());
  if (!(hi > lo)) {
    g.setZero();
    return g;
  }
  const float range = hi - lo;
  for (Eigen::Index y = 0; y < g.rows(); ++y)
    for (Eigen::Index x = 0; x < g.cols(); ++x)
      g(y, x) = std::uint8_t(std::floor(255.0f * (h.values(y, x) - lo) / range));
  return g;
}

BinaryImage binarize(const GrayU8& g, double threshold_fraction) {
  if (threshold_fraction <= 0.0 || threshold_fraction >= 1.0)
    throw InvalidThreshold("threshold_fraction must lie in (0,1)");
  const int cut = int(std::lround(255.0 * threshold_fraction));
  return (g.cast<int>() >= cut).cast<std::uint8_t>();
}

BBox heatmap_to_bbox(const Heatmap& h, const BoxerConfig& cfg) {
  cfg.validate();
  const int height = int(h.values.rows());
  const int width = int(h.values.cols());
  const BBox whole{0, 0, width, height};

  const GrayU8 gray = to_grayscale(h);
  BinaryImage bits = binarize(gray, cfg.threshold_fraction);
  if (!bits.any()) return whole;
  bits = morph_close(bits, cfg.kernel_size, cfg.iterations);
  if (!bits.any()) return whole;

  const auto contours = find_contours(bits);
  if (contours.empty()) return whole;
  return bbox_clip(bounding_rect(largest_contour(contours)), width, height);
}

}  // namespace carloc
