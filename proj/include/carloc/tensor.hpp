#pragma once

#include <Eigen/Dense>

#include "carloc/image.hpp"

namespace carloc {

/// Dense C x H x W activation tensor. Storage is one column per channel with
/// pixels flattened row-major (p = y*width + x), which makes convolution a
/// single matrix product against an im2col matrix and global average pooling
/// a column-wise mean.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Eigen::MatrixXf data;  // (height*width) x channels

  static FeatureMap zeros(int c, int h, int w) {
    FeatureMap f;
    f.channels = c;
    f.height = h;
    f.width = w;
    f.data = Eigen::MatrixXf::Zero(Eigen::Index(h) * w, c);
    return f;
  }

  float& at(int c, int y, int x) { return data(Eigen::Index(y) * width + x, c); }
  float at(int c, int y, int x) const { return data(Eigen::Index(y) * width + x, c); }

  using PlaneView = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>;
  PlaneView plane(int c) const { return PlaneView(data.col(c).data(), height, width); }

  /// Copies one channel into a (y, x) array.
  Plane plane_array(int c) const {
    Plane p(height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) p(y, x) = at(c, y, x);
    return p;
  }

  void set_plane(int c, const Plane& p) {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) at(c, y, x) = p(y, x);
  }

  /// Per-channel spatial mean (global average pooling).
  Eigen::VectorXf gap() const { return data.colwise().mean().transpose(); }
};

/// Converts 8-bit RGB to a 3-channel float map scaled to [0, 1].
FeatureMap to_feature_map(const RgbImage& img);

FeatureMap resize_map(const FeatureMap& in, int out_h, int out_w);
FeatureMap hflip_map(const FeatureMap& in);
FeatureMap crop_map(const FeatureMap& in, int y0, int x0, int h, int w);

}  // namespace carloc
