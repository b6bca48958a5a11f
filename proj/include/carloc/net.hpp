#pragma once

#include <string>
#include <vector>

#include "carloc/tensor.hpp"

namespace carloc {

/// 3x3 convolution with padding 1 and a ReLU, the only layer type the
/// backbones are built from.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  Eigen::MatrixXf weight;  // (in_channels*9) x out_channels
  Eigen::VectorXf bias;    // out_channels
};

using Stage = std::vector<ConvLayer>;

/// A small fully-convolutional feature extractor: an ordered list of stages
/// (1-based in every public interface, mirroring how residual networks number
/// their blocks). Weights are a pure function of the architecture name, so
/// two processes construct bit-identical backbones.
struct Backbone {
  std::string name;
  std::vector<Stage> stages;

  int num_stages() const { return int(stages.size()); }
  int out_channels() const { return stages.back().back().out_channels; }

  /// Keeps stages 1..n and drops the rest.
  void truncate(int n);
};

/// Architecture registry. Known names:
///   cam-tiny    3 stages, 32-d features  (fast tests)
///   cam-small   4 stages, 128-d features (desk-scale training)
///   embed-128   4 stages, 128-d features (desk-scale embedding extractor)
///   embed-2048  4 stages, 2048-d features (matches the reference embedding width)
Backbone make_backbone(const std::string& name);
std::vector<std::string> backbone_names();

/// im2col buffer plus the post-activation output of one layer.
struct ConvCache {
  Eigen::MatrixXf cols;  // (H'W') x (in_channels*9)
  FeatureMap out;
};

/// Gradient accumulators matching a ConvLayer.
struct ConvGrad {
  Eigen::MatrixXf dweight;
  Eigen::VectorXf dbias;

  static ConvGrad zeros_like(const ConvLayer& l) {
    return ConvGrad{Eigen::MatrixXf::Zero(l.weight.rows(), l.weight.cols()),
                    Eigen::VectorXf::Zero(l.bias.size())};
  }
};

FeatureMap conv_forward(const ConvLayer& layer, const FeatureMap& in, ConvCache* cache);

/// Backward through ReLU + conv. d_out is the gradient w.r.t. the
/// post-activation output; returns the gradient w.r.t. the layer input
/// (skipped when want_dinput is false) and accumulates into grad.
FeatureMap conv_backward(const ConvLayer& layer, const ConvCache& cache,
                         const Eigen::MatrixXf& d_out, int in_h, int in_w, ConvGrad& grad,
                         bool want_dinput);

/// Runs the input through every stage.
FeatureMap backbone_forward(const Backbone& net, const FeatureMap& input,
                            std::vector<ConvCache>* caches = nullptr);

}  // namespace carloc
