#include "carloc/net.hpp"

#include <cmath>

#include "carloc/errors.hpp"
#include "carloc/rng.hpp"

namespace carloc {

FeatureMap to_feature_map(const RgbImage& img) {
  FeatureMap f = FeatureMap::zeros(3, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) f.at(c, y, x) = float(img.at(y, x, c)) / 255.0f;
  return f;
}

FeatureMap resize_map(const FeatureMap& in, int out_h, int out_w) {
  FeatureMap out = FeatureMap::zeros(in.channels, out_h, out_w);
  for (int c = 0; c < in.channels; ++c)
    out.set_plane(c, resize_bilinear(in.plane_array(c), out_h, out_w));
  return out;
}

FeatureMap hflip_map(const FeatureMap& in) {
  FeatureMap out = FeatureMap::zeros(in.channels, in.height, in.width);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x) out.at(c, y, x) = in.at(c, y, in.width - 1 - x);
  return out;
}

FeatureMap crop_map(const FeatureMap& in, int y0, int x0, int h, int w) {
  FeatureMap out = FeatureMap::zeros(in.channels, h, w);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = in.at(c, y0 + y, x0 + x);
  return out;
}

void Backbone::truncate(int n) {
  if (n < 1 || n > num_stages())
    throw InvalidConfig("truncate_after must select an existing stage");
  stages.resize(std::size_t(n));
}

namespace {

ConvLayer init_conv(int in_ch, int out_ch, int stride, Rng& rng) {
  ConvLayer l;
  l.in_channels = in_ch;
  l.out_channels = out_ch;
  l.stride = stride;
  const int fan_in = in_ch * 9;
  const float stddev = std::sqrt(2.0f / float(fan_in));
  l.weight.resize(fan_in, out_ch);
  for (Eigen::Index j = 0; j < l.weight.cols(); ++j)
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      l.weight(i, j) = stddev * float(rng.normal());
  l.bias = Eigen::VectorXf::Zero(out_ch);
  return l;
}

struct StageDef {
  int out_channels;
  int stride;
};

Backbone build(const std::string& name, const std::vector<StageDef>& defs) {
  Backbone net;
  net.name = name;
  std::uint64_t h = 0;
  for (char c : name) h = h * 131 + std::uint64_t(std::uint8_t(c));
  Rng rng(mix_seed(h, 0x6e657477ULL));
  int in_ch = 3;
  for (const auto& def : defs) {
    Stage stage;
    stage.push_back(init_conv(in_ch, def.out_channels, def.stride, rng));
    in_ch = def.out_channels;
    net.stages.push_back(std::move(stage));
  }
  return net;
}

}  // namespace

Backbone make_backbone(const std::string& name) {
  if (name == "cam-tiny")
    return build(name, {{8, 2}, {16, 2}, {32, 2}});
  if (name == "cam-small")
    return build(name, {{16, 2}, {32, 2}, {64, 2}, {128, 1}});
  if (name == "embed-128")
    return build(name, {{16, 2}, {32, 2}, {64, 2}, {128, 1}});
  if (name == "embed-2048")
    return build(name, {{32, 2}, {64, 2}, {128, 2}, {2048, 1}});
  throw InvalidConfig("unknown backbone: " + name);
}

std::vector<std::string> backbone_names() {
  return {"cam-tiny", "cam-small", "embed-128", "embed-2048"};
}

namespace {

inline int out_extent(int in, int stride) { return (in - 1) / stride + 1; }

// Gather the 3x3 neighborhoods into (H'W') x (in_ch*9). Out-of-image taps are
// zero (padding 1).
void im2col(const FeatureMap& in, int stride, Eigen::MatrixXf& cols) {
  const int out_h = out_extent(in.height, stride);
  const int out_w = out_extent(in.width, stride);
  cols.resize(Eigen::Index(out_h) * out_w, Eigen::Index(in.channels) * 9);
  for (int c = 0; c < in.channels; ++c) {
    const auto plane = in.plane(c);
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index q = Eigen::Index(c) * 9 + ky * 3 + kx;
        float* dst = cols.col(q).data();
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - 1;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - 1;
            dst[Eigen::Index(oy) * out_w + ox] =
                (sy >= 0 && sy < in.height && sx >= 0 && sx < in.width) ? plane(sy, sx)
                                                                        : 0.0f;
          }
        }
      }
  }
}

// Transpose of im2col: scatter-add column gradients back onto the input grid.
void col2im(const Eigen::MatrixXf& dcols, int channels, int in_h, int in_w, int stride,
            FeatureMap& din) {
  din = FeatureMap::zeros(channels, in_h, in_w);
  const int out_h = out_extent(in_h, stride);
  const int out_w = out_extent(in_w, stride);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index q = Eigen::Index(c) * 9 + ky * 3 + kx;
        const float* src = dcols.col(q).data();
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - 1;
          if (sy < 0 || sy >= in_h) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - 1;
            if (sx < 0 || sx >= in_w) continue;
            din.at(c, sy, sx) += src[Eigen::Index(oy) * out_w + ox];
          }
        }
      }
  }
}

}  // namespace

FeatureMap conv_forward(const ConvLayer& layer, const FeatureMap& in, ConvCache* cache) {
  Eigen::MatrixXf local_cols;
  Eigen::MatrixXf& cols = cache ? cache->cols : local_cols;
  im2col(in, layer.stride, cols);

  FeatureMap out;
  out.channels = layer.out_channels;
  out.height = out_extent(in.height, layer.stride);
  out.width = out_extent(in.width, layer.stride);
  out.data.noalias() = cols * layer.weight;
  out.data.rowwise() += layer.bias.transpose();
  out.data = out.data.cwiseMax(0.0f);
  if (cache) cache->out = out;
  return out;
}

FeatureMap conv_backward(const ConvLayer& layer, const ConvCache& cache,
                         const Eigen::MatrixXf& d_out, int in_h, int in_w, ConvGrad& grad,
                         bool want_dinput) {
  // ReLU gate: the stored output is already rectified, so out > 0 marks the
  // active units.
  Eigen::MatrixXf dz =
      (cache.out.data.array() > 0.0f).select(d_out, Eigen::MatrixXf::Zero(d_out.rows(), d_out.cols()));
  grad.dweight.noalias() += cache.cols.transpose() * dz;
  grad.dbias += dz.colwise().sum().transpose();

  FeatureMap din;
  if (want_dinput) {
    Eigen::MatrixXf dcols;
    dcols.noalias() = dz * layer.weight.transpose();
    col2im(dcols, layer.in_channels, in_h, in_w, layer.stride, din);
  }
  return din;
}

FeatureMap backbone_forward(const Backbone& net, const FeatureMap& input,
                            std::vector<ConvCache>* caches) {
  if (caches) caches->clear();
  FeatureMap x = input;
  for (const auto& stage : net.stages)
    for (const auto& layer : stage) {
      if (caches) {
        caches->emplace_back();
        x = conv_forward(layer, x, &caches->back());
      } else {
        x = conv_forward(layer, x, nullptr);
      }
    }
  return x;
}

}  // namespace carloc
