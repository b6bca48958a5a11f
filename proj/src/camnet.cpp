#include "carloc/camnet.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

using nlohmann::json;

namespace carloc {

const float kNormMean[3] = {0.485f, 0.456f, 0.406f};
const float kNormStd[3] = {0.229f, 0.224f, 0.225f};

void normalize_map(FeatureMap& map) {
  for (int c = 0; c < 3; ++c)
    map.data.col(c) = (map.data.col(c).array() - kNormMean[c]) / kNormStd[c];
}

FeatureMap preprocess_train(const RgbImage& image, int crop_size, Rng& rng) {
  FeatureMap x = to_feature_map(image);
  // Shorter side to crop_size; the longer side keeps the aspect ratio.
  int out_h, out_w;
  if (image.height <= image.width) {
    out_h = crop_size;
    out_w = std::max(crop_size, int(std::lround(double(image.width) * crop_size / image.height)));
  } else {
    out_w = crop_size;
    out_h = std::max(crop_size, int(std::lround(double(image.height) * crop_size / image.width)));
  }
  x = resize_map(x, out_h, out_w);
  const int oy = out_h > crop_size ? rng.uniform_int(0, out_h - crop_size) : 0;
  const int ox = out_w > crop_size ? rng.uniform_int(0, out_w - crop_size) : 0;
  x = crop_map(x, oy, ox, crop_size, crop_size);
  if (rng.bernoulli(0.5)) x = hflip_map(x);
  normalize_map(x);
  return x;
}

std::pair<FeatureMap, FeatureMap> preprocess_eval(const RgbImage& image) {
  FeatureMap full = to_feature_map(image);
  FeatureMap half = hflip_map(full);
  half = resize_map(half, image.height / 2, image.width / 2);
  normalize_map(full);
  normalize_map(half);
  return {std::move(full), std::move(half)};
}

Eigen::VectorXf class_logits(const CamWeights& weights, const FeatureMap& features) {
  return weights.fc_weight.transpose() * features.gap() + weights.fc_bias;
}

Heatmap cam_map(const CamWeights& weights, const FeatureMap& features, int class_index,
                bool include_bias) {
  if (class_index < 0 || class_index >= weights.num_classes())
    throw IndexOutOfRange("class index " + std::to_string(class_index) + " not in [0, " +
                          std::to_string(weights.num_classes()) + ")");
  Eigen::VectorXf projected = features.data * weights.fc_weight.col(class_index);
  if (include_bias) projected.array() += weights.fc_bias(class_index);
  projected = projected.cwiseMax(0.0f);

  Heatmap h;
  h.class_index = class_index;
  h.source_height = features.height;
  h.source_width = features.width;
  h.values.resize(features.height, features.width);
  for (int y = 0; y < features.height; ++y)
    for (int x = 0; x < features.width; ++x)
      h.values(y, x) = projected(Eigen::Index(y) * features.width + x);
  return h;
}

Eigen::ArrayXXf sum_with_mirrored(const Eigen::ArrayXXf& original_map,
                                  const Eigen::ArrayXXf& flipped_map, int out_h, int out_w) {
  const Plane mirrored = flipped_map.rowwise().reverse();
  return resize_bilinear(original_map, out_h, out_w) +
         resize_bilinear(mirrored, out_h, out_w);
}

Heatmap infer_heatmap(const CamWeights& weights, const RgbImage& image) {
  auto [full, half] = preprocess_eval(image);
  const FeatureMap f_full = backbone_forward(weights.backbone, full);
  const FeatureMap f_half = backbone_forward(weights.backbone, half);

  // Class choice uses the original branch only.
  Eigen::Index best;
  class_logits(weights, f_full).maxCoeff(&best);
  const int class_index = int(best);

  const Heatmap m_full = cam_map(weights, f_full, class_index);
  const Heatmap m_half = cam_map(weights, f_half, class_index);

  Heatmap out;
  out.class_index = class_index;
  out.source_height = image.height;
  out.source_width = image.width;
  out.values = sum_with_mirrored(m_full.values, m_half.values, image.height, image.width);
  return out;
}

namespace {

struct SgdState {
  std::vector<std::vector<ConvGrad>> velocity;  // per stage, per layer
  Eigen::MatrixXf fc_w_vel;
  Eigen::VectorXf fc_b_vel;
};

bool stage_frozen(const CamModelSpec& spec, int stage_index_1based) {
  return std::find(spec.frozen_stages.begin(), spec.frozen_stages.end(), stage_index_1based) !=
         spec.frozen_stages.end();
}

}  // namespace

CamWeights train(const DatasetManifest& manifest, const LabelAssignment& labels,
                 const CamModelSpec& spec, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (cfg.crop_size < 64) throw InvalidConfig("crop_size must be >= 64");

  const int num_classes = spec.num_classes > 0 ? spec.num_classes : labels.num_classes();
  if (num_classes != labels.num_classes())
    throw LabelMismatch("spec expects " + std::to_string(num_classes) + " classes but label space '" +
                        labels.space_name + "' has " + std::to_string(labels.num_classes()));
  if (num_classes < 2) throw LabelMismatch("need at least 2 classes to train");

  const std::vector<std::string> train_ids = manifest.ids(Split::Train);
  if (train_ids.empty()) throw LabelMismatch("manifest has no train images");
  for (const auto& id : train_ids) labels.label_of(id);  // throws on a missing label

  CamWeights w;
  w.spec = spec;
  w.backbone = make_backbone(spec.backbone);
  if (spec.truncate_after > 0) w.backbone.truncate(spec.truncate_after);
  w.spec.truncate_after = w.backbone.num_stages();
  w.spec.num_classes = num_classes;
  for (int s : spec.frozen_stages)
    if (s < 1 || s > w.backbone.num_stages())
      throw InvalidConfig("frozen stage " + std::to_string(s) + " not in retained stages");

  const int feat_dim = w.backbone.out_channels();
  Rng rng(mix_seed(cfg.seed, 0xca111ULL));
  w.fc_weight.resize(feat_dim, num_classes);
  const float fc_std = std::sqrt(1.0f / float(feat_dim));
  for (Eigen::Index j = 0; j < w.fc_weight.cols(); ++j)
    for (Eigen::Index i = 0; i < w.fc_weight.rows(); ++i)
      w.fc_weight(i, j) = fc_std * float(rng.normal());
  w.fc_bias = Eigen::VectorXf::Zero(num_classes);
  w.label_space = labels.space_name;
  w.epochs = cfg.epochs;
  w.seed = cfg.seed;

  // Decode every train image once.
  std::vector<RgbImage> pixels;
  pixels.reserve(train_ids.size());
  for (const auto& id : train_ids) {
    const auto& ref = manifest.image(id);
    pixels.push_back(read_ppm(manifest.resolve_path(ref)));
  }

  SgdState sgd;
  sgd.velocity.resize(w.backbone.stages.size());
  for (std::size_t s = 0; s < w.backbone.stages.size(); ++s)
    for (const auto& layer : w.backbone.stages[s])
      sgd.velocity[s].push_back(ConvGrad::zeros_like(layer));
  sgd.fc_w_vel = Eigen::MatrixXf::Zero(feat_dim, num_classes);
  sgd.fc_b_vel = Eigen::VectorXf::Zero(num_classes);

  std::vector<std::size_t> order(train_ids.size());
  std::iota(order.begin(), order.end(), std::size_t(0));

  std::vector<ConvCache> caches;
  std::vector<ConvGrad> grads;
  for (const auto& stage : w.backbone.stages)
    for (const auto& layer : stage) grads.push_back(ConvGrad::zeros_like(layer));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t correct = 0;
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + std::size_t(cfg.batch_size));
      for (auto& g : grads) {
        g.dweight.setZero();
        g.dbias.setZero();
      }
      Eigen::MatrixXf dfc_w = Eigen::MatrixXf::Zero(feat_dim, num_classes);
      Eigen::VectorXf dfc_b = Eigen::VectorXf::Zero(num_classes);

      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        const int y = labels.label_of(train_ids[idx]);
        FeatureMap x = preprocess_train(pixels[idx], cfg.crop_size, rng);
        FeatureMap feat = backbone_forward(w.backbone, x, &caches);

        const Eigen::VectorXf g = feat.gap();
        Eigen::VectorXf logits = w.fc_weight.transpose() * g + w.fc_bias;
        Eigen::Index pred;
        const float max_logit = logits.maxCoeff(&pred);
        if (int(pred) == y) ++correct;
        Eigen::VectorXf p = (logits.array() - max_logit).exp();
        const float z = p.sum();
        p /= z;
        loss_sum += std::log(z) + max_logit - logits(y);

        Eigen::VectorXf dlogits = p;
        dlogits(y) -= 1.0f;
        dfc_w.noalias() += g * dlogits.transpose();
        dfc_b += dlogits;

        // GAP spreads the head gradient uniformly over locations.
        const Eigen::VectorXf dg = w.fc_weight * dlogits;
        const auto hw = float(feat.height) * float(feat.width);
        Eigen::MatrixXf d_act =
            Eigen::VectorXf::Ones(Eigen::Index(feat.height) * feat.width) *
            (dg / hw).transpose();

        // Walk the layers backward.
        int li = int(caches.size()) - 1;
        FeatureMap din;
        for (int s = int(w.backbone.stages.size()) - 1; s >= 0; --s) {
          for (int l = int(w.backbone.stages[std::size_t(s)].size()) - 1; l >= 0; --l, --li) {
            const bool first_layer = (s == 0 && l == 0);
            int in_h, in_w;
            if (li == 0) {
              in_h = x.height;
              in_w = x.width;
            } else {
              in_h = caches[std::size_t(li - 1)].out.height;
              in_w = caches[std::size_t(li - 1)].out.width;
            }
            din = conv_backward(w.backbone.stages[std::size_t(s)][std::size_t(l)],
                                caches[std::size_t(li)], d_act, in_h, in_w,
                                grads[std::size_t(li)], !first_layer);
            if (!first_layer) d_act = std::move(din.data);
          }
        }
      }

      // SGD with momentum; frozen stages are never touched.
      const float inv_n = 1.0f / float(stop - start);
      int li = 0;
      for (std::size_t s = 0; s < w.backbone.stages.size(); ++s) {
        const bool frozen = stage_frozen(w.spec, int(s) + 1);
        for (std::size_t l = 0; l < w.backbone.stages[s].size(); ++l, ++li) {
          if (frozen) continue;
          auto& vel = sgd.velocity[s][l];
          auto& layer = w.backbone.stages[s][l];
          vel.dweight = cfg.momentum * vel.dweight + inv_n * grads[std::size_t(li)].dweight;
          vel.dbias = cfg.momentum * vel.dbias + inv_n * grads[std::size_t(li)].dbias;
          layer.weight -= cfg.learning_rate * vel.dweight;
          layer.bias -= cfg.learning_rate * vel.dbias;
        }
      }
      sgd.fc_w_vel = cfg.momentum * sgd.fc_w_vel + inv_n * dfc_w;
      sgd.fc_b_vel = cfg.momentum * sgd.fc_b_vel + inv_n * dfc_b;
      w.fc_weight -= cfg.learning_rate * sgd.fc_w_vel;
      w.fc_bias -= cfg.learning_rate * sgd.fc_b_vel;
    }

    const double acc = double(correct) / double(order.size());
    w.train_accuracy.push_back(acc);
    std::fprintf(stderr, "[camnet] epoch %d/%d  loss %.4f  train-acc %.4f\n", epoch + 1,
                 cfg.epochs, loss_sum / double(order.size()), acc);
  }
  return w;
}

namespace {

void write_tensor(std::ofstream& out, const Eigen::MatrixXf& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            std::streamsize(std::size_t(m.size()) * sizeof(float)));
}

void read_tensor(std::ifstream& in, Eigen::MatrixXf& m, const std::string& path) {
  in.read(reinterpret_cast<char*>(m.data()),
          std::streamsize(std::size_t(m.size()) * sizeof(float)));
  if (in.gcount() != std::streamsize(std::size_t(m.size()) * sizeof(float)))
    throw ParseError("truncated checkpoint tensor data: " + path);
}

}  // namespace

void save_weights(const CamWeights& w, const std::string& path) {
  json tensors = json::array();
  for (std::size_t s = 0; s < w.backbone.stages.size(); ++s)
    for (std::size_t l = 0; l < w.backbone.stages[s].size(); ++l) {
      const auto& layer = w.backbone.stages[s][l];
      tensors.push_back({{"name", "stage" + std::to_string(s + 1) + ".conv" + std::to_string(l + 1)},
                         {"in_channels", layer.in_channels},
                         {"out_channels", layer.out_channels},
                         {"stride", layer.stride}});
    }
  json header{{"format", "carloc-ckpt-v1"},
              {"model",
               {{"backbone", w.spec.backbone},
                {"truncate_after", w.spec.truncate_after},
                {"num_classes", w.spec.num_classes},
                {"frozen_stages", w.spec.frozen_stages}}},
              {"label_space", w.label_space},
              {"epochs", w.epochs},
              {"seed", w.seed},
              {"train_accuracy", w.train_accuracy},
              {"layers", tensors}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open checkpoint for write: " + path);
  out << header.dump() << "\n";
  for (const auto& stage : w.backbone.stages)
    for (const auto& layer : stage) {
      write_tensor(out, layer.weight);
      Eigen::MatrixXf b = layer.bias;
      write_tensor(out, b);
    }
  write_tensor(out, w.fc_weight);
  Eigen::MatrixXf fb = w.fc_bias;
  write_tensor(out, fb);
}

CamWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError("empty checkpoint: " + path);

  CamWeights w;
  try {
    json header = json::parse(header_line);
    if (header.at("format").get<std::string>() != "carloc-ckpt-v1")
      throw ParseError("unknown checkpoint format");
    const auto& jm = header.at("model");
    w.spec.backbone = jm.at("backbone").get<std::string>();
    w.spec.truncate_after = jm.at("truncate_after").get<int>();
    w.spec.num_classes = jm.at("num_classes").get<int>();
    w.spec.frozen_stages = jm.at("frozen_stages").get<std::vector<int>>();
    w.label_space = header.at("label_space").get<std::string>();
    w.epochs = header.at("epochs").get<int>();
    w.seed = header.at("seed").get<std::uint64_t>();
    w.train_accuracy = header.at("train_accuracy").get<std::vector<double>>();

    w.backbone.name = w.spec.backbone;
    Stage stage;
    int prev_stage = 1;
    for (const auto& jl : header.at("layers")) {
      const std::string name = jl.at("name").get<std::string>();
      const int stage_no = std::stoi(name.substr(5, name.find('.') - 5));
      if (stage_no != prev_stage) {
        w.backbone.stages.push_back(std::move(stage));
        stage = Stage{};
        prev_stage = stage_no;
      }
      ConvLayer layer;
      layer.in_channels = jl.at("in_channels").get<int>();
      layer.out_channels = jl.at("out_channels").get<int>();
      layer.stride = jl.at("stride").get<int>();
      layer.weight.resize(layer.in_channels * 9, layer.out_channels);
      layer.bias.resize(layer.out_channels);
      stage.push_back(std::move(layer));
    }
    w.backbone.stages.push_back(std::move(stage));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  for (auto& stage : w.backbone.stages)
    for (auto& layer : stage) {
      read_tensor(in, layer.weight, path);
      Eigen::MatrixXf b(layer.out_channels, 1);
      read_tensor(in, b, path);
      layer.bias = b;
    }
  w.fc_weight.resize(w.backbone.out_channels(), w.spec.num_classes);
  read_tensor(in, w.fc_weight, path);
  Eigen::MatrixXf fb(w.spec.num_classes, 1);
  read_tensor(in, fb, path);
  w.fc_bias = fb;
  return w;
}

}  // namespace carloc
