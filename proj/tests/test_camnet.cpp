#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "carloc/camnet.hpp"
#include "carloc/heatmap_io.hpp"
#include "carloc/synth.hpp"

namespace fs = std::filesystem;
using namespace carloc;

namespace {

RgbImage constant_image(int w, int h, std::uint8_t v) { return make_rgb(w, h, v); }

FeatureMap random_features(Rng& rng, int c, int h, int w) {
  FeatureMap f = FeatureMap::zeros(c, h, w);
  for (Eigen::Index i = 0; i < f.data.rows(); ++i)
    for (Eigen::Index j = 0; j < f.data.cols(); ++j) f.data(i, j) = float(rng.normal());
  return f;
}

CamWeights head_only_weights(int channels, int num_classes, Rng& rng) {
  CamWeights w;
  w.spec.num_classes = num_classes;
  w.fc_weight.resize(channels, num_classes);
  for (Eigen::Index i = 0; i < w.fc_weight.size(); ++i)
    w.fc_weight.data()[i] = float(rng.normal());
  w.fc_bias.resize(num_classes);
  for (int i = 0; i < num_classes; ++i) w.fc_bias(i) = float(rng.normal());
  return w;
}

// Backbone whose convolutions are stride-1 and left-right symmetric, so the
// whole network commutes with horizontal mirroring.
Backbone symmetric_backbone(Rng& rng) {
  Backbone net;
  net.name = "sym-test";
  int in_ch = 3;
  for (int out_ch : {6, 10}) {
    ConvLayer l;
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.stride = 1;
    l.weight.resize(in_ch * 9, out_ch);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i)
      l.weight.data()[i] = 0.3f * float(rng.normal());
    for (int c = 0; c < in_ch; ++c)
      for (int ky = 0; ky < 3; ++ky)
        for (Eigen::Index o = 0; o < out_ch; ++o) {
          const Eigen::Index base = Eigen::Index(c) * 9 + ky * 3;
          l.weight(base + 2, o) = l.weight(base + 0, o);  // kx=0 equals kx=2
        }
    l.bias = Eigen::VectorXf::Zero(out_ch);
    net.stages.push_back(Stage{std::move(l)});
    in_ch = out_ch;
  }
  return net;
}

DatasetManifest two_class_set(const fs::path& dir, int n) {
  SynthConfig cfg;
  cfg.n_images = n;
  cfg.image_size = 64;
  cfg.n_makes = 2;
  cfg.models_per_make = 1;
  cfg.n_years = 1;
  cfg.seed = 17;
  cfg.background_noise = 0.15;
  fs::remove_all(dir);
  return synth_generate(cfg, dir.string());
}

}  // namespace

TEST_CASE("preprocess_train yields the crop shape deterministically") {
  const RgbImage img = constant_image(96, 80, 200);
  Rng rng_a(5), rng_b(5);
  const FeatureMap a = preprocess_train(img, 64, rng_a);
  const FeatureMap b = preprocess_train(img, 64, rng_b);
  CHECK(a.height == 64);
  CHECK(a.width == 64);
  CHECK(a.channels == 3);
  CHECK(a.data == b.data);  // same rng state, identical output

  // Bigger image, still the exact crop contract.
  Rng rng_c(1);
  const FeatureMap c = preprocess_train(constant_image(256, 192, 10), 128, rng_c);
  CHECK(c.height == 128);
  CHECK(c.width == 128);
}

TEST_CASE("preprocess_train normalizes a constant image per channel") {
  Rng rng(2);
  const std::uint8_t v = 120;
  const FeatureMap out = preprocess_train(constant_image(80, 80, v), 64, rng);
  for (int c = 0; c < 3; ++c) {
    const float expected = (float(v) / 255.0f - kNormMean[c]) / kNormStd[c];
    CHECK(out.plane_array(c).abs().maxCoeff() ==
          doctest::Approx(std::abs(expected)).epsilon(1e-5));
    CHECK(out.at(c, 10, 20) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("preprocess_eval produces the full and mirrored half-scale pair") {
  const auto [full, half] = preprocess_eval(constant_image(80, 60, 77));
  CHECK(full.height == 60);
  CHECK(full.width == 80);
  CHECK(half.height == 30);
  CHECK(half.width == 40);

  // Odd dimension floors: 81 -> 40.
  const auto [f2, h2] = preprocess_eval(constant_image(81, 61, 9));
  CHECK(h2.width == 40);
  CHECK(h2.height == 30);
}

TEST_CASE("preprocess_eval half equals plain half-scale for symmetric images") {
  RgbImage img = make_rgb(64, 48);
  Rng rng(3);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) {
        const auto v = std::uint8_t(rng.uniform_int(0, 255));
        img.at(y, x, c) = v;
        img.at(y, 63 - x, c) = v;  // mirror half
      }
  const auto [full, half] = preprocess_eval(img);

  FeatureMap expected = to_feature_map(img);
  expected = resize_map(expected, 24, 32);
  normalize_map(expected);
  CHECK(half.data == expected.data);
}

TEST_CASE("cam_map matches the per-pixel projection oracle") {
  Rng rng(11);
  const FeatureMap f = random_features(rng, 16, 5, 7);
  const CamWeights w = head_only_weights(16, 4, rng);

  for (int cls = 0; cls < 4; ++cls) {
    const Heatmap h = cam_map(w, f, cls);
    CHECK(h.values.rows() == 5);
    CHECK(h.values.cols() == 7);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 7; ++x) {
        double acc = double(w.fc_bias(cls));
        for (int c = 0; c < 16; ++c) acc += double(f.at(c, y, x)) * double(w.fc_weight(c, cls));
        const double expected = std::max(0.0, acc);
        CHECK(h.values(y, x) == doctest::Approx(expected).epsilon(1e-6));
      }
    CHECK((h.values >= 0.0f).all());
  }
  CHECK_THROWS_AS(cam_map(w, f, 4), IndexOutOfRange);
  CHECK_THROWS_AS(cam_map(w, f, -1), IndexOutOfRange);
}

TEST_CASE("cam_map degenerate projections") {
  Rng rng(12);
  const FeatureMap f = random_features(rng, 8, 4, 4);

  CamWeights w = head_only_weights(8, 2, rng);
  w.fc_weight.setZero();
  w.fc_bias.setZero();
  CHECK((cam_map(w, f, 0).values == 0.0f).all());

  // One-hot row selects a single channel.
  w.fc_weight.setZero();
  w.fc_weight(3, 1) = 1.0f;
  const Heatmap h = cam_map(w, f, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      CHECK(h.values(y, x) == doctest::Approx(std::max(0.0f, f.at(3, y, x))));
}

TEST_CASE("cam_map scales linearly with positive weight scaling") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const FeatureMap f = random_features(rng, 12, 3, 4);
    CamWeights w = head_only_weights(12, 3, rng);
    const float alpha = 0.25f + 3.0f * float(rng.uniform());

    CamWeights scaled = w;
    scaled.fc_weight *= alpha;
    scaled.fc_bias *= alpha;

    const Heatmap base = cam_map(w, f, 1);
    const Heatmap big = cam_map(scaled, f, 1);
    CHECK(((big.values - alpha * base.values).abs() < 1e-5f).all());

    // Bias-free maps scale under W-only scaling.
    CamWeights w_only = w;
    w_only.fc_weight *= alpha;
    const Heatmap nb_base = cam_map(w, f, 1, false);
    const Heatmap nb_big = cam_map(w_only, f, 1, false);
    CHECK(((nb_big.values - alpha * nb_base.values).abs() < 1e-5f).all());
  }
}

TEST_CASE("the spatial mean of an unclipped cam equals the class logit") {
  Rng rng(14);
  FeatureMap f = random_features(rng, 10, 6, 6);
  f.data = f.data.array().abs();  // positive features
  CamWeights w = head_only_weights(10, 2, rng);
  w.fc_weight = w.fc_weight.array().abs();  // positive weights: ReLU inactive
  w.fc_bias.setConstant(0.5f);

  const Heatmap h = cam_map(w, f, 0);
  const Eigen::VectorXf logits = class_logits(w, f);
  CHECK(double(h.values.mean()) == doctest::Approx(double(logits(0))).epsilon(1e-5));
}

TEST_CASE("sum_with_mirrored aligns the flipped branch") {
  Eigen::ArrayXXf m1 = Eigen::ArrayXXf::Zero(4, 6);
  Eigen::ArrayXXf m2 = Eigen::ArrayXXf::Zero(4, 6);

  // Zero flipped branch: the sum is just the upsampled original.
  m1(1, 2) = 3.0f;
  const Eigen::ArrayXXf only_first = sum_with_mirrored(m1, m2, 4, 6);
  CHECK((only_first == m1).all());

  // A flipped-branch peak at x lands at width-1-x after mirroring.
  m2(2, 1) = 5.0f;
  const Eigen::ArrayXXf both = sum_with_mirrored(m1, m2, 4, 6);
  CHECK(both(1, 2) == 3.0f);
  CHECK(both(2, 4) == 5.0f);
  CHECK(both.sum() == 8.0f);
}

TEST_CASE("infer_heatmap meets the shape, sign, and argmax contracts") {
  Rng rng(15);
  CamWeights w;
  w.spec.backbone = "cam-tiny";
  w.backbone = make_backbone("cam-tiny");
  w.spec.num_classes = 3;
  w.fc_weight.resize(w.backbone.out_channels(), 3);
  for (Eigen::Index i = 0; i < w.fc_weight.size(); ++i)
    w.fc_weight.data()[i] = float(rng.normal());
  w.fc_bias.setZero(3);

  SynthConfig cfg;
  cfg.n_images = 1;
  cfg.image_size = 80;
  cfg.seed = 3;
  const fs::path dir = fs::temp_directory_path() / "carloc-camnet-infer";
  fs::remove_all(dir);
  const DatasetManifest m = synth_generate(cfg, dir.string());
  RgbImage img = read_ppm(m.resolve_path(m.images()[0]));

  const Heatmap h = infer_heatmap(w, img);
  CHECK(h.values.rows() == 80);
  CHECK(h.values.cols() == 80);
  CHECK(h.source_height == 80);
  CHECK((h.values >= 0.0f).all());

  // The chosen class is the argmax of the original-branch logits.
  const auto [full, half] = preprocess_eval(img);
  Eigen::Index expected;
  class_logits(w, backbone_forward(w.backbone, full)).maxCoeff(&expected);
  CHECK(h.class_index == int(expected));
}

TEST_CASE("a mirror-equivariant network maps symmetric images symmetrically") {
  Rng rng(16);
  CamWeights w;
  w.backbone = symmetric_backbone(rng);
  w.spec.backbone = w.backbone.name;
  w.spec.num_classes = 2;
  w.fc_weight.resize(w.backbone.out_channels(), 2);
  for (Eigen::Index i = 0; i < w.fc_weight.size(); ++i)
    w.fc_weight.data()[i] = float(rng.normal());
  w.fc_bias.setZero(2);

  RgbImage img = make_rgb(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) {
        const auto v = std::uint8_t((x * 7 + y * 3 + c * 40) % 256);
        img.at(y, x, c) = v;
        img.at(y, 63 - x, c) = v;
      }

  const Heatmap h = infer_heatmap(w, img);
  const Eigen::ArrayXXf mirrored = h.values.rowwise().reverse();
  const float scale = std::max(1.0f, h.values.abs().maxCoeff());
  CHECK(((h.values - mirrored).abs() / scale < 1e-5f).all());
}

TEST_CASE("training a separable two-class set reaches high accuracy") {
  const fs::path dir = fs::temp_directory_path() / "carloc-camnet-train";
  const DatasetManifest m = two_class_set(dir, 40);
  const LabelAssignment labels = human_labels(m, LabelField::Make);

  CamModelSpec spec;
  spec.backbone = "cam-tiny";
  spec.frozen_stages = {1};
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.crop_size = 64;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.02f;
  cfg.seed = 5;

  const CamWeights w = train(m, labels, spec, cfg);
  REQUIRE(w.train_accuracy.size() == 10);
  CHECK(w.train_accuracy.back() >= 0.95);

  // Freeze contract: stage 1 is bit-identical to its registry initialization.
  const Backbone init = make_backbone("cam-tiny");
  CHECK(w.backbone.stages[0][0].weight == init.stages[0][0].weight);
  CHECK(w.backbone.stages[0][0].bias == init.stages[0][0].bias);
  // Later stages did move.
  CHECK(w.backbone.stages[1][0].weight != init.stages[1][0].weight);

  // Determinism: a rerun reproduces the weights bit for bit.
  const CamWeights w2 = train(m, labels, spec, cfg);
  CHECK(w.fc_weight == w2.fc_weight);
  CHECK(w.backbone.stages[2][0].weight == w2.backbone.stages[2][0].weight);
  CHECK(w.train_accuracy == w2.train_accuracy);
}

TEST_CASE("train rejects label-space mismatches") {
  const fs::path dir = fs::temp_directory_path() / "carloc-camnet-mismatch";
  const DatasetManifest m = two_class_set(dir, 12);
  const LabelAssignment labels = human_labels(m, LabelField::Make);

  CamModelSpec spec;
  spec.backbone = "cam-tiny";
  spec.num_classes = 4;  // label space has 2
  CHECK_THROWS_AS(train(m, labels, spec, TrainConfig{.epochs = 1, .crop_size = 64}),
                  LabelMismatch);

  LabelAssignment missing = labels;
  missing.mapping.erase(missing.mapping.find(m.ids(Split::Train)[0]));
  CamModelSpec ok;
  ok.backbone = "cam-tiny";
  CHECK_THROWS_AS(train(m, missing, ok, TrainConfig{.epochs = 1, .crop_size = 64}),
                  LabelMismatch);
}

TEST_CASE("checkpoints round-trip every tensor and the metadata") {
  const fs::path dir = fs::temp_directory_path() / "carloc-camnet-ckpt";
  const DatasetManifest m = two_class_set(dir, 12);
  const LabelAssignment labels = human_labels(m, LabelField::Make);

  CamModelSpec spec;
  spec.backbone = "cam-tiny";
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.crop_size = 64;
  cfg.batch_size = 8;
  const CamWeights w = train(m, labels, spec, cfg);

  const fs::path path = dir / "w.ckpt";
  save_weights(w, path.string());
  const CamWeights back = load_weights(path.string());
  CHECK(back.spec.backbone == "cam-tiny");
  CHECK(back.spec.num_classes == 2);
  CHECK(back.label_space == "make");
  CHECK(back.epochs == 2);
  CHECK(back.train_accuracy == w.train_accuracy);
  REQUIRE(back.backbone.num_stages() == w.backbone.num_stages());
  for (int s = 0; s < w.backbone.num_stages(); ++s) {
    CHECK(back.backbone.stages[std::size_t(s)][0].weight ==
          w.backbone.stages[std::size_t(s)][0].weight);
    CHECK(back.backbone.stages[std::size_t(s)][0].bias ==
          w.backbone.stages[std::size_t(s)][0].bias);
  }
  CHECK(back.fc_weight == w.fc_weight);
  CHECK(back.fc_bias == w.fc_bias);
}

TEST_CASE("heatmaps round-trip through the f32 + sidecar format") {
  Rng rng(77);
  Heatmap h;
  h.image_id = "sample-1";
  h.class_index = 3;
  h.values.resize(9, 13);
  for (Eigen::Index i = 0; i < h.values.size(); ++i) h.values.data()[i] = float(rng.normal());
  h.values = h.values.abs();
  h.source_height = 9;
  h.source_width = 13;

  const fs::path dir = fs::temp_directory_path() / "carloc-heatmaps";
  fs::remove_all(dir);
  save_heatmap(h, dir.string());
  const Heatmap back = load_heatmap(dir.string(), "sample-1");
  CHECK(back.image_id == "sample-1");
  CHECK(back.class_index == 3);
  CHECK(back.values.rows() == 9);
  CHECK((back.values == h.values).all());
  CHECK(list_heatmaps(dir.string()) == std::vector<std::string>{"sample-1"});
}
