#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carloc/labels.hpp"
#include "carloc/manifest.hpp"
#include "carloc/net.hpp"
#include "carloc/rng.hpp"

namespace carloc {

/// Architecture choices for one CAM classifier.
struct CamModelSpec {
  std::string backbone = "cam-small";
  int truncate_after = 0;            // 0 = keep every stage
  int num_classes = 0;               // 0 = derive from the label space
  std::vector<int> frozen_stages = {1};
};

struct TrainConfig {
  int epochs = 10;
  int crop_size = 512;
  int batch_size = 32;
  float learning_rate = 0.01f;
  float momentum = 0.9f;
  std::uint64_t seed = 1;
};

/// Trained CAM network: truncated backbone plus the linear head that doubles
/// as the CAM projection at evaluation time.
struct CamWeights {
  CamModelSpec spec;
  Backbone backbone;
  Eigen::MatrixXf fc_weight;  // backbone channels x num_classes
  Eigen::VectorXf fc_bias;    // num_classes
  std::string label_space;
  int epochs = 0;
  std::uint64_t seed = 0;
  std::vector<double> train_accuracy;  // one entry per epoch

  int num_classes() const { return int(fc_bias.size()); }
};

/// Class activation map for one image.
struct Heatmap {
  Eigen::ArrayXXf values;  // (y, x), non-negative after the inference ReLU
  std::string image_id;
  int class_index = 0;
  int source_height = 0;
  int source_width = 0;
};

/// Per-channel normalization constants of the pretrained-backbone convention.
extern const float kNormMean[3];
extern const float kNormStd[3];

/// Training-time preprocessing: rescale so the shorter side equals crop_size,
/// random-crop to crop_size^2, mirror with probability 0.5, then normalize.
/// Draw order from rng: crop row, crop column, flip coin.
FeatureMap preprocess_train(const RgbImage& image, int crop_size, Rng& rng);

/// Evaluation-time preprocessing: the normalized full-size image plus its
/// mirror rescaled by 0.5 (floor) in both dimensions.
std::pair<FeatureMap, FeatureMap> preprocess_eval(const RgbImage& image);

/// Applies mean/std normalization in place.
void normalize_map(FeatureMap& map);

/// Trains the classifier head and unfrozen backbone stages with SGD +
/// momentum on softmax cross-entropy. Throws LabelMismatch when num_classes
/// disagrees with the label space or a train image has no label.
CamWeights train(const DatasetManifest& manifest, const LabelAssignment& labels,
                 const CamModelSpec& spec, const TrainConfig& cfg);

/// Classifier logits for a feature map (GAP -> linear).
Eigen::VectorXf class_logits(const CamWeights& weights, const FeatureMap& features);

/// Projects features through one row of the classifier: per-location dot
/// product, the class bias added as a spatially constant term, then ReLU.
Heatmap cam_map(const CamWeights& weights, const FeatureMap& features, int class_index,
                bool include_bias = true);

/// Mirrors the flipped-branch map back, bilinearly upsamples both maps to
/// (out_h, out_w) and sums them.
Eigen::ArrayXXf sum_with_mirrored(const Eigen::ArrayXXf& original_map,
                                  const Eigen::ArrayXXf& flipped_map, int out_h, int out_w);

/// Full inference: dual-branch preprocessing, argmax class on the original
/// branch, CAM on both branches, mirror + upsample + sum. The heatmap has the
/// input image's spatial size.
Heatmap infer_heatmap(const CamWeights& weights, const RgbImage& image);

/// Checkpoint IO: one-line JSON header (spec, label space, tensor manifest)
/// followed by raw little-endian float32 tensors.
void save_weights(const CamWeights& weights, const std::string& path);
CamWeights load_weights(const std::string& path);

}  // namespace carloc
