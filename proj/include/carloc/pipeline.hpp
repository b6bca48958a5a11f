#pragma once

#include <string>

#include "carloc/config.hpp"
#include "carloc/evalsuite.hpp"

namespace carloc {

/// One end-to-end experiment: label construction, CAM training, heatmap
/// inference over the evaluation split, box extraction, and scoring.
struct PipelineConfig {
  std::string manifest_path;
  std::string label_space;  // make|model|year|make-year|model-year|random:n|kmeans:k
  std::string out_dir;
  std::string run_name;  // empty = label_space
  std::uint64_t seed = 1;
  TrainConfig train;
  CamModelSpec model;
  BoxerConfig boxer;
  std::string extractor = "embed-128";
  int extractor_image_size = 64;
  Split eval_split = Split::Test;
};

/// Loads a pipeline config file; rejects unknown keys.
PipelineConfig load_pipeline_config(const std::string& path);

/// Runs every stage, persisting artifacts under cfg.out_dir:
///   labels.json, weights.ckpt, heatmaps/, preds.jsonl, report.json,
///   pipeline.log, digests/.
/// A stage whose digest file matches its recomputed input digest is skipped
/// ("cached" in the log). Feature tables are cached under $CARLOC_CACHE_ROOT
/// when set (out_dir otherwise) so label-space sweeps share extraction.
/// Stage failures surface as StageError with the stage name attached.
EvalReport run_pipeline(const PipelineConfig& cfg);

}  // namespace carloc
