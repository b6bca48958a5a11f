#pragma once

#include <map>
#include <string>
#include <vector>

#include "carloc/bbox.hpp"
#include "carloc/manifest.hpp"

namespace carloc {

/// Localization score card for one run over one split.
struct EvalReport {
  std::string run_name;
  std::map<std::string, double> per_image;  // image id -> IoU
  double miou = 0.0;
  int n_images = 0;
  std::string config_digest;
};

/// Predictions file: JSON lines of {"image_id","bbox":{x,y,w,h}}.
void save_predictions(const std::map<std::string, BBox>& preds, const std::string& path);
std::map<std::string, BBox> load_predictions(const std::string& path);

/// Scores predictions against the manifest's ground truth over one split.
/// Every split id must be predicted exactly once (MissingPrediction /
/// DuplicatePrediction); predictions for ids outside the split are ignored.
EvalReport evaluate_run(const std::string& preds_path, const DatasetManifest& manifest,
                        Split split, const std::string& run_name,
                        const std::string& config_digest = "");

/// External detector rows: JSON lines of
///   {"image_id","class","confidence","bbox":{x,y,w,h}}.
/// Keeps the highest-confidence detection matching class_filter per image;
/// images without a match get the whole-image box from the manifest. Writes
/// the standard predictions format to out_path.
void ingest_external_detections(const std::string& detections_path,
                                const std::string& class_filter,
                                const DatasetManifest& manifest, const std::string& out_path);

/// Rows sorted by descending miou, ties by run_name.
std::vector<EvalReport> compare_runs(std::vector<EvalReport> reports);

/// Aligned text table of compare_runs output.
std::string comparison_table(const std::vector<EvalReport>& sorted);

/// CSV (run_name,miou,n_images) of compare_runs output.
std::string comparison_csv(const std::vector<EvalReport>& sorted);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

}  // namespace carloc
