#include "carloc/evalsuite.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace carloc {

void save_predictions(const std::map<std::string, BBox>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open predictions file for write: " + path);
  for (const auto& [id, b] : preds) {
    json rec{{"image_id", id}, {"bbox", {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}}};
    out << rec.dump() << "\n";
  }
}

std::map<std::string, BBox> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open predictions file: " + path);
  std::map<std::string, BBox> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      const std::string id = rec.at("image_id").get<std::string>();
      const auto& jb = rec.at("bbox");
      BBox b = make_bbox(jb.at("x").get<int>(), jb.at("y").get<int>(), jb.at("w").get<int>(),
                         jb.at("h").get<int>());
      if (!preds.emplace(id, b).second)
        throw DuplicatePrediction("duplicate prediction for image id: " + id);
    } catch (const DuplicatePrediction&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return preds;
}

EvalReport evaluate_run(const std::string& preds_path, const DatasetManifest& manifest,
                        Split split, const std::string& run_name,
                        const std::string& config_digest) {
  const std::map<std::string, BBox> preds = load_predictions(preds_path);

  EvalReport report;
  report.run_name = run_name;
  report.config_digest = config_digest;
  double total = 0.0;
  for (const auto& id : manifest.ids(split)) {
    auto it = preds.find(id);
    if (it == preds.end())
      throw MissingPrediction("no prediction for split image id: " + id);
    const double iou = bbox_iou(it->second, manifest.gt_box(id));
    report.per_image.emplace(id, iou);
    total += iou;
  }
  report.n_images = int(report.per_image.size());
  report.miou = report.n_images > 0 ? total / report.n_images : 0.0;
  return report;
}

void ingest_external_detections(const std::string& detections_path,
                                const std::string& class_filter,
                                const DatasetManifest& manifest, const std::string& out_path) {
  std::ifstream in(detections_path);
  if (!in) throw ParseError("cannot open detections file: " + detections_path);

  struct Best {
    double confidence = -1.0;
    BBox box;
  };
  std::map<std::string, Best> best;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      const std::string id = rec.at("image_id").get<std::string>();
      const std::string cls = rec.at("class").get<std::string>();
      const double conf = rec.at("confidence").get<double>();
      const auto& jb = rec.at("bbox");
      const BBox b = make_bbox(jb.at("x").get<int>(), jb.at("y").get<int>(),
                               jb.at("w").get<int>(), jb.at("h").get<int>());
      if (cls != class_filter) continue;
      auto& slot = best[id];
      if (conf > slot.confidence) slot = Best{conf, b};
    } catch (const std::exception& e) {
      throw ParseError(detections_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::map<std::string, BBox> preds;
  for (const auto& img : manifest.images()) {
    auto it = best.find(img.id);
    if (it != best.end())
      preds.emplace(img.id, it->second.box);
    else
      preds.emplace(img.id, BBox{0, 0, img.width, img.height});  // fallback
  }
  save_predictions(preds, out_path);
}

std::vector<EvalReport> compare_runs(std::vector<EvalReport> reports) {
  if (reports.empty()) throw InvalidCount("compare_runs needs at least one report");
  std::sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.miou != b.miou) return a.miou > b.miou;
    return a.run_name < b.run_name;
  });
  return reports;
}

std::string comparison_table(const std::vector<EvalReport>& sorted) {
  std::size_t name_width = 8;
  for (const auto& r : sorted) name_width = std::max(name_width, r.run_name.size());
  std::ostringstream out;
  out << std::left;
  char buf[64];
  out.width(std::streamsize(name_width + 2));
  out << "run";
  out << "miou    n_images\n";
  for (const auto& r : sorted) {
    out.width(std::streamsize(name_width + 2));
    out << r.run_name;
    std::snprintf(buf, sizeof buf, "%.4f  %d\n", r.miou, r.n_images);
    out << buf;
  }
  return out.str();
}

std::string comparison_csv(const std::vector<EvalReport>& sorted) {
  std::ostringstream out;
  out << "run_name,miou,n_images\n";
  char buf[64];
  for (const auto& r : sorted) {
    std::snprintf(buf, sizeof buf, ",%.6f,%d\n", r.miou, r.n_images);
    out << r.run_name << buf;
  }
  return out.str();
}

void save_report(const EvalReport& report, const std::string& path) {
  json j{{"run_name", report.run_name},
         {"miou", report.miou},
         {"n_images", report.n_images},
         {"config_digest", report.config_digest},
         {"per_image", report.per_image}};
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open report for write: " + path);
  out << j.dump(2) << "\n";
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open report: " + path);
  try {
    json j;
    in >> j;
    EvalReport report;
    report.run_name = j.at("run_name").get<std::string>();
    report.miou = j.at("miou").get<double>();
    report.n_images = j.at("n_images").get<int>();
    report.config_digest = j.at("config_digest").get<std::string>();
    report.per_image = j.at("per_image").get<std::map<std::string, double>>();
    return report;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace carloc
