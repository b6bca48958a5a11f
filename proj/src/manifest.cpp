#include "carloc/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace carloc {

std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ParseError("split must be train or test, got '" + s + "'");
}

DatasetManifest DatasetManifest::build(std::vector<ImageRef> images,
                                       std::map<std::string, LabelRecord> labels,
                                       std::map<std::string, BBox> gt_boxes,
                                       std::map<std::string, Split> split) {
  DatasetManifest m;
  m.images_ = std::move(images);
  m.labels_ = std::move(labels);
  m.gt_boxes_ = std::move(gt_boxes);
  m.split_ = std::move(split);

  std::map<std::string, std::string> model_to_make;
  for (std::size_t i = 0; i < m.images_.size(); ++i) {
    const auto& id = m.images_[i].id;
    if (!m.index_.emplace(id, i).second) throw ParseError("duplicate image id: " + id);
    if (!m.labels_.count(id) || !m.gt_boxes_.count(id) || !m.split_.count(id))
      throw ParseError("image " + id + " missing label, bbox, or split entry");
    const auto& rec = m.labels_.at(id);
    auto [it, inserted] = model_to_make.emplace(rec.model, rec.make);
    if (!inserted && it->second != rec.make)
      throw ParseError("model '" + rec.model + "' maps to makes '" + it->second +
                       "' and '" + rec.make + "'");
  }
  if (m.labels_.size() != m.images_.size() || m.gt_boxes_.size() != m.images_.size() ||
      m.split_.size() != m.images_.size())
    throw ParseError("manifest maps reference unknown image ids");
  return m;
}

const LabelRecord& DatasetManifest::label(const std::string& id) const {
  auto it = labels_.find(id);
  if (it == labels_.end()) throw ParseError("unknown image id: " + id);
  return it->second;
}

const BBox& DatasetManifest::gt_box(const std::string& id) const {
  auto it = gt_boxes_.find(id);
  if (it == gt_boxes_.end()) throw ParseError("unknown image id: " + id);
  return it->second;
}

Split DatasetManifest::split(const std::string& id) const {
  auto it = split_.find(id);
  if (it == split_.end()) throw ParseError("unknown image id: " + id);
  return it->second;
}

std::vector<std::string> DatasetManifest::ids(Split s) const {
  std::vector<std::string> out;
  for (const auto& img : images_)
    if (split_.at(img.id) == s) out.push_back(img.id);
  return out;
}

std::vector<std::string> DatasetManifest::all_ids() const {
  std::vector<std::string> out;
  out.reserve(images_.size());
  for (const auto& img : images_) out.push_back(img.id);
  return out;
}

const ImageRef& DatasetManifest::image(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ParseError("unknown image id: " + id);
  return images_[it->second];
}

std::string DatasetManifest::resolve_path(const ImageRef& ref) const {
  fs::path p(ref.path);
  if (p.is_absolute() || base_dir_.empty()) return ref.path;
  return (fs::path(base_dir_) / p).string();
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path);

  std::vector<ImageRef> images;
  std::map<std::string, LabelRecord> labels;
  std::map<std::string, BBox> boxes;
  std::map<std::string, Split> split;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
      const std::string id = rec.at("id").get<std::string>();
      ImageRef ref{id, rec.at("path").get<std::string>(), rec.at("width").get<int>(),
                   rec.at("height").get<int>()};
      if (ref.width < 1 || ref.height < 1) throw ParseError("non-positive image size");
      const auto& jb = rec.at("bbox");
      BBox b = make_bbox(jb.at("x").get<int>(), jb.at("y").get<int>(),
                         jb.at("w").get<int>(), jb.at("h").get<int>());
      LabelRecord lr{rec.at("make").get<std::string>(), rec.at("model").get<std::string>(),
                     rec.at("year").get<std::string>()};
      Split sp = split_from_string(rec.at("split").get<std::string>());
      if (labels.count(id)) throw ParseError("duplicate image id: " + id);
      images.push_back(std::move(ref));
      labels.emplace(id, std::move(lr));
      boxes.emplace(id, b);
      split.emplace(id, sp);
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (images.empty()) throw ParseError(path + ": manifest contains no records");

  auto m = DatasetManifest::build(std::move(images), std::move(labels), std::move(boxes),
                                  std::move(split));
  m.set_base_dir(fs::path(path).parent_path().string());
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open manifest for write: " + path);
  for (const auto& img : m.images()) {
    const auto& lr = m.label(img.id);
    const auto& b = m.gt_box(img.id);
    json rec{{"id", img.id},
             {"path", img.path},
             {"width", img.width},
             {"height", img.height},
             {"make", lr.make},
             {"model", lr.model},
             {"year", lr.year},
             {"bbox", {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}},
             {"split", to_string(m.split(img.id))}};
    out << rec.dump() << "\n";
  }
}

}  // namespace carloc
