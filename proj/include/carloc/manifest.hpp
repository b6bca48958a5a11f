#pragma once

#include <map>
#include <string>
#include <vector>

#include "carloc/bbox.hpp"

namespace carloc {

enum class Split { Train, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// Human category labels attached to one image. The model name determines the
/// make (hierarchy), which manifest validation enforces.
struct LabelRecord {
  std::string make;
  std::string model;
  std::string year;

  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// Immutable view of one dataset: image records, category labels, ground-truth
/// boxes and the train/test split. Relative image paths are resolved against
/// the directory the manifest was loaded from.
class DatasetManifest {
 public:
  DatasetManifest() = default;

  /// Validates and takes ownership of parallel records.
  /// Throws ParseError on duplicate ids or a model mapped to two makes.
  static DatasetManifest build(std::vector<ImageRef> images,
                               std::map<std::string, LabelRecord> labels,
                               std::map<std::string, BBox> gt_boxes,
                               std::map<std::string, Split> split);

  const std::vector<ImageRef>& images() const { return images_; }
  const LabelRecord& label(const std::string& id) const;
  const BBox& gt_box(const std::string& id) const;
  Split split(const std::string& id) const;
  bool has_image(const std::string& id) const { return labels_.count(id) != 0; }

  std::vector<std::string> ids(Split s) const;
  std::vector<std::string> all_ids() const;
  std::size_t size() const { return images_.size(); }

  /// Absolute or base-dir-resolved path for loading pixel data.
  std::string resolve_path(const ImageRef& ref) const;
  const ImageRef& image(const std::string& id) const;

  void set_base_dir(const std::string& dir) { base_dir_ = dir; }
  const std::string& base_dir() const { return base_dir_; }

  /// Content equality; ignores base_dir (a load-time artifact).
  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.images_ == b.images_ && a.labels_ == b.labels_ &&
           a.gt_boxes_ == b.gt_boxes_ && a.split_ == b.split_;
  }

 private:
  std::vector<ImageRef> images_;
  std::map<std::string, LabelRecord> labels_;
  std::map<std::string, BBox> gt_boxes_;
  std::map<std::string, Split> split_;
  std::map<std::string, std::size_t> index_;
  std::string base_dir_;
};

/// JSON-lines manifest IO. One record per image:
///   {"id","path","width","height","make","model","year","bbox":{x,y,w,h},"split"}
/// load_manifest reports malformed records as ParseError with the line number;
/// an empty file is also a ParseError.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);

}  // namespace carloc
