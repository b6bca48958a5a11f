#include "carloc/compcars.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "carloc/image.hpp"

namespace fs = std::filesystem;

namespace carloc {

namespace {

std::vector<std::string> read_split_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedSplit("cannot open split list: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// The label file carries the viewpoint and box; the box is the last line with
// at least four integers.
bool parse_bbox_line(const fs::path& label_path, long v[4]) {
  std::ifstream in(label_path);
  if (!in) return false;
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    long a, b, c, d;
    if (ss >> a >> b >> c >> d) {
      v[0] = a; v[1] = b; v[2] = c; v[3] = d;
      found = true;
    }
  }
  return found;
}

}  // namespace

DatasetManifest compcars_adapter(const std::string& root_path) {
  const fs::path root(root_path);
  const fs::path image_root = root / "image";
  const fs::path label_root = root / "label";
  const fs::path split_dir = root / "train_test_split" / "classification";

  std::vector<ImageRef> images;
  std::map<std::string, LabelRecord> labels;
  std::map<std::string, BBox> boxes;
  std::map<std::string, Split> split;

  auto ingest_list = [&](const fs::path& list_path, Split sp) {
    for (const std::string& rel : read_split_list(list_path)) {
      const fs::path rel_path(rel);
      const fs::path img_path = image_root / rel_path;
      if (!fs::exists(img_path))
        throw MalformedSplit("split lists missing image: " + rel);

      // make/model/year come from the directory segments.
      std::vector<std::string> parts;
      for (const auto& p : rel_path) parts.push_back(p.string());
      if (parts.size() < 4)
        throw MalformedSplit("split entry lacks make/model/year segments: " + rel);
      const std::string& make = parts[parts.size() - 4];
      const std::string& model = parts[parts.size() - 3];
      const std::string& year = parts[parts.size() - 2];

      fs::path lbl_path = label_root / rel_path;
      lbl_path.replace_extension(".txt");
      long v[4];
      if (!parse_bbox_line(lbl_path, v))
        throw MissingAnnotation("no label/bbox file for image: " + rel);

      int width = 0, height = 0;
      try {
        probe_image_size(img_path.string(), width, height);
      } catch (const UnreadableImage& e) {
        throw MissingAnnotation("unreadable image " + rel + ": " + e.what());
      }

      BBox box;
      if (v[2] > v[0] && v[3] > v[1] && v[2] <= width) {
        // Corner pair, read half-open: width = x2 - x1.
        box = BBox{int(v[0]), int(v[1]), int(v[2] - v[0]), int(v[3] - v[1])};
      } else {
        box = BBox{int(v[0]), int(v[1]), int(v[2]), int(v[3])};
      }
      if (box.w < 1 || box.h < 1)
        throw MissingAnnotation("degenerate bbox for image: " + rel);
      box = bbox_clip(box, width, height);

      const std::string id = rel;
      if (labels.count(id)) throw MalformedSplit("image listed twice in splits: " + rel);
      images.push_back(ImageRef{id, (fs::path("image") / rel_path).string(), width, height});
      labels.emplace(id, LabelRecord{make, model, year});
      boxes.emplace(id, box);
      split.emplace(id, sp);
    }
  };

  ingest_list(split_dir / "train.txt", Split::Train);
  ingest_list(split_dir / "test.txt", Split::Test);

  auto m = DatasetManifest::build(std::move(images), std::move(labels), std::move(boxes),
                                  std::move(split));
  m.set_base_dir(root_path);
  return m;
}

}  // namespace carloc
