#include "carloc/heatmap_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace carloc {

void save_heatmap(const Heatmap& h, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base = fs::path(dir) / h.image_id;

  json sidecar{{"image_id", h.image_id},
               {"class_index", h.class_index},
               {"height", int(h.values.rows())},
               {"width", int(h.values.cols())}};
  std::ofstream meta(base.string() + ".json");
  if (!meta) throw ParseError("cannot write heatmap sidecar for " + h.image_id);
  meta << sidecar.dump() << "\n";

  std::ofstream out(base.string() + ".f32", std::ios::binary);
  if (!out) throw ParseError("cannot write heatmap grid for " + h.image_id);
  for (Eigen::Index y = 0; y < h.values.rows(); ++y)
    for (Eigen::Index x = 0; x < h.values.cols(); ++x) {
      const float v = h.values(y, x);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

Heatmap load_heatmap(const std::string& dir, const std::string& image_id) {
  const fs::path base = fs::path(dir) / image_id;
  std::ifstream meta(base.string() + ".json");
  if (!meta) throw ParseError("missing heatmap sidecar: " + base.string() + ".json");
  Heatmap h;
  int height = 0, width = 0;
  try {
    json sidecar;
    meta >> sidecar;
    h.image_id = sidecar.at("image_id").get<std::string>();
    h.class_index = sidecar.at("class_index").get<int>();
    height = sidecar.at("height").get<int>();
    width = sidecar.at("width").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(base.string() + ".json: " + e.what());
  }
  h.source_height = height;
  h.source_width = width;
  h.values.resize(height, width);

  std::ifstream in(base.string() + ".f32", std::ios::binary);
  if (!in) throw ParseError("missing heatmap grid: " + base.string() + ".f32");
  for (Eigen::Index y = 0; y < height; ++y)
    for (Eigen::Index x = 0; x < width; ++x) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      if (in.gcount() != sizeof v)
        throw ParseError("truncated heatmap grid: " + base.string() + ".f32");
      h.values(y, x) = v;
    }
  return h;
}

std::vector<std::string> list_heatmaps(const std::string& dir) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace carloc
