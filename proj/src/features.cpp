#include "carloc/features.hpp"

#include <cmath>

#include "carloc/camnet.hpp"

namespace carloc {

FeatureTable extract_features(const DatasetManifest& manifest, const std::string& extractor,
                              int image_size) {
  if (image_size < 8) throw InvalidConfig("extractor image_size must be >= 8");
  const Backbone net = make_backbone(extractor);

  FeatureTable table;
  table.ids = manifest.all_ids();
  table.vectors.resize(Eigen::Index(table.ids.size()), net.out_channels());

  for (Eigen::Index row = 0; row < table.vectors.rows(); ++row) {
    const auto& id = table.ids[std::size_t(row)];
    const auto& ref = manifest.image(id);
    RgbImage img;
    try {
      img = read_ppm(manifest.resolve_path(ref));
    } catch (const UnreadableImage& e) {
      throw UnreadableImage("image '" + id + "': " + e.what());
    }

    FeatureMap x = to_feature_map(img);
    int out_h, out_w;
    if (img.height <= img.width) {
      out_h = image_size;
      out_w = std::max(image_size,
                       int(std::lround(double(img.width) * image_size / img.height)));
    } else {
      out_w = image_size;
      out_h = std::max(image_size,
                       int(std::lround(double(img.height) * image_size / img.width)));
    }
    x = resize_map(x, out_h, out_w);
    x = crop_map(x, (out_h - image_size) / 2, (out_w - image_size) / 2, image_size, image_size);
    normalize_map(x);

    table.vectors.row(row) = backbone_forward(net, x).gap().transpose();
  }
  return table;
}

}  // namespace carloc
