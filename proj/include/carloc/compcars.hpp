#pragma once

#include <string>

#include "carloc/manifest.hpp"

namespace carloc {

/// Builds a manifest from a CompCars web-nature tree:
///
///   root/image/<make>/<model>/<year>/<name>.jpg
///   root/label/<make>/<model>/<year>/<name>.txt   (last line: x1 y1 x2 y2)
///   root/train_test_split/classification/{train,test}.txt
///
/// Category labels are the make/model/year path segments. Bounding boxes are
/// normalized to (x, y, w, h): a row with x2 > x1, y2 > y1 and x2 <= image
/// width is read as a corner pair [x1,x2) x [y1,y2); anything else is taken
/// as (x, y, w, h) directly. Boxes are clipped to image bounds.
///
/// Throws MalformedSplit when a split list names a missing image and
/// MissingAnnotation when an image lacks a label file or a parsable box.
DatasetManifest compcars_adapter(const std::string& root_path);

}  // namespace carloc
