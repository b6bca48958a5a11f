#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>

#include "carloc/boxer.hpp"
#include "carloc/rng.hpp"

using namespace carloc;

namespace {

Heatmap heatmap_of(const Eigen::ArrayXXf& values) {
  Heatmap h;
  h.values = values;
  h.source_height = int(values.rows());
  h.source_width = int(values.cols());
  return h;
}

BinaryImage block_image(int h, int w, std::initializer_list<BBox> blocks) {
  BinaryImage img = BinaryImage::Zero(h, w);
  for (const auto& b : blocks)
    for (int y = b.y; y < b.y + b.h; ++y)
      for (int x = b.x; x < b.x + b.w; ++x) img(y, x) = 1;
  return img;
}

// Set-definition dilation/erosion on a padded copy; the oracle for closing.
BinaryImage naive_dilate(const BinaryImage& b, int k) {
  const int r = k / 2, h = int(b.rows()), w = int(b.cols());
  BinaryImage out = BinaryImage::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dy = -r; dy <= r && !v; ++dy)
        for (int dx = -r; dx <= r && !v; ++dx) {
          const int sy = y + dy, sx = x + dx;
          if (sy >= 0 && sy < h && sx >= 0 && sx < w && b(sy, sx)) v = 1;
        }
      out(y, x) = v;
    }
  return out;
}

BinaryImage naive_erode(const BinaryImage& b, int k) {
  const int r = k / 2, h = int(b.rows()), w = int(b.cols());
  BinaryImage out = BinaryImage::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (int dy = -r; dy <= r && v; ++dy)
        for (int dx = -r; dx <= r && v; ++dx) {
          const int sy = y + dy, sx = x + dx;
          if (!(sy >= 0 && sy < h && sx >= 0 && sx < w && b(sy, sx))) v = 0;
        }
      out(y, x) = v;
    }
  return out;
}

BinaryImage naive_close(const BinaryImage& b, int k, int iters) {
  const int pad = iters * (k / 2);
  const int h = int(b.rows()), w = int(b.cols());
  BinaryImage canvas = BinaryImage::Zero(h + 2 * pad, w + 2 * pad);
  canvas.block(pad, pad, h, w) = b;
  for (int i = 0; i < iters; ++i) canvas = naive_dilate(canvas, k);
  for (int i = 0; i < iters; ++i) canvas = naive_erode(canvas, k);
  return canvas.block(pad, pad, h, w);
}

struct FloodComponent {
  std::int64_t area = 0;
  BBox box;
  int first_y = 0, first_x = 0;  // raster-first pixel
};

// Independent 8-connected component scan.
std::vector<FloodComponent> flood_components(const BinaryImage& b) {
  const int h = int(b.rows()), w = int(b.cols());
  Eigen::ArrayXXi seen = Eigen::ArrayXXi::Zero(h, w);
  std::vector<FloodComponent> comps;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!b(y, x) || seen(y, x)) continue;
      FloodComponent comp;
      comp.first_y = y;
      comp.first_x = x;
      int min_x = x, max_x = x, min_y = y, max_y = y;
      std::deque<std::pair<int, int>> q{{y, x}};
      seen(y, x) = 1;
      while (!q.empty()) {
        auto [cy, cx] = q.front();
        q.pop_front();
        comp.area++;
        min_x = std::min(min_x, cx);
        max_x = std::max(max_x, cx);
        min_y = std::min(min_y, cy);
        max_y = std::max(max_y, cy);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (!b(ny, nx) || seen(ny, nx)) continue;
            seen(ny, nx) = 1;
            q.push_back({ny, nx});
          }
      }
      comp.box = BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
      comps.push_back(comp);
    }
  return comps;
}

const FloodComponent& flood_largest(const std::vector<FloodComponent>& comps) {
  REQUIRE(!comps.empty());
  const FloodComponent* best = &comps[0];
  for (const auto& c : comps)
    if (c.area > best->area) best = &c;  // ties keep the raster-first one
  return *best;
}

BinaryImage random_blob_image(Rng& rng, int size) {
  const double density = 0.1 + 0.5 * rng.uniform();
  BinaryImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img(y, x) = rng.bernoulli(density) ? 1 : 0;
  return morph_close(img, 3, rng.uniform_int(0, 2));
}

}  // namespace

TEST_CASE("to_grayscale normalizes min-max to [0,255]") {
  Eigen::ArrayXXf v(1, 3);
  v << 0.0f, 1.0f, 2.0f;
  const GrayU8 g = to_grayscale(heatmap_of(v));
  CHECK(g(0, 0) == 0);
  CHECK(g(0, 1) == 127);
  CHECK(g(0, 2) == 255);

  const GrayU8 flat = to_grayscale(heatmap_of(Eigen::ArrayXXf::Constant(4, 4, 3.25f)));
  CHECK((flat == 0).all());

  Eigen::ArrayXXf r = Eigen::ArrayXXf::Random(9, 9).abs() + 0.01f;
  r(4, 4) = 10.0f;
  CHECK(to_grayscale(heatmap_of(r))(4, 4) == 255);
}

TEST_CASE("binarize thresholds at round(255*fraction)") {
  GrayU8 g(1, 3);
  g << 0, 50, 255;
  const BinaryImage b = binarize(g, 0.2);  // cut = 51
  CHECK(b(0, 0) == 0);
  CHECK(b(0, 1) == 0);
  CHECK(b(0, 2) == 1);
  CHECK_THROWS_AS(binarize(g, 0.0), InvalidThreshold);
  CHECK_THROWS_AS(binarize(g, 1.0), InvalidThreshold);

  const GrayU8 zeros = GrayU8::Zero(5, 5);
  CHECK_FALSE(binarize(zeros, 0.4).any());
}

TEST_CASE("lowering the threshold never shrinks the foreground") {
  Rng rng(11);
  GrayU8 g(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) g(y, x) = std::uint8_t(rng.uniform_int(0, 255));
  for (int i = 0; i < 20; ++i) {
    const double hi = 0.1 + 0.8 * rng.uniform();
    const double lo = hi * rng.uniform();
    if (lo <= 0.0) continue;
    const BinaryImage coarse = binarize(g, hi);
    const BinaryImage fine = binarize(g, lo);
    CHECK((fine.cast<int>() >= coarse.cast<int>()).all());
  }
}

TEST_CASE("closing of empty and full images is the identity") {
  CHECK_FALSE(morph_close(BinaryImage::Zero(16, 16), 3, 8).any());
  const BinaryImage full = BinaryImage::Constant(16, 16, 1);
  CHECK((morph_close(full, 3, 8) == full).all());
}

TEST_CASE("closing bridges two blocks separated by a small gap") {
  // Two 5x5 blocks, 2-pixel gap; oracle applies the set definition directly.
  const BinaryImage img = block_image(20, 24, {{3, 5, 5, 5}, {10, 5, 5, 5}});
  const BinaryImage closed = morph_close(img, 3, 8);
  CHECK((closed == naive_close(img, 3, 8)).all());
  CHECK(flood_components(closed).size() == 1);
  CHECK(flood_components(img).size() == 2);
}

TEST_CASE("closing is extensive and idempotent on random images") {
  Rng rng(500);
  for (int i = 0; i < 25; ++i) {
    BinaryImage img(24, 24);
    const double density = 0.1 + 0.5 * rng.uniform();
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) img(y, x) = rng.bernoulli(density) ? 1 : 0;
    const BinaryImage once = morph_close(img, 3, 8);
    CHECK((once.cast<int>() >= img.cast<int>()).all());        // extensive
    CHECK((morph_close(once, 3, 8) == once).all());            // idempotent
    CHECK((once == naive_close(img, 3, 8)).all());             // oracle
  }
}

TEST_CASE("find_contours on an empty image returns nothing") {
  CHECK(find_contours(BinaryImage::Zero(8, 8)).empty());
  CHECK_THROWS_AS(largest_contour({}), EmptyContourSet);
}

TEST_CASE("single block yields one outer contour with exact stats") {
  const auto contours = find_contours(block_image(8, 8, {{2, 2, 3, 3}}));
  REQUIRE(contours.size() == 1);
  CHECK(contours[0].is_outer);
  CHECK(contours[0].region_area == 9);
  CHECK(bounding_rect(contours[0]) == BBox{2, 2, 3, 3});
}

TEST_CASE("two blocks yield two outer contours; the larger wins") {
  const auto contours = find_contours(block_image(16, 16, {{1, 1, 3, 3}, {7, 7, 5, 5}}));
  std::vector<std::int64_t> areas;
  for (const auto& c : contours)
    if (c.is_outer) areas.push_back(c.region_area);
  REQUIRE(areas == std::vector<std::int64_t>{9, 25});
  CHECK(largest_contour(contours).region_area == 25);
}

TEST_CASE("equal areas tie-break on raster order of the component") {
  const auto contours = find_contours(block_image(16, 16, {{8, 2, 3, 3}, {1, 6, 3, 3}}));
  // (8,2) starts at row 2; (1,6) at row 6: raster order keeps the first.
  const Contour& pick = largest_contour(contours);
  CHECK(pick.region_area == 9);
  CHECK(bounding_rect(pick) == BBox{8, 2, 3, 3});
}

TEST_CASE("bounding_rect covers point and L-shaped components") {
  const auto point = find_contours(block_image(10, 10, {{7, 4, 1, 1}}));
  REQUIRE(point.size() == 1);
  CHECK(bounding_rect(point[0]) == BBox{7, 4, 1, 1});
  CHECK(point[0].region_area == 1);

  // L shape spanning (1,1)-(6,4): vertical bar plus foot.
  const auto ell = find_contours(block_image(10, 10, {{1, 1, 2, 4}, {1, 3, 6, 2}}));
  REQUIRE(ell.size() == 1);
  CHECK(bounding_rect(ell[0]) == BBox{1, 1, 6, 4});
}

TEST_CASE("hole borders are flagged and skipped by largest_contour") {
  // 5x5 ring: outer border plus one hole border, same component.
  BinaryImage ring = block_image(9, 9, {{2, 2, 5, 5}});
  ring(4, 4) = 0;
  const auto contours = find_contours(ring);
  int outers = 0, holes = 0;
  for (const auto& c : contours) (c.is_outer ? outers : holes)++;
  CHECK(outers == 1);
  CHECK(holes == 1);
  CHECK(largest_contour(contours).region_area == 24);
  for (const auto& c : contours) CHECK(c.region_area == 24);
}

TEST_CASE("contours agree with the flood-fill oracle on random blob images") {
  Rng rng(31337);
  for (int i = 0; i < 40; ++i) {
    const BinaryImage img = random_blob_image(rng, 64);
    const auto comps = flood_components(img);
    const auto contours = find_contours(img);
    std::size_t outers = 0;
    for (const auto& c : contours) outers += c.is_outer ? 1 : 0;
    REQUIRE(outers == comps.size());
    if (comps.empty()) continue;
    const auto& expect = flood_largest(comps);
    const auto& got = largest_contour(contours);
    CHECK(got.region_area == expect.area);
    CHECK(bounding_rect(got) == expect.box);
  }
}

TEST_CASE("heatmap_to_bbox falls back to the whole image on flat input") {
  const BBox box = heatmap_to_bbox(heatmap_of(Eigen::ArrayXXf::Constant(12, 20, 1.0f)), {});
  CHECK(box == BBox{0, 0, 20, 12});
}

TEST_CASE("heatmap_to_bbox recovers a bright plateau exactly") {
  Eigen::ArrayXXf v = Eigen::ArrayXXf::Zero(48, 48);
  v.block(10, 14, 20, 20) = 1.0f;
  const BBox box = heatmap_to_bbox(heatmap_of(v), {});
  // A solid rectangle is unchanged by closing, so the box is exact.
  CHECK(box == BBox{14, 10, 20, 20});
}

TEST_CASE("heatmap_to_bbox picks the bigger of two plateaus") {
  Eigen::ArrayXXf v = Eigen::ArrayXXf::Zero(64, 64);
  v.block(4, 4, 10, 10) = 1.0f;    // area 100
  v.block(34, 30, 20, 20) = 1.0f;  // area 400
  const BBox box = heatmap_to_bbox(heatmap_of(v), {});
  CHECK(box == BBox{30, 34, 20, 20});
}
