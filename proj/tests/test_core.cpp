#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carloc/bbox.hpp"
#include "carloc/rng.hpp"

using namespace carloc;

namespace {

// Literal pixel-set counting on a small canvas.
std::int64_t pixel_count_intersection(const BBox& a, const BBox& b, int canvas) {
  std::int64_t n = 0;
  for (int y = 0; y < canvas; ++y)
    for (int x = 0; x < canvas; ++x) {
      const bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      if (in_a && in_b) ++n;
    }
  return n;
}

double pixel_count_iou(const BBox& a, const BBox& b, int canvas) {
  std::int64_t inter = 0, uni = 0;
  for (int y = 0; y < canvas; ++y)
    for (int x = 0; x < canvas; ++x) {
      const bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  return double(inter) / double(uni);
}

BBox random_box(Rng& rng, int canvas) {
  const int x = rng.uniform_int(0, canvas - 2);
  const int y = rng.uniform_int(0, canvas - 2);
  const int w = rng.uniform_int(1, canvas - x);
  const int h = rng.uniform_int(1, canvas - y);
  return make_bbox(x, y, w, h);
}

}  // namespace

TEST_CASE("make_bbox validates inputs") {
  const BBox b = make_bbox(0, 0, 10, 10);
  CHECK(b == BBox{0, 0, 10, 10});
  CHECK(b.area() == 100);
  CHECK_THROWS_AS(make_bbox(0, 0, 0, 5), NonPositiveExtent);
  CHECK_THROWS_AS(make_bbox(3, 3, 4, -1), NonPositiveExtent);
  CHECK_THROWS_AS(make_bbox(-1, 0, 5, 5), NegativeOrigin);
}

TEST_CASE("intersection area matches the stated examples") {
  CHECK(bbox_intersection_area({0, 0, 10, 10}, {0, 0, 10, 10}) == 100);
  CHECK(bbox_intersection_area({0, 0, 10, 10}, {20, 20, 5, 5}) == 0);
  // Value derived from the pixel-membership counting oracle.
  CHECK(pixel_count_intersection({0, 0, 10, 10}, {5, 5, 10, 10}, 32) == 25);
  CHECK(bbox_intersection_area({0, 0, 10, 10}, {5, 5, 10, 10}) == 25);
}

TEST_CASE("iou endpoints and the derived overlap value") {
  CHECK(bbox_iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(bbox_iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0);
  CHECK(bbox_iou({0, 0, 10, 10}, {5, 5, 10, 10}) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
}

TEST_CASE("iou equals the pixel-set oracle exactly on random boxes") {
  Rng rng(20240311);
  for (int i = 0; i < 300; ++i) {
    const BBox a = random_box(rng, 64);
    const BBox b = random_box(rng, 64);
    CHECK(bbox_iou(a, b) == pixel_count_iou(a, b, 64));
  }
}

TEST_CASE("iou is symmetric, bounded, and 1 only for identical boxes") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const BBox a = random_box(rng, 48);
    const BBox b = random_box(rng, 48);
    const double iou = bbox_iou(a, b);
    CHECK(iou == bbox_iou(b, a));
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    if (iou == 1.0) CHECK(a == b);
    if (a == b) CHECK(iou == 1.0);
  }
}

TEST_CASE("iou is translation invariant") {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const BBox a = random_box(rng, 32);
    const BBox b = random_box(rng, 32);
    const int dx = rng.uniform_int(0, 15), dy = rng.uniform_int(0, 15);
    CHECK(bbox_iou(a, b) == bbox_iou(bbox_shift(a, dx, dy), bbox_shift(b, dx, dy)));
  }
}

TEST_CASE("clip keeps boxes inside the image") {
  CHECK(bbox_clip({-3, -2, 10, 10}, 8, 8) == BBox{0, 0, 7, 8});
  CHECK(bbox_clip({5, 5, 10, 10}, 8, 8) == BBox{5, 5, 3, 3});
  CHECK(bbox_clip({0, 0, 8, 8}, 8, 8) == BBox{0, 0, 8, 8});
}
