#include "carloc/contours.hpp"

#include <deque>

#include "carloc/morphology.hpp"

namespace carloc {

// ---------------------------------------------------------------------------
// Morphology
// ---------------------------------------------------------------------------

namespace {

void check_kernel(int kernel_size) {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw InvalidConfig("kernel_size must be odd and >= 1");
}

// Separable sliding-window OR (dilate=true) / AND (dilate=false).
BinaryImage window_op(const BinaryImage& b, int radius, bool dilate) {
  const int h = int(b.rows()), w = int(b.cols());
  BinaryImage tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = dilate ? 0 : 1;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int sx = x + dx;
        const std::uint8_t v = (sx >= 0 && sx < w) ? b(y, sx) : 0;
        acc = dilate ? (acc | v) : (acc & v);
      }
      tmp(y, x) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = dilate ? 0 : 1;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int sy = y + dy;
        const std::uint8_t v = (sy >= 0 && sy < h) ? tmp(sy, x) : 0;
        acc = dilate ? (acc | v) : (acc & v);
      }
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

BinaryImage dilate(const BinaryImage& b, int kernel_size) {
  check_kernel(kernel_size);
  return window_op(b, kernel_size / 2, true);
}

BinaryImage erode(const BinaryImage& b, int kernel_size) {
  check_kernel(kernel_size);
  return window_op(b, kernel_size / 2, false);
}

BinaryImage morph_close(const BinaryImage& b, int kernel_size, int iterations) {
  check_kernel(kernel_size);
  if (iterations < 0) throw InvalidConfig("iterations must be >= 0");
  if (iterations == 0 || kernel_size == 1) return b;

  const int pad = iterations * (kernel_size / 2);
  const int h = int(b.rows()), w = int(b.cols());
  BinaryImage canvas = BinaryImage::Zero(h + 2 * pad, w + 2 * pad);
  canvas.block(pad, pad, h, w) = b;
  for (int i = 0; i < iterations; ++i) canvas = window_op(canvas, kernel_size / 2, true);
  for (int i = 0; i < iterations; ++i) canvas = window_op(canvas, kernel_size / 2, false);
  return canvas.block(pad, pad, h, w);
}

// ---------------------------------------------------------------------------
// Connected components (8-connectivity), used to attach region statistics
// to traced borders.
// ---------------------------------------------------------------------------

namespace {

struct ComponentInfo {
  std::int64_t area = 0;
  int min_x, min_y, max_x, max_y;
};

void label_components(const BinaryImage& b, Eigen::ArrayXXi& labels,
                      std::vector<ComponentInfo>& comps) {
  const int h = int(b.rows()), w = int(b.cols());
  labels = Eigen::ArrayXXi::Constant(h, w, -1);
  comps.clear();
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!b(y, x) || labels(y, x) >= 0) continue;
      const int id = int(comps.size());
      comps.push_back(ComponentInfo{0, x, y, x, y});
      labels(y, x) = id;
      queue.push_back({y, x});
      while (!queue.empty()) {
        auto [cy, cx] = queue.front();
        queue.pop_front();
        auto& info = comps[std::size_t(id)];
        info.area++;
        info.min_x = std::min(info.min_x, cx);
        info.min_y = std::min(info.min_y, cy);
        info.max_x = std::max(info.max_x, cx);
        info.max_y = std::max(info.max_y, cy);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (!b(ny, nx) || labels(ny, nx) >= 0) continue;
            labels(ny, nx) = id;
            queue.push_back({ny, nx});
          }
      }
    }
}

// Neighborhood in counterclockwise order on screen (y down):
// E, NE, N, NW, W, SW, S, SE.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_to(int from_y, int from_x, int to_y, int to_x) {
  for (int d = 0; d < 8; ++d)
    if (from_y + kDy[d] == to_y && from_x + kDx[d] == to_x) return d;
  return 0;
}

}  // namespace

std::vector<Contour> find_contours(const BinaryImage& image) {
  const int h = int(image.rows()), w = int(image.cols());

  Eigen::ArrayXXi labels;
  std::vector<ComponentInfo> comps;
  label_components(image, labels, comps);

  // Work on a frame-padded signed copy; the frame plays the paper's role of
  // the background border.
  Eigen::ArrayXXi f = Eigen::ArrayXXi::Zero(h + 2, w + 2);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f(y + 1, x + 1) = image(y, x) ? 1 : 0;

  std::vector<Contour> contours;
  int nbd = 1;

  for (int i = 1; i <= h; ++i) {
    for (int j = 1; j <= w; ++j) {
      const int fij = f(i, j);
      bool outer = false, hole = false;
      int i2 = 0, j2 = 0;
      if (fij == 1 && f(i, j - 1) == 0) {
        outer = true;
        i2 = i;
        j2 = j - 1;
      } else if (fij >= 1 && f(i, j + 1) == 0) {
        hole = true;
        i2 = i;
        j2 = j + 1;
      } else {
        continue;
      }

      ++nbd;
      Contour contour;
      contour.is_outer = outer;
      (void)hole;

      // 3.1: clockwise scan from (i2, j2) for the first nonzero neighbor.
      const int start_dir = direction_to(i, j, i2, j2);
      int i1 = -1, j1 = -1;
      for (int step = 0; step < 8; ++step) {
        const int d = (start_dir - step + 8) % 8;
        const int ny = i + kDy[d], nx = j + kDx[d];
        if (f(ny, nx) != 0) {
          i1 = ny;
          j1 = nx;
          break;
        }
      }
      contour.points.push_back({j - 1, i - 1});
      if (i1 < 0) {
        // Isolated pixel.
        f(i, j) = -nbd;
      } else {
        // 3.2 onward: follow the border.
        int pi2 = i1, pj2 = j1;  // previous neighbor
        int i3 = i, j3 = j;      // current border pixel
        while (true) {
          // 3.3: counterclockwise from the next position after (pi2, pj2).
          const int from = direction_to(i3, j3, pi2, pj2);
          int i4 = 0, j4 = 0;
          bool east_zero_examined = false;
          for (int step = 1; step <= 8; ++step) {
            const int d = (from + step) % 8;
            const int ny = i3 + kDy[d], nx = j3 + kDx[d];
            if (f(ny, nx) != 0) {
              i4 = ny;
              j4 = nx;
              break;
            }
            if (d == 0) east_zero_examined = true;  // east neighbor seen as zero
          }
          // 3.4: mark the current pixel.
          if (east_zero_examined)
            f(i3, j3) = -nbd;
          else if (f(i3, j3) == 1)
            f(i3, j3) = nbd;
          // 3.5: termination or advance.
          if (i4 == i && j4 == j && i3 == i1 && j3 == j1) break;
          pi2 = i3;
          pj2 = j3;
          i3 = i4;
          j3 = j4;
          contour.points.push_back({j3 - 1, i3 - 1});
        }
      }

      const int comp = labels(i - 1, j - 1);
      const auto& info = comps[std::size_t(comp)];
      contour.region_area = info.area;
      contour.component_box =
          BBox{info.min_x, info.min_y, info.max_x - info.min_x + 1, info.max_y - info.min_y + 1};
      contours.push_back(std::move(contour));
    }
  }
  return contours;
}

const Contour& largest_contour(const std::vector<Contour>& contours) {
  const Contour* best = nullptr;
  for (const auto& c : contours) {
    if (!c.is_outer) continue;
    if (!best || c.region_area > best->region_area) best = &c;
  }
  if (!best) throw EmptyContourSet("no outer contour available");
  return *best;
}

BBox bounding_rect(const Contour& contour) { return contour.component_box; }

}  // namespace carloc
