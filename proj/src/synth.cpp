#include "carloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "carloc/image.hpp"
#include "carloc/rng.hpp"

namespace fs = std::filesystem;

namespace carloc {

namespace {

void validate(const SynthConfig& cfg) {
  if (cfg.n_images < 1 || cfg.n_makes < 1 || cfg.models_per_make < 1 || cfg.n_years < 1)
    throw InvalidConfig("synth counts must be >= 1");
  if (cfg.image_size < 64) throw InvalidConfig("synth image_size must be >= 64");
  if (cfg.background_noise < 0.0 || cfg.background_noise > 1.0)
    throw InvalidConfig("background_noise must lie in [0,1]");
}

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 1.0) * 6.0;
  const int i = int(h);
  const double f = h - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r, g, b;
  switch (i % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  auto u8 = [](double x) { return std::uint8_t(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
  return {u8(r), u8(g), u8(b)};
}

// Point-in-glyph test in unit coordinates: (u, v) in [-1,1]^2 spans the
// glyph's bounding ellipse/rectangle.
bool inside_family(int family, double u, double v) {
  switch (family % 6) {
    case 0: return u * u + v * v <= 1.0;                                  // ellipse
    case 1: return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;              // box
    case 2: return v >= -1.0 && v <= 1.0 && std::abs(u) <= (v + 1.0) / 2; // triangle
    case 3: return std::abs(u) + std::abs(v) <= 1.0;                      // diamond
    case 4: return std::abs(u) <= 0.34 || std::abs(v) <= 0.34;            // cross
    default: {                                                            // ring
      const double d = u * u + v * v;
      return d <= 1.0 && d >= 0.30;
    }
  }
}

}  // namespace

DatasetManifest synth_generate(const SynthConfig& cfg, const std::string& images_dir) {
  validate(cfg);
  fs::create_directories(images_dir);

  const int size = cfg.image_size;
  const int n_models = cfg.n_makes * cfg.models_per_make;
  static const double kAspects[5] = {1.35, 0.95, 0.70, 1.15, 0.80};
  static const double kScales[3] = {0.42, 0.52, 0.62};

  std::vector<ImageRef> images;
  std::map<std::string, LabelRecord> labels;
  std::map<std::string, BBox> boxes;
  std::map<std::string, Split> split;

  for (int i = 0; i < cfg.n_images; ++i) {
    Rng rng(mix_seed(cfg.seed, std::uint64_t(i)));

    const int combo = i % (n_models * cfg.n_years);
    const int make_idx = combo / (cfg.models_per_make * cfg.n_years);
    const int rem = combo % (cfg.models_per_make * cfg.n_years);
    const int variant = rem / cfg.n_years;
    const int year_idx = rem % cfg.n_years;

    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "synth-%05d", i);
    const std::string id(id_buf);

    // Background: achromatic base with per-pixel noise.
    const int bg_base = 104 + rng.uniform_int(-16, 16);
    const int amp = int(std::lround(70.0 * cfg.background_noise));
    RgbImage img = make_rgb(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const int n = amp > 0 ? rng.uniform_int(-amp, amp) : 0;
        const auto v = std::uint8_t(std::clamp(bg_base + n, 0, 255));
        img.at(y, x, 0) = img.at(y, x, 1) = img.at(y, x, 2) = v;
      }

    // Glyph geometry. Half extents leave a margin so the glyph stays inside.
    const double aspect = kAspects[variant % 5];
    const double scale = kScales[variant % 3] + 0.02 * (rng.uniform() - 0.5);
    double half_w = scale * size / 2.0 * std::sqrt(aspect);
    double half_h = scale * size / 2.0 / std::sqrt(aspect);
    half_w = std::clamp(half_w, 4.0, size / 2.0 - 3.0);
    half_h = std::clamp(half_h, 4.0, size / 2.0 - 3.0);

    const double jitter = size / 14.0;
    double cx = size / 2.0 + (rng.uniform() * 2.0 - 1.0) * jitter;
    double cy = size / 2.0 + (rng.uniform() * 2.0 - 1.0) * jitter;
    cx = std::clamp(cx, half_w + 2.0, size - half_w - 2.0);
    cy = std::clamp(cy, half_h + 2.0, size - half_h - 2.0);

    const double hue = (year_idx + 0.5) / cfg.n_years;
    const Rgb fill = hsv_to_rgb(hue, 0.82, 0.90);
    const Rgb shade = hsv_to_rgb(hue, 0.82, 0.50);

    int min_x = size, min_y = size, max_x = -1, max_y = -1;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double u = (x + 0.5 - cx) / half_w;
        const double v = (y + 0.5 - cy) / half_h;
        if (!inside_family(make_idx, u, v)) continue;
        const bool core = inside_family(make_idx, u / 0.55, v / 0.55);
        const Rgb& c = core ? shade : fill;
        img.at(y, x, 0) = c.r;
        img.at(y, x, 1) = c.g;
        img.at(y, x, 2) = c.b;
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
      }

    const std::string filename = id + ".ppm";
    write_ppm(img, (fs::path(images_dir) / filename).string());

    char make_buf[16], model_buf[32];
    std::snprintf(make_buf, sizeof make_buf, "make%02d", make_idx);
    std::snprintf(model_buf, sizeof model_buf, "make%02d-m%02d", make_idx, variant);

    images.push_back(ImageRef{id, (fs::path(images_dir) / filename).string(), size, size});
    labels.emplace(id, LabelRecord{make_buf, model_buf, std::to_string(2000 + year_idx)});
    boxes.emplace(id, make_bbox(min_x, min_y, max_x - min_x + 1, max_y - min_y + 1));
  }

  // ~70/30 split, deterministic in the root seed.
  std::vector<int> order(cfg.n_images);
  for (int i = 0; i < cfg.n_images; ++i) order[i] = i;
  Rng split_rng(mix_seed(cfg.seed, 0x5917ULL));
  split_rng.shuffle(order);
  const int n_train = int(std::lround(0.7 * cfg.n_images));
  for (int pos = 0; pos < cfg.n_images; ++pos)
    split.emplace(images[std::size_t(order[pos])].id,
                  pos < n_train ? Split::Train : Split::Test);

  return DatasetManifest::build(std::move(images), std::move(labels), std::move(boxes),
                                std::move(split));
}

DatasetManifest rebase_paths(const DatasetManifest& m, const std::string& new_base) {
  std::vector<ImageRef> images;
  std::map<std::string, LabelRecord> labels;
  std::map<std::string, BBox> boxes;
  std::map<std::string, Split> split;
  for (const auto& img : m.images()) {
    ImageRef ref = img;
    std::error_code ec;
    fs::path rel = fs::relative(m.resolve_path(img), new_base, ec);
    if (!ec && !rel.empty()) ref.path = rel.string();
    images.push_back(std::move(ref));
    labels.emplace(img.id, m.label(img.id));
    boxes.emplace(img.id, m.gt_box(img.id));
    split.emplace(img.id, m.split(img.id));
  }
  auto out = DatasetManifest::build(std::move(images), std::move(labels), std::move(boxes),
                                    std::move(split));
  out.set_base_dir(new_base);
  return out;
}

}  // namespace carloc
