#include "carloc/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "carloc/digest.hpp"
#include "carloc/features.hpp"
#include "carloc/heatmap_io.hpp"

namespace fs = std::filesystem;

namespace carloc {

namespace {

struct Selector {
  enum class Kind { Human, Merged, Random, Cluster } kind;
  LabelField first = LabelField::Make;
  LabelField second = LabelField::Year;
  int n = 0;  // random size or cluster k
};

Selector parse_selector(const std::string& text) {
  Selector s{Selector::Kind::Human};
  if (text == "make" || text == "model" || text == "year") {
    s.first = label_field_from_string(text);
    return s;
  }
  if (text == "make-year" || text == "model-year") {
    s.kind = Selector::Kind::Merged;
    s.first = label_field_from_string(text.substr(0, text.find('-')));
    s.second = LabelField::Year;
    return s;
  }
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    int n = 0;
    try {
      n = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidConfig("bad label_space count in '" + text + "'");
    }
    if (head == "random") {
      s.kind = Selector::Kind::Random;
      s.n = n;
      return s;
    }
    if (head == "kmeans") {
      s.kind = Selector::Kind::Cluster;
      s.n = n;
      return s;
    }
  }
  throw InvalidConfig("unknown label_space selector: " + text);
}

class StageRunner {
 public:
  StageRunner(const fs::path& out_dir)
      : out_dir_(out_dir), digest_dir_(out_dir / "digests"), log_path_(out_dir / "pipeline.log") {
    fs::create_directories(digest_dir_);
  }

  /// Returns true when the stage has to run (digest mismatch or artifact
  /// missing) and logs either way.
  bool needs_run(const std::string& stage, const std::string& digest,
                 const std::vector<fs::path>& artifacts) {
    const fs::path marker = digest_dir_ / (stage + ".digest");
    bool fresh = fs::exists(marker);
    if (fresh) {
      std::ifstream in(marker);
      std::string stored;
      in >> stored;
      fresh = (stored == digest);
    }
    for (const auto& a : artifacts)
      if (!fs::exists(a)) fresh = false;
    log_line("[" + stage + "] " + (fresh ? "cached" : "run") + " digest=" + digest);
    return !fresh;
  }

  void mark_done(const std::string& stage, const std::string& digest) {
    std::ofstream out(digest_dir_ / (stage + ".digest"));
    out << digest << "\n";
  }

  void log_line(const std::string& line) {
    std::ofstream log(log_path_, std::ios::app);
    log << line << "\n";
    std::fprintf(stderr, "%s\n", line.c_str());
  }

 private:
  fs::path out_dir_;
  fs::path digest_dir_;
  fs::path log_path_;
};

std::string train_digest_part(const TrainConfig& t) {
  Digest d;
  d.add(std::int64_t(t.epochs)).add(std::int64_t(t.crop_size)).add(std::int64_t(t.batch_size));
  d.add(double(t.learning_rate)).add(double(t.momentum)).add(std::int64_t(t.seed));
  return d.hex();
}

std::string model_digest_part(const CamModelSpec& m) {
  Digest d;
  d.add(m.backbone).add(std::int64_t(m.truncate_after)).add(std::int64_t(m.num_classes));
  for (int s : m.frozen_stages) d.add(std::int64_t(s));
  return d.hex();
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(path);
  kv.restrict_keys({"manifest", "label_space", "out_dir", "run_name", "seed", "eval.split",
                    "train.epochs", "train.crop_size", "train.batch_size",
                    "train.learning_rate", "train.momentum", "model.backbone",
                    "model.truncate_after", "model.num_classes", "model.frozen_stages",
                    "boxer.threshold_fraction", "boxer.kernel_size", "boxer.iterations",
                    "features.extractor", "features.image_size"});

  PipelineConfig cfg;
  cfg.manifest_path = kv.get("manifest", "");
  cfg.label_space = kv.get("label_space", "");
  cfg.out_dir = kv.get("out_dir", "");
  cfg.run_name = kv.get("run_name", "");
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.train = train_config_from(kv);
  cfg.model = model_spec_from(kv);
  cfg.boxer = boxer_config_from(kv);
  cfg.extractor = kv.get("features.extractor", cfg.extractor);
  cfg.extractor_image_size = kv.get_int("features.image_size", cfg.extractor_image_size);
  cfg.eval_split = split_from_string(kv.get("eval.split", "test"));

  if (cfg.manifest_path.empty()) throw InvalidConfig(path + ": missing key 'manifest'");
  if (cfg.label_space.empty()) throw InvalidConfig(path + ": missing key 'label_space'");
  if (cfg.out_dir.empty()) throw InvalidConfig(path + ": missing key 'out_dir'");
  parse_selector(cfg.label_space);
  return cfg;
}

EvalReport run_pipeline(const PipelineConfig& cfg) {
  const Selector selector = parse_selector(cfg.label_space);
  const std::string run_name = cfg.run_name.empty() ? cfg.label_space : cfg.run_name;

  fs::create_directories(cfg.out_dir);
  StageRunner runner{fs::path(cfg.out_dir)};
  runner.log_line("== pipeline " + run_name + " ==");

  const DatasetManifest manifest =
      stage("manifest", [&] { return load_manifest(cfg.manifest_path); });
  const std::string manifest_digest = Digest().add_file(cfg.manifest_path).hex();

  const char* cache_env = std::getenv("CARLOC_CACHE_ROOT");
  const fs::path cache_root = cache_env ? fs::path(cache_env) : fs::path(cfg.out_dir);

  // ---- labels ----------------------------------------------------------
  const fs::path labels_path = fs::path(cfg.out_dir) / "labels.json";
  std::string labels_digest;
  {
    Digest d;
    d.add(manifest_digest).add(cfg.label_space).add(std::int64_t(cfg.seed));

    fs::path features_path;
    if (selector.kind == Selector::Kind::Cluster) {
      Digest fd;
      fd.add(manifest_digest).add(cfg.extractor).add(std::int64_t(cfg.extractor_image_size));
      const std::string features_digest = fd.hex();
      fs::create_directories(cache_root);
      features_path = cache_root / ("features-" + features_digest + ".bin");
      if (runner.needs_run("features", features_digest, {features_path})) {
        stage("features", [&] {
          save_features(extract_features(manifest, cfg.extractor, cfg.extractor_image_size),
                        features_path.string());
          return 0;
        });
        runner.mark_done("features", features_digest);
      }
      d.add(features_digest);
    }

    labels_digest = d.hex();
    const std::string stage_name =
        selector.kind == Selector::Kind::Cluster ? "cluster" : "labels";
    if (runner.needs_run(stage_name, labels_digest, {labels_path})) {
      stage(stage_name, [&] {
        LabelAssignment labels;
        switch (selector.kind) {
          case Selector::Kind::Human:
            labels = human_labels(manifest, selector.first);
            break;
          case Selector::Kind::Merged:
            labels = merge_labels(manifest, selector.first, selector.second);
            break;
          case Selector::Kind::Random:
            labels = random_labels(manifest, selector.n, cfg.seed);
            break;
          case Selector::Kind::Cluster: {
            const FeatureTable table = load_features(features_path.string());
            const ClusterResult result = kmeans_cluster(table, selector.n, cfg.seed);
            const ClusterStats stats = cluster_stats(result, manifest);
            char line[160];
            std::snprintf(line, sizeof line,
                          "[cluster] k=%d sizes all: mean %.2f max %.0f min %.0f std %.2f",
                          selector.n, stats.all.mean, stats.all.max, stats.all.min,
                          stats.all.stddev);
            runner.log_line(line);
            labels = cluster_to_labels(result, "kmeans" + std::to_string(selector.n));
            break;
          }
        }
        save_labels(labels, labels_path.string());
        return 0;
      });
      runner.mark_done(stage_name, labels_digest);
    }
  }

  // ---- train -----------------------------------------------------------
  const fs::path weights_path = fs::path(cfg.out_dir) / "weights.ckpt";
  Digest td;
  td.add(labels_digest).add(model_digest_part(cfg.model)).add(train_digest_part(cfg.train));
  const std::string train_digest = td.hex();
  if (runner.needs_run("train", train_digest, {weights_path})) {
    stage("train", [&] {
      const LabelAssignment labels = load_labels(labels_path.string());
      save_weights(train(manifest, labels, cfg.model, cfg.train), weights_path.string());
      return 0;
    });
    runner.mark_done("train", train_digest);
  }

  // ---- infer -----------------------------------------------------------
  const fs::path heatmap_dir = fs::path(cfg.out_dir) / "heatmaps";
  Digest id_;
  id_.add(train_digest).add(to_string(cfg.eval_split));
  const std::string infer_digest = id_.hex();
  if (runner.needs_run("infer", infer_digest, {heatmap_dir})) {
    stage("infer", [&] {
      const CamWeights weights = load_weights(weights_path.string());
      fs::create_directories(heatmap_dir);
      for (const auto& id : manifest.ids(cfg.eval_split)) {
        const RgbImage img = read_ppm(manifest.resolve_path(manifest.image(id)));
        Heatmap h = infer_heatmap(weights, img);
        h.image_id = id;
        save_heatmap(h, heatmap_dir.string());
      }
      return 0;
    });
    runner.mark_done("infer", infer_digest);
  }

  // ---- boxes -----------------------------------------------------------
  const fs::path preds_path = fs::path(cfg.out_dir) / "preds.jsonl";
  Digest bd;
  bd.add(infer_digest).add(cfg.boxer.threshold_fraction);
  bd.add(std::int64_t(cfg.boxer.kernel_size)).add(std::int64_t(cfg.boxer.iterations));
  const std::string boxes_digest = bd.hex();
  if (runner.needs_run("boxes", boxes_digest, {preds_path})) {
    stage("boxes", [&] {
      std::map<std::string, BBox> preds;
      for (const auto& id : list_heatmaps(heatmap_dir.string()))
        preds.emplace(id, heatmap_to_bbox(load_heatmap(heatmap_dir.string(), id), cfg.boxer));
      save_predictions(preds, preds_path.string());
      return 0;
    });
    runner.mark_done("boxes", boxes_digest);
  }

  // ---- eval ------------------------------------------------------------
  const fs::path report_path = fs::path(cfg.out_dir) / "report.json";
  Digest ed;
  ed.add(boxes_digest).add(run_name);
  const std::string eval_digest = ed.hex();
  if (runner.needs_run("eval", eval_digest, {report_path})) {
    stage("eval", [&] {
      const EvalReport report =
          evaluate_run(preds_path.string(), manifest, cfg.eval_split, run_name, eval_digest);
      save_report(report, report_path.string());
      return 0;
    });
    runner.mark_done("eval", eval_digest);
  }

  return stage("eval", [&] { return load_report(report_path.string()); });
}

}  // namespace carloc
