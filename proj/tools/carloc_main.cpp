#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "carloc/compcars.hpp"
#include "carloc/features.hpp"
#include "carloc/heatmap_io.hpp"
#include "carloc/pipeline.hpp"
#include "carloc/synth.hpp"
#include "carloc/viz.hpp"

namespace fs = std::filesystem;
using namespace carloc;

namespace {

BBox parse_box(const std::string& text) {
  int v[4];
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d", &v[0], &v[1], &v[2], &v[3]) != 4)
    throw InvalidConfig("expected box as x,y,w,h: " + text);
  return make_bbox(v[0], v[1], v[2], v[3]);
}

SynthConfig synth_config_from_file(const std::string& path) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(path);
  kv.restrict_keys({"synth.n_images", "synth.image_size", "synth.n_makes",
                    "synth.models_per_make", "synth.n_years", "synth.seed",
                    "synth.background_noise"});
  SynthConfig cfg;
  cfg.n_images = kv.get_int("synth.n_images", cfg.n_images);
  cfg.image_size = kv.get_int("synth.image_size", cfg.image_size);
  cfg.n_makes = kv.get_int("synth.n_makes", cfg.n_makes);
  cfg.models_per_make = kv.get_int("synth.models_per_make", cfg.models_per_make);
  cfg.n_years = kv.get_int("synth.n_years", cfg.n_years);
  cfg.seed = kv.get_u64("synth.seed", cfg.seed);
  cfg.background_noise = kv.get_double("synth.background_noise", cfg.background_noise);
  return cfg;
}

void save_rebased(const DatasetManifest& m, const std::string& out_path) {
  save_manifest(rebase_paths(m, fs::path(out_path).parent_path().string()), out_path);
}

int run(int argc, char** argv) {
  CLI::App app{"carloc: CAM-based car localization toolkit"};
  app.require_subcommand(1);

  // ---- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "build dataset manifests");
  ingest->require_subcommand(1);

  std::string cc_root, cc_out;
  auto* ingest_cc = ingest->add_subcommand("compcars", "adapt a CompCars web-nature tree");
  ingest_cc->add_option("--root", cc_root, "dataset root")->required();
  ingest_cc->add_option("--out", cc_out, "output manifest (jsonl)")->required();
  ingest_cc->callback([&] {
    save_rebased(compcars_adapter(cc_root), cc_out);
    std::printf("wrote %s\n", cc_out.c_str());
  });

  std::string sy_cfg, sy_out, sy_images;
  auto* ingest_sy = ingest->add_subcommand("synth", "generate the synthetic dataset");
  ingest_sy->add_option("--config", sy_cfg, "synth config file")->required();
  ingest_sy->add_option("--out", sy_out, "output manifest (jsonl)")->required();
  ingest_sy->add_option("--images-dir", sy_images, "image directory (default: <out>_images)");
  ingest_sy->callback([&] {
    const std::string dir =
        sy_images.empty() ? (fs::path(sy_out).replace_extension("").string() + "_images")
                          : sy_images;
    save_rebased(synth_generate(synth_config_from_file(sy_cfg), dir), sy_out);
    std::printf("wrote %s\n", sy_out.c_str());
  });

  // ---- label -----------------------------------------------------------
  auto* label = app.add_subcommand("label", "build label assignments");
  label->require_subcommand(1);

  std::string lm_manifest, lm_fields, lm_out;
  auto* label_merge = label->add_subcommand("merge", "concatenate two label fields");
  label_merge->add_option("--manifest", lm_manifest)->required();
  label_merge->add_option("--fields", lm_fields, "e.g. make,year")->required();
  label_merge->add_option("--out", lm_out)->required();
  label_merge->callback([&] {
    const auto comma = lm_fields.find(',');
    if (comma == std::string::npos) throw InvalidConfig("--fields wants two names");
    const auto m = load_manifest(lm_manifest);
    save_labels(merge_labels(m, label_field_from_string(lm_fields.substr(0, comma)),
                             label_field_from_string(lm_fields.substr(comma + 1))),
                lm_out);
  });

  std::string lh_manifest, lh_field, lh_out;
  auto* label_human = label->add_subcommand("human", "read one label field off the manifest");
  label_human->add_option("--manifest", lh_manifest)->required();
  label_human->add_option("--field", lh_field, "make|model|year")->required();
  label_human->add_option("--out", lh_out)->required();
  label_human->callback([&] {
    save_labels(human_labels(load_manifest(lh_manifest), label_field_from_string(lh_field)),
                lh_out);
  });

  std::string lr_manifest, lr_out;
  int lr_n = 75;
  std::uint64_t lr_seed = 1;
  auto* label_random = label->add_subcommand("random", "uniform random labels");
  label_random->add_option("--manifest", lr_manifest)->required();
  label_random->add_option("--n", lr_n, "label count (default 75)");
  label_random->add_option("--seed", lr_seed);
  label_random->add_option("--out", lr_out)->required();
  label_random->callback(
      [&] { save_labels(random_labels(load_manifest(lr_manifest), lr_n, lr_seed), lr_out); });

  std::string le_manifest, le_extractor = "embed-128", le_out;
  int le_size = 64;
  auto* label_extract = label->add_subcommand("extract", "extract backbone embeddings");
  label_extract->add_option("--manifest", le_manifest)->required();
  label_extract->add_option("--extractor", le_extractor, "backbone name (default embed-128)");
  label_extract->add_option("--size", le_size, "inference image size");
  label_extract->add_option("--out", le_out)->required();
  label_extract->callback([&] {
    save_features(extract_features(load_manifest(le_manifest), le_extractor, le_size), le_out);
  });

  std::string lc_features, lc_out, lc_name, lc_manifest;
  int lc_k = 16;
  std::uint64_t lc_seed = 1;
  bool lc_stats = false;
  auto* label_cluster = label->add_subcommand("cluster", "kmeans pseudo-labels from features");
  label_cluster->add_option("--features", lc_features)->required();
  label_cluster->add_option("--k", lc_k)->required();
  label_cluster->add_option("--seed", lc_seed);
  label_cluster->add_option("--name", lc_name, "label space name (default kmeans<k>)");
  label_cluster->add_option("--out", lc_out)->required();
  label_cluster->add_option("--manifest", lc_manifest, "manifest for --stats");
  label_cluster->add_flag("--stats", lc_stats, "print per-split cluster size stats");
  label_cluster->callback([&] {
    const FeatureTable table = load_features(lc_features);
    const ClusterResult result = kmeans_cluster(table, lc_k, lc_seed);
    save_labels(cluster_to_labels(result, lc_name.empty() ? "kmeans" + std::to_string(lc_k)
                                                          : lc_name),
                lc_out);
    if (lc_stats) {
      if (lc_manifest.empty()) throw InvalidConfig("--stats needs --manifest");
      const ClusterStats st = cluster_stats(result, load_manifest(lc_manifest));
      std::printf("split     mean      max      min      std\n");
      auto row = [](const char* name, const SizeStats& s) {
        std::printf("%-8s %8.2f %8.2f %8.2f %8.2f\n", name, s.mean, s.max, s.min, s.stddev);
      };
      row("all", st.all);
      row("train", st.train);
      row("test", st.test);
    }
  });

  // ---- camnet ----------------------------------------------------------
  auto* camnet = app.add_subcommand("camnet", "CAM classifier training and inference");
  camnet->require_subcommand(1);

  std::string ct_manifest, ct_labels, ct_config, ct_out;
  auto* camnet_train = camnet->add_subcommand("train", "train on a label assignment");
  camnet_train->add_option("--manifest", ct_manifest)->required();
  camnet_train->add_option("--labels", ct_labels)->required();
  camnet_train->add_option("--config", ct_config, "train/model config file");
  camnet_train->add_option("--out", ct_out)->required();
  camnet_train->callback([&] {
    TrainConfig tc;
    CamModelSpec spec;
    if (!ct_config.empty()) {
      const KeyValueConfig kv = KeyValueConfig::parse_file(ct_config);
      kv.restrict_keys({"seed", "train.epochs", "train.crop_size", "train.batch_size",
                        "train.learning_rate", "train.momentum", "model.backbone",
                        "model.truncate_after", "model.num_classes", "model.frozen_stages"});
      tc = train_config_from(kv);
      spec = model_spec_from(kv);
    }
    save_weights(train(load_manifest(ct_manifest), load_labels(ct_labels), spec, tc), ct_out);
  });

  std::string ci_weights, ci_manifest, ci_split = "test", ci_out;
  bool ci_pgm = false;
  auto* camnet_infer = camnet->add_subcommand("infer", "write heatmaps for a split");
  camnet_infer->add_option("--weights", ci_weights)->required();
  camnet_infer->add_option("--manifest", ci_manifest)->required();
  camnet_infer->add_option("--split", ci_split, "train|test|all (default test)");
  camnet_infer->add_option("--out", ci_out, "heatmap directory")->required();
  camnet_infer->add_flag("--pgm", ci_pgm, "also write normalized 8-bit PGM maps");
  camnet_infer->callback([&] {
    const CamWeights weights = load_weights(ci_weights);
    const DatasetManifest m = load_manifest(ci_manifest);
    std::vector<std::string> ids;
    if (ci_split == "all")
      ids = m.all_ids();
    else
      ids = m.ids(split_from_string(ci_split));
    fs::create_directories(ci_out);
    for (const auto& id : ids) {
      Heatmap h = infer_heatmap(weights, read_ppm(m.resolve_path(m.image(id))));
      h.image_id = id;
      save_heatmap(h, ci_out);
      if (ci_pgm) write_pgm(to_grayscale(h), (fs::path(ci_out) / (id + ".pgm")).string());
    }
    std::printf("wrote %zu heatmaps to %s\n", ids.size(), ci_out.c_str());
  });

  // ---- boxer -----------------------------------------------------------
  auto* boxer = app.add_subcommand("boxer", "heatmaps to bounding boxes");
  boxer->require_subcommand(1);

  std::string br_heatmaps, br_config, br_out;
  auto* boxer_run = boxer->add_subcommand("run", "convert a heatmap directory");
  boxer_run->add_option("--heatmaps", br_heatmaps)->required();
  boxer_run->add_option("--config", br_config, "boxer config file");
  boxer_run->add_option("--out", br_out, "predictions jsonl")->required();
  boxer_run->callback([&] {
    BoxerConfig bc;
    if (!br_config.empty()) {
      const KeyValueConfig kv = KeyValueConfig::parse_file(br_config);
      kv.restrict_keys({"boxer.threshold_fraction", "boxer.kernel_size", "boxer.iterations"});
      bc = boxer_config_from(kv);
    }
    std::map<std::string, BBox> preds;
    for (const auto& id : list_heatmaps(br_heatmaps))
      preds.emplace(id, heatmap_to_bbox(load_heatmap(br_heatmaps, id), bc));
    save_predictions(preds, br_out);
    std::printf("wrote %zu predictions to %s\n", preds.size(), br_out.c_str());
  });

  // ---- eval ------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "score and compare runs");
  eval->require_subcommand(1);

  std::string er_preds, er_manifest, er_split = "test", er_name = "run", er_out, er_digest;
  auto* eval_run = eval->add_subcommand("run", "mean IoU of a predictions file");
  eval_run->add_option("--preds", er_preds)->required();
  eval_run->add_option("--manifest", er_manifest)->required();
  eval_run->add_option("--split", er_split);
  eval_run->add_option("--name", er_name);
  eval_run->add_option("--digest", er_digest, "config digest to embed");
  eval_run->add_option("--out", er_out, "report json")->required();
  eval_run->callback([&] {
    const EvalReport report = evaluate_run(er_preds, load_manifest(er_manifest),
                                           split_from_string(er_split), er_name, er_digest);
    save_report(report, er_out);
    std::printf("%s miou=%.4f over %d images\n", report.run_name.c_str(), report.miou,
                report.n_images);
  });

  std::string ey_detections, ey_manifest, ey_class = "car", ey_out;
  auto* eval_yolo = eval->add_subcommand("ingest-yolo", "adapt external detector output");
  eval_yolo->add_option("--detections", ey_detections)->required();
  eval_yolo->add_option("--manifest", ey_manifest)->required();
  eval_yolo->add_option("--class-filter", ey_class, "class name (default car)");
  eval_yolo->add_option("--out", ey_out, "predictions jsonl")->required();
  eval_yolo->callback([&] {
    ingest_external_detections(ey_detections, ey_class, load_manifest(ey_manifest), ey_out);
    std::printf("wrote %s\n", ey_out.c_str());
  });

  std::vector<std::string> ec_reports;
  std::string ec_out;
  auto* eval_compare = eval->add_subcommand("compare", "rank runs by mean IoU");
  eval_compare->add_option("--reports", ec_reports)->required()->expected(-1);
  eval_compare->add_option("--out", ec_out, "CSV output path");
  eval_compare->callback([&] {
    std::vector<EvalReport> reports;
    for (const auto& p : ec_reports) reports.push_back(load_report(p));
    const auto sorted = compare_runs(std::move(reports));
    std::fputs(comparison_table(sorted).c_str(), stdout);
    if (!ec_out.empty()) {
      std::ofstream out(ec_out);
      out << comparison_csv(sorted);
    }
  });

  // ---- viz -------------------------------------------------------------
  auto* viz = app.add_subcommand("viz", "static visualizations");
  viz->require_subcommand(1);

  std::string vo_image, vo_pred, vo_gt, vo_out;
  auto* viz_overlay = viz->add_subcommand("overlay", "draw prediction/gt boxes");
  viz_overlay->add_option("--image", vo_image)->required();
  viz_overlay->add_option("--pred", vo_pred, "x,y,w,h")->required();
  viz_overlay->add_option("--gt", vo_gt, "x,y,w,h");
  viz_overlay->add_option("--out", vo_out)->required();
  viz_overlay->callback([&] {
    std::optional<BBox> gt;
    if (!vo_gt.empty()) gt = parse_box(vo_gt);
    write_ppm(render_overlay(read_ppm(vo_image), parse_box(vo_pred), gt), vo_out);
  });

  std::vector<std::string> vp_inputs;
  int vp_columns = 8;
  std::string vp_out;
  auto* viz_panel = viz->add_subcommand("panel", "grid montage of grayscale maps");
  viz_panel->add_option("--inputs", vp_inputs, "PGM files")->required()->expected(-1);
  viz_panel->add_option("--columns", vp_columns);
  viz_panel->add_option("--out", vp_out)->required();
  viz_panel->callback([&] {
    std::vector<GrayU8> maps;
    for (const auto& p : vp_inputs) maps.push_back(read_pgm(p));
    write_pgm(render_cam_panel(maps, vp_columns), vp_out);
  });

  // ---- pipeline --------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end experiment runner");
  pipeline->require_subcommand(1);

  std::string pr_config;
  auto* pipeline_run = pipeline->add_subcommand("run", "run one experiment config");
  pipeline_run->add_option("--config", pr_config)->required();
  pipeline_run->callback([&] {
    const EvalReport report = run_pipeline(load_pipeline_config(pr_config));
    std::printf("%s miou=%.4f over %d images\n", report.run_name.c_str(), report.miou,
                report.n_images);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad arguments are config errors
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const StageError& e) {
    std::fprintf(stderr, "stage failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
