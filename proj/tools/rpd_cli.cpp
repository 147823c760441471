#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <vector>

#include "rpd/evaluation.hpp"
#include "rpd/image_io.hpp"
#include "rpd/pipeline.hpp"
#include "rpd/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json config_to_json(const rpd::PipelineConfig& c) {
  return json{{"delta_pt", c.delta_pt},
              {"delta_dt", c.delta_dt},
              {"delta_pd", c.delta_pd},
              {"d_max", c.d_max},
              {"d_max_pt", c.d_max_pt},
              {"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"census_window", c.census_window},
              {"lr_threshold", c.lr_threshold},
              {"superpixels", c.superpixels},
              {"compactness", c.compactness},
              {"slic_iterations", c.slic_iterations},
              {"hist_bin_width", c.hist_bin_width},
              {"tau_diag", c.tau_diag},
              {"border_margin", c.border_margin},
              {"min_superpixels", c.min_superpixels},
              {"connectivity", c.connectivity},
              {"roll_bracket", c.roll_bracket},
              {"roll_tol", c.roll_tol},
              {"focal", c.focal},
              {"baseline", c.baseline},
              {"cu", c.cu},
              {"cv", c.cv}};
}

rpd::PipelineConfig resolve_config(const std::string& config_path,
                                   const std::vector<std::string>& overrides) {
  rpd::PipelineConfig config;
  if (!config_path.empty()) config = rpd::load_config(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    rpd::apply_key_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

struct FrameOutputs {
  json manifest;
  int exit_code = 0;
};

FrameOutputs run_detect(const std::string& left_path, const std::string& right_path,
                        const rpd::PipelineConfig& config, const std::string& out_dir) {
  FrameOutputs out;
  out.manifest["inputs"] = {{"left", left_path}, {"right", right_path}};
  out.manifest["config"] = config_to_json(config);

  rpd::GrayImage left = rpd::load_gray_image(left_path);
  rpd::GrayImage right = rpd::load_gray_image(right_path);
  fs::create_directories(out_dir);

  rpd::DetectResult result;
  try {
    result = rpd::detect_potholes_pipeline(left, right, config);
  } catch (const rpd::DegenerateFitError& e) {
    out.manifest["warnings"] = {e.what()};
    out.manifest["degenerate_fit"] = true;
    std::ofstream m(out_dir + "/manifest.json");
    m << out.manifest.dump(2) << "\n";
    std::cerr << "detect: " << e.what() << "\n";
    out.exit_code = 2;
    return out;
  }

  rpd::save_disparity(result.d1, out_dir + "/d1.png");
  rpd::save_disparity(result.d2, out_dir + "/d2.png");
  rpd::save_labels(result.labels, out_dir + "/labels.png");
  rpd::save_overlay(left, result.labels, out_dir + "/overlay.png");

  std::vector<std::string> outputs = {out_dir + "/d1.png", out_dir + "/d2.png",
                                      out_dir + "/labels.png", out_dir + "/overlay.png"};
  const rpd::StereoRig rig = rpd::rig_from_config(config, static_cast<int>(left.cols()),
                                                  static_cast<int>(left.rows()));
  const int n_potholes = result.labels.maxCoeff();
  for (int k = 1; k <= n_potholes; ++k) {
    const std::string path = out_dir + "/potholes_" + std::to_string(k) + ".ply";
    rpd::save_ply(rpd::reproject_masked(result.d1, result.labels, k, rig), path);
    outputs.push_back(path);
  }

  json stages = json::object();
  for (const auto& s : result.stage_times) stages[s.name] = s.ms;
  json warnings = json::array();
  if (result.clamped > 0)
    warnings.push_back("clamped " + std::to_string(result.clamped) + " negative D2 pixels");
  if (result.threshold.degenerate) warnings.push_back("degenerate threshold (single cluster)");

  out.manifest["outputs"] = outputs;
  out.manifest["stage_ms"] = stages;
  out.manifest["total_ms"] = result.total_ms;
  out.manifest["warnings"] = warnings;
  out.manifest["road_model"] = {{"a0", result.fit.model.a0},
                                {"a1", result.fit.model.a1},
                                {"phi", result.fit.model.phi},
                                {"e0min", result.fit.e0min}};
  out.manifest["threshold"] = {{"t_r", result.threshold.t_r},
                               {"t_s", result.threshold.t_s}};
  out.manifest["potholes"] = n_potholes;

  std::ofstream m(out_dir + "/manifest.json");
  m << out.manifest.dump(2) << "\n";
  return out;
}

json eval_frame(const fs::path& pred_dir, const fs::path& gt_dir,
                const std::vector<double>& eps_list) {
  json row;
  row["frame"] = pred_dir.filename().string();
  const fs::path gt_disp = gt_dir / "disp_gt.png";
  const fs::path pred_disp = fs::exists(pred_dir / "d1.png") ? pred_dir / "d1.png"
                                                             : pred_dir / "disp_gt.png";
  if (fs::exists(gt_disp) && fs::exists(pred_disp)) {
    rpd::DisparityMap est = rpd::load_disparity(pred_disp.string());
    rpd::DisparityMap gt = rpd::load_disparity(gt_disp.string());
    for (double eps : eps_list) {
      std::ostringstream key;
      key << "pep_" << eps;
      row[key.str()] = rpd::pep(est, gt, eps);
    }
    row["rmse"] = rpd::rmse(est, gt);
  }
  const fs::path gt_mask = gt_dir / "mask_gt.png";
  const fs::path pred_labels = fs::exists(pred_dir / "labels.png") ? pred_dir / "labels.png"
                                                                   : pred_dir / "mask_gt.png";
  if (fs::exists(gt_mask) && fs::exists(pred_labels)) {
    rpd::LabelMap pred = rpd::load_labels(pred_labels.string());
    rpd::LabelMap gt = rpd::load_labels(gt_mask.string());
    rpd::PixelMetrics pm = rpd::pixel_metrics(pred, gt);
    row["precision"] = pm.precision;
    row["recall"] = pm.recall;
    row["accuracy"] = pm.accuracy;
    row["fscore"] = pm.fscore;
    if (pm.degenerate_precision || pm.degenerate_recall) row["degenerate_pr"] = true;
    rpd::InstanceReport ir = rpd::instance_metrics(pred, gt);
    row["correct"] = ir.correct;
    row["incorrect"] = ir.incorrect;
    row["misdetection"] = ir.misdetection;
  }
  return row;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

json aggregate_rows(const std::vector<json>& rows) {
  json agg;
  agg["frame"] = "aggregate";
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& row : rows)
    for (auto it = row.begin(); it != row.end(); ++it)
      if (it->is_number()) {
        sums[it.key()].first += it->get<double>();
        sums[it.key()].second += 1;
      }
  for (const auto& [key, sn] : sums) agg[key] = sn.first / sn.second;
  return agg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo road pothole detection"};
  app.require_subcommand(1);

  std::string left_path, right_path, config_path, out_dir;
  std::vector<std::string> overrides;
  std::string pred_dir, gt_dir, dataset_dir;
  std::vector<double> eps_list = {1.0, 2.0, 3.0};
  int count = 1, workers = 1;
  unsigned seed = 1;

  auto* detect = app.add_subcommand("detect", "Detect potholes in a stereo pair");
  detect->add_option("left", left_path, "Left image")->required();
  detect->add_option("right", right_path, "Right image")->required();
  detect->add_option("--config", config_path, "Config file (key=value)");
  detect->add_option("--set", overrides, "Override a config key (key=value)");
  detect->add_option("--out", out_dir, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  eval->add_option("pred_dir", pred_dir, "Directory of per-frame prediction dirs")->required();
  eval->add_option("gt_dir", gt_dir, "Directory of per-frame ground-truth dirs")->required();
  eval->add_option("--eps", eps_list, "Disparity error tolerances");

  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes");
  synth->add_option("--count", count, "Number of scenes");
  synth->add_option("--seed", seed, "Base seed");
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* bench = app.add_subcommand("bench", "Detect + evaluate over a dataset");
  bench->add_option("dataset_dir", dataset_dir, "Directory of scene dirs")->required();
  bench->add_option("--config", config_path, "Config file (key=value)");
  bench->add_option("--set", overrides, "Override a config key (key=value)");
  bench->add_option("--workers", workers, "Parallel frames")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) {
      rpd::PipelineConfig config = resolve_config(config_path, overrides);
      return run_detect(left_path, right_path, config, out_dir).exit_code;
    }

    if (eval->parsed()) {
      if (!fs::is_directory(gt_dir) || sorted_subdirs(gt_dir).empty()) {
        std::cerr << "eval: no ground-truth frames in " << gt_dir << "\n";
        return 1;
      }
      std::vector<json> rows;
      for (const auto& gt_frame : sorted_subdirs(gt_dir)) {
        const fs::path pred_frame = fs::path(pred_dir) / gt_frame.filename();
        if (!fs::is_directory(pred_frame)) {
          std::cerr << "warning: no prediction for frame " << gt_frame.filename().string()
                    << ", skipped\n";
          continue;
        }
        rows.push_back(eval_frame(pred_frame, gt_frame, eps_list));
        std::cout << rows.back().dump() << "\n";
      }
      if (rows.empty()) {
        std::cerr << "eval: no paired frames\n";
        return 1;
      }
      std::cout << aggregate_rows(rows).dump() << "\n";
      return 0;
    }

    if (synth->parsed()) {
      if (count < 1) {
        std::cerr << "synth: count must be >= 1\n";
        return 1;
      }
      const auto scenes = rpd::scene_batch(count, seed);
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03zu", i);
        rpd::write_scene(scenes[i], (fs::path(out_dir) / name).string());
      }
      return 0;
    }

    if (bench->parsed()) {
      rpd::PipelineConfig config = resolve_config(config_path, overrides);
      const auto frames = sorted_subdirs(dataset_dir);
      if (frames.empty()) {
        std::cerr << "bench: no scene directories in " << dataset_dir << "\n";
        return 1;
      }
      std::vector<json> rows(frames.size());
      std::map<std::string, std::pair<double, int>> stage_sums;

      auto process = [&](std::size_t i) {
        const fs::path out = frames[i] / "pred";
        FrameOutputs fo = run_detect((frames[i] / "left.png").string(),
                                     (frames[i] / "right.png").string(), config, out.string());
        json row = fo.exit_code == 0 ? eval_frame(out, frames[i], eps_list)
                                     : json{{"degenerate_fit", true}};
        row["frame"] = frames[i].filename().string();
        row["runtime_ms"] = fo.manifest.value("total_ms", 0.0);
        row["stage_ms"] = fo.manifest.value("stage_ms", json::object());
        return row;
      };

      std::size_t next = 0;
      while (next < frames.size()) {
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                    frames.size() - next);
        std::vector<std::future<json>> futures;
        for (std::size_t j = 0; j < n; ++j)
          futures.push_back(std::async(std::launch::async, process, next + j));
        for (std::size_t j = 0; j < n; ++j) rows[next + j] = futures[j].get();
        next += n;
      }

      for (auto& row : rows) {
        for (auto it = row["stage_ms"].begin(); it != row["stage_ms"].end(); ++it) {
          stage_sums[it.key()].first += it->get<double>();
          stage_sums[it.key()].second += 1;
        }
        row.erase("stage_ms");
        std::cout << row.dump() << "\n";
      }
      json stages = json::object();
      for (const auto& [name, sn] : stage_sums) stages[name] = sn.first / sn.second;
      json agg = aggregate_rows(rows);
      agg["stage_mean_ms"] = stages;
      std::cout << agg.dump() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
