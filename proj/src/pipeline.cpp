#include "rpd/pipeline.hpp"

#include <chrono>

namespace rpd {
namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTime>& out) : out_(out) { last_ = Clock::now(); }

  void lap(const std::string& name) {
    const auto now = Clock::now();
    out_.push_back({name, std::chrono::duration<double, std::milli>(now - last_).count()});
    last_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::vector<StageTime>& out_;
  Clock::time_point last_;
};

// 2x2 box downsampling for the bootstrap pass.
GrayImage half_image(const GrayImage& img) {
  const int h = static_cast<int>(img.rows()) / 2;
  const int w = static_cast<int>(img.cols()) / 2;
  GrayImage out(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      out(v, u) = 0.25f * (img(2 * v, 2 * u) + img(2 * v, 2 * u + 1) +
                           img(2 * v + 1, 2 * u) + img(2 * v + 1, 2 * u + 1));
  return out;
}

}  // namespace

StereoRig rig_from_config(const PipelineConfig& config, int width, int height) {
  StereoRig rig;
  rig.focal = config.focal;
  rig.baseline = config.baseline;
  rig.cu = config.cu >= 0 ? config.cu : width / 2.0;
  rig.cv = config.cv >= 0 ? config.cv : height / 2.0;
  return rig;
}

DetectResult detect_potholes_pipeline(const GrayImage& left, const GrayImage& right,
                                      const PipelineConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  DetectResult result;
  StageClock clock(result.stage_times);

  // Bootstrap pass with a flat model so the road fit has something to chew on.
  // Half resolution suffices here: the pass only seeds the coarse road model,
  // and disparities scale by exactly two between the levels.
  const bool halve = left.rows() >= 64 && left.cols() >= 64;
  PipelineConfig boot_config = config;
  if (halve) boot_config.d_max = (config.d_max + 1) / 2;
  MatchResult bootstrap =
      halve ? match_pair(half_image(left), half_image(right), RoadModel{}, boot_config,
                         boot_config.d_max)
            : match_pair(left, right, RoadModel{}, config, config.d_max);
  clock.lap("sgm_bootstrap");

  RoadFit coarse;
  try {
    RoadObservations obs = sample_observations(bootstrap.d1);
    coarse = fit_road(obs, config.roll_bracket, config.roll_tol);
  } catch (const std::runtime_error& e) {
    throw DegenerateFitError(std::string("road fit failed: ") + e.what());
  }
  if (halve) coarse.model.a0 *= 2.0;  // a1 and phi are scale-free
  clock.lap("road_fit");

  MatchResult refined = match_pair(left, right, coarse.model, config, config.d_max_pt);
  result.d0 = refined.d0;
  result.d1 = refined.d1;
  clock.lap("sgm_pt");

  try {
    RoadObservations obs = sample_observations(result.d1);
    result.fit = fit_road(obs, config.roll_bracket, config.roll_tol);
  } catch (const std::runtime_error& e) {
    throw DegenerateFitError(std::string("road refit failed: ") + e.what());
  }
  clock.lap("road_refit");

  TransformResult dt = transform_disparity(result.d1, result.fit.model, config.delta_dt);
  result.d2 = std::move(dt.d2);
  result.clamped = dt.clamped;
  clock.lap("disparity_transform");

  result.superpixels = slic(result.d2, config.superpixels, config.compactness,
                            config.slic_iterations);
  result.d3 = pool_superpixels(result.d2, result.superpixels);
  clock.lap("slic");

  Histogram2D hist = build_histogram(result.d2, config.hist_bin_width);
  result.threshold = find_road_threshold(hist, config.delta_pd, config.tau_diag);
  result.labels = detect_potholes(result.d3, result.superpixels, result.threshold,
                                  config.border_margin, config.min_superpixels,
                                  config.connectivity);
  clock.lap("detect");

  result.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace rpd
