#ifndef RPD_SYNTH_HPP
#define RPD_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rpd/types.hpp"

namespace rpd {

struct PotholeSpec {
  double cu = 0.0;     // centre, px
  double cv = 0.0;
  double ru = 10.0;    // radii, px
  double rv = 10.0;
  double depth = 2.0;  // disparity deficit at the centre, px
};

struct SceneSpec {
  int width = 640;
  int height = 480;
  StereoRig rig;
  double a0 = 5.0;          // true road line
  double a1 = 0.08;
  double phi_true = 0.0;    // rad
  std::vector<PotholeSpec> potholes;
  std::uint32_t texture_seed = 1;
  double noise_sigma = 0.0;  // additive intensity noise
};

struct SceneTruth {
  GrayImage left;
  GrayImage right;
  DisparityMap gt_disparity;
  LabelMap gt_mask;  // pothole index + 1 where the dip is nonzero
  SceneSpec spec;
};

// Deterministic synthetic road scene: planar ground-truth disparity with
// elliptic-paraboloid pothole dips, band-limited noise texture, and a right
// view sampled from the left at disparity-shifted coordinates.
SceneTruth generate_scene(const SceneSpec& spec);

struct BatchRanges {
  double depth_min = 1.5, depth_max = 4.0;
  double radius_min = 22.0, radius_max = 48.0;
  double a0_min = 4.0, a0_max = 7.0;
  double a1_min = 0.07, a1_max = 0.09;
  double phi_abs_max = 0.035;  // rad, ~2 deg
  double noise_sigma = 0.0;
  int margin = 40;  // keep potholes away from the border
};

// Scene i uses seed base_seed + i and 1-3 potholes drawn from the ranges.
std::vector<SceneTruth> scene_batch(int count, std::uint32_t base_seed,
                                    const BatchRanges& ranges = {});

void write_scene(const SceneTruth& scene, const std::string& dir);
SceneTruth load_scene(const std::string& dir);

}  // namespace rpd

#endif
