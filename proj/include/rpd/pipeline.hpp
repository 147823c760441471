#ifndef RPD_PIPELINE_HPP
#define RPD_PIPELINE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "rpd/config.hpp"
#include "rpd/road_geometry.hpp"
#include "rpd/segmentation.hpp"
#include "rpd/sgm.hpp"
#include "rpd/types.hpp"

namespace rpd {

// Road model could not be fitted (textureless input, too few valid pixels).
struct DegenerateFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageTime {
  std::string name;
  double ms;
};

struct DetectResult {
  DisparityMap d0;
  DisparityMap d1;
  DisparityMap d2;
  DisparityMap d3;
  SuperpixelMap superpixels;
  LabelMap labels;
  RoadFit fit;
  ThresholdResult threshold;
  long clamped = 0;
  std::vector<StageTime> stage_times;
  double total_ms = 0.0;
};

// Full pipeline: bootstrap matching with a flat model to get a first road fit,
// perspective-transformed matching pass, road refit, disparity transformation,
// SLIC pooling, adaptive thresholding and component labeling.
DetectResult detect_potholes_pipeline(const GrayImage& left, const GrayImage& right,
                                      const PipelineConfig& config);

StereoRig rig_from_config(const PipelineConfig& config, int width, int height);

}  // namespace rpd

#endif
