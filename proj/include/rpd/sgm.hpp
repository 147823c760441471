#ifndef RPD_SGM_HPP
#define RPD_SGM_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "rpd/config.hpp"
#include "rpd/perspective.hpp"
#include "rpd/types.hpp"

namespace rpd {

// Matching costs indexed (v, u, d), d in [0, d_max].
struct CostVolume {
  int width = 0;
  int height = 0;
  int d_max = 0;
  std::vector<float> costs;  // (v * width + u) * (d_max + 1) + d

  CostVolume() = default;
  CostVolume(int w, int h, int dm)
      : width(w), height(h), d_max(dm),
        costs(static_cast<std::size_t>(w) * h * (dm + 1), 0.0f) {}

  int levels() const { return d_max + 1; }
  float& at(int v, int u, int d) {
    return costs[(static_cast<std::size_t>(v) * width + u) * levels() + d];
  }
  float at(int v, int u, int d) const {
    return costs[(static_cast<std::size_t>(v) * width + u) * levels() + d];
  }
};

struct SgmParams {
  float lambda1 = 8.0f;
  float lambda2 = 32.0f;
  std::vector<std::array<int, 2>> directions = kEightDirections();  // (du, dv)
  int census_window = 5;

  static std::vector<std::array<int, 2>> kEightDirections() {
    return {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  }
};

// Census/Hamming matching cost between left(u) and rightWarped(u - d). Samples
// falling out of range, or on pixels the warp flagged out-of-view, get the
// maximum cost window^2 - 1.
CostVolume census_cost_volume(const GrayImage& left, const GrayImage& right_warped,
                              int d_max, int window,
                              const Raster<unsigned char>* right_in_view = nullptr);

// Scan-line cost aggregation summed over all directions. Each recursion
// subtracts the predecessor minimum to bound growth; pixels without a
// predecessor keep the raw cost.
CostVolume aggregate_costs(const CostVolume& volume, const SgmParams& params);

// Right-reference volume from the same costs: cost_R(v, u, d) = cost_L(v, u+d, d).
CostVolume swap_reference(const CostVolume& left_volume);

// Winner-takes-all with parabola refinement over (d-1, d, d+1). Pixels whose
// minimum is not unique outside the refinement neighbourhood are invalidated.
DisparityMap select_disparity(const CostVolume& aggregated);

// Invalidates pixels where |d_L(u) - d_R(u - d_L)| > threshold.
void consistency_filter(DisparityMap& left_disp, const DisparityMap& right_disp,
                        double threshold);

struct MatchResult {
  DisparityMap d0;  // warped-pair disparity
  DisparityMap d1;  // original-pair disparity, d0 + kappa
  RowShiftTable shifts;
};

// Full matching pass against a road model: row shifts -> warp -> census ->
// aggregate -> WTA -> consistency check -> shift restoration.
MatchResult match_pair(const GrayImage& left, const GrayImage& right,
                       const RoadModel& model, const PipelineConfig& config,
                       int d_max);

}  // namespace rpd

#endif
