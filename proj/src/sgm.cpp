#include "rpd/sgm.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpd {
namespace {

// Census bit-string per pixel; comparisons against the window centre, border
// handled by coordinate clamping. Up to 48 bits for a 7x7 window.
Raster<std::uint64_t> census_transform(const GrayImage& img, int window) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int r = window / 2;
  Raster<std::uint64_t> census(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float centre = img(v, u);
      std::uint64_t bits = 0;
      for (int dv = -r; dv <= r; ++dv) {
        const int vv = std::clamp(v + dv, 0, h - 1);
        for (int du = -r; du <= r; ++du) {
          if (dv == 0 && du == 0) continue;
          const int uu = std::clamp(u + du, 0, w - 1);
          bits = (bits << 1) | (img(vv, uu) < centre ? 1u : 0u);
        }
      }
      census(v, u) = bits;
    }
  }
  return census;
}

}  // namespace

CostVolume census_cost_volume(const GrayImage& left, const GrayImage& right_warped,
                              int d_max, int window,
                              const Raster<unsigned char>* right_in_view) {
  const int h = static_cast<int>(left.rows());
  const int w = static_cast<int>(left.cols());
  if (right_warped.rows() != h || right_warped.cols() != w)
    throw std::invalid_argument("census_cost_volume: dimension mismatch");
  if (window % 2 == 0) throw std::invalid_argument("census_cost_volume: window must be odd");
  if (d_max >= w) throw std::invalid_argument("census_cost_volume: d_max >= width");

  const float max_cost = static_cast<float>(window * window - 1);
  const auto cl = census_transform(left, window);
  const auto cr = census_transform(right_warped, window);

  CostVolume volume(w, h, d_max);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      float* dst = &volume.at(v, u, 0);
      const std::uint64_t a = cl(v, u);
      for (int d = 0; d <= d_max; ++d) {
        const int ur = u - d;
        if (ur < 0 || (right_in_view && !(*right_in_view)(v, ur))) {
          dst[d] = max_cost;
        } else {
          dst[d] = static_cast<float>(std::popcount(a ^ cr(v, ur)));
        }
      }
    }
  }
  return volume;
}

CostVolume aggregate_costs(const CostVolume& volume, const SgmParams& params) {
  const int w = volume.width, h = volume.height, n = volume.levels();
  CostVolume total(w, h, volume.d_max);
  std::vector<float> line(static_cast<std::size_t>(w) * h * n);

  for (const auto& dir : params.directions) {
    const int du = dir[0], dv = dir[1];
    const int v_begin = dv >= 0 ? 0 : h - 1;
    const int v_end = dv >= 0 ? h : -1;
    const int v_step = dv >= 0 ? 1 : -1;
    const int u_begin = du >= 0 ? 0 : w - 1;
    const int u_end = du >= 0 ? w : -1;
    const int u_step = du >= 0 ? 1 : -1;

    for (int v = v_begin; v != v_end; v += v_step) {
      for (int u = u_begin; u != u_end; u += u_step) {
        const std::size_t base = (static_cast<std::size_t>(v) * w + u) * n;
        float* cur = &line[base];
        const float* raw = &volume.costs[base];
        const int pv = v - dv, pu = u - du;
        if (pv < 0 || pv >= h || pu < 0 || pu >= w) {
          for (int d = 0; d < n; ++d) cur[d] = raw[d];
          continue;
        }
        const float* prev = &line[(static_cast<std::size_t>(pv) * w + pu) * n];
        float prev_min = prev[0];
        for (int d = 1; d < n; ++d) prev_min = std::min(prev_min, prev[d]);
        const float ceiling = prev_min + params.lambda2;
        for (int d = 0; d < n; ++d) {
          float best = prev[d];
          if (d > 0) best = std::min(best, prev[d - 1] + params.lambda1);
          if (d + 1 < n) best = std::min(best, prev[d + 1] + params.lambda1);
          best = std::min(best, ceiling);
          cur[d] = raw[d] + best - prev_min;
        }
      }
    }
    for (std::size_t i = 0; i < total.costs.size(); ++i) total.costs[i] += line[i];
  }
  return total;
}

CostVolume swap_reference(const CostVolume& left_volume) {
  const int w = left_volume.width, h = left_volume.height, dm = left_volume.d_max;
  const float max_cost = *std::max_element(left_volume.costs.begin(), left_volume.costs.end());
  CostVolume right(w, h, dm);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      for (int d = 0; d <= dm; ++d)
        right.at(v, u, d) = (u + d < w) ? left_volume.at(v, u + d, d) : max_cost;
  return right;
}

DisparityMap select_disparity(const CostVolume& aggregated) {
  const int w = aggregated.width, h = aggregated.height, n = aggregated.levels();
  DisparityMap disp(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float* c = &aggregated.costs[(static_cast<std::size_t>(v) * w + u) *
                                         static_cast<std::size_t>(n)];
      int best = 0;
      for (int d = 1; d < n; ++d)
        if (c[d] < c[best]) best = d;

      // Ambiguity: an equal minimum away from the refinement neighbourhood
      // means the cost curve carries no decision (e.g. textureless input).
      bool ambiguous = false;
      for (int d = 0; d < n; ++d)
        if (std::abs(d - best) > 1 && c[d] <= c[best]) ambiguous = true;
      if (ambiguous) {
        disp(v, u) = kInvalidDisparity;
        continue;
      }

      float refined = static_cast<float>(best);
      if (best > 0 && best < n - 1) {
        const float denom = c[best - 1] + c[best + 1] - 2.0f * c[best];
        if (denom > 0.0f) refined += (c[best - 1] - c[best + 1]) / (2.0f * denom);
      }
      disp(v, u) = refined;
    }
  }
  return disp;
}

void consistency_filter(DisparityMap& left_disp, const DisparityMap& right_disp,
                        double threshold) {
  const int h = static_cast<int>(left_disp.rows());
  const int w = static_cast<int>(left_disp.cols());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float dl = left_disp(v, u);
      if (!is_valid(dl)) continue;
      const int ur = u - static_cast<int>(std::lround(dl));
      if (ur < 0 || ur >= w || !is_valid(right_disp(v, ur)) ||
          std::abs(dl - right_disp(v, ur)) > threshold) {
        left_disp(v, u) = kInvalidDisparity;
      }
    }
  }
}

MatchResult match_pair(const GrayImage& left, const GrayImage& right,
                       const RoadModel& model, const PipelineConfig& config,
                       int d_max) {
  if (left.rows() != right.rows() || left.cols() != right.cols())
    throw std::invalid_argument("match_pair: dimension mismatch");

  MatchResult result;
  result.shifts = compute_row_shifts(model, static_cast<int>(left.cols()),
                                     static_cast<int>(left.rows()), config.delta_pt);
  WarpResult warped = warp_right_image(right, result.shifts);

  SgmParams params;
  params.lambda1 = static_cast<float>(config.lambda1);
  params.lambda2 = static_cast<float>(config.lambda2);
  params.census_window = config.census_window;

  CostVolume raw = census_cost_volume(left, warped.image, d_max, config.census_window,
                                      &warped.in_view);
  CostVolume agg = aggregate_costs(raw, params);
  result.d0 = select_disparity(agg);

  CostVolume agg_right = aggregate_costs(swap_reference(raw), params);
  DisparityMap right_disp = select_disparity(agg_right);
  consistency_filter(result.d0, right_disp, config.lr_threshold);

  // A flat raw cost curve (all in-range samples equal) carries no matching
  // information; aggregation would otherwise settle on d = 0 through the
  // border costs alone.
  for (int v = 0; v < left.rows(); ++v)
    for (int u = 0; u < left.cols(); ++u) {
      if (!is_valid(result.d0(v, u))) continue;
      float lo = std::numeric_limits<float>::max();
      float hi = std::numeric_limits<float>::lowest();
      for (int d = 0; d <= d_max; ++d) {
        const int ur = u - d;
        if (ur < 0 || !warped.in_view(v, ur)) continue;
        lo = std::min(lo, raw.at(v, u, d));
        hi = std::max(hi, raw.at(v, u, d));
      }
      if (hi <= lo) result.d0(v, u) = kInvalidDisparity;
    }

  // Pixels whose best sample fell past the warped right border carry no
  // information even when the cost curve happens to dip.
  for (int v = 0; v < left.rows(); ++v)
    for (int u = 0; u < left.cols(); ++u) {
      const float d = result.d0(v, u);
      if (!is_valid(d)) continue;
      const int ur = u - static_cast<int>(std::lround(d));
      if (ur < 0 || !warped.in_view(v, ur)) result.d0(v, u) = kInvalidDisparity;
    }

  result.d1 = restore_disparity(result.d0, result.shifts);
  return result;
}

}  // namespace rpd
