#ifndef RPD_PERSPECTIVE_HPP
#define RPD_PERSPECTIVE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rpd/types.hpp"

namespace rpd {

// Per-row shift applied to the right image before matching; content moves
// toward larger u so the residual road disparity shrinks to about delta_pt.
struct RowShiftTable {
  std::vector<double> shifts;  // one entry per row
  double delta_pt = 0.0;
};

// kappa(v) = min_x [a0 + a1 (v cos(phi) - x sin(phi))] - delta_pt, x in [0, W].
// The expression is affine in x, so the minimum sits at an endpoint. Shifts are
// clamped below at zero.
inline RowShiftTable compute_row_shifts(const RoadModel& model, int width, int height,
                                        double delta_pt) {
  if (width < 2) throw std::invalid_argument("compute_row_shifts: width must be >= 2");
  RowShiftTable table;
  table.delta_pt = delta_pt;
  table.shifts.resize(static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) {
    double g0 = road_disparity_at(model, 0.0, v);
    double gw = road_disparity_at(model, static_cast<double>(width), v);
    table.shifts[static_cast<std::size_t>(v)] = std::max(0.0, std::min(g0, gw) - delta_pt);
  }
  return table;
}

struct WarpResult {
  GrayImage image;
  Raster<unsigned char> in_view;  // 0 where the sample fell beyond the right border
};

// out(u, v) = right(u - shift[v], v), linear interpolation along the row.
// Samples before the first column yield intensity 0 and are flagged
// out-of-view.
inline WarpResult warp_right_image(const GrayImage& right, const RowShiftTable& table) {
  const int h = static_cast<int>(right.rows());
  const int w = static_cast<int>(right.cols());
  if (static_cast<int>(table.shifts.size()) != h)
    throw std::invalid_argument("warp_right_image: table length != image height");
  WarpResult out;
  out.image = GrayImage::Zero(h, w);
  out.in_view = Raster<unsigned char>::Zero(h, w);
  for (int v = 0; v < h; ++v) {
    const double shift = table.shifts[static_cast<std::size_t>(v)];
    for (int u = 0; u < w; ++u) {
      const double s = u - shift;
      if (s < 0.0 || s > w - 1) continue;
      const int s0 = static_cast<int>(std::floor(s));
      const int s1 = std::min(s0 + 1, w - 1);
      const double t = s - s0;
      out.image(v, u) = static_cast<float>((1.0 - t) * right(v, s0) + t * right(v, s1));
      out.in_view(v, u) = 1;
    }
  }
  return out;
}

// D1(p) = D0(p) + kappa(v); invalid pixels stay invalid.
inline DisparityMap restore_disparity(const DisparityMap& d0, const RowShiftTable& table) {
  const int h = static_cast<int>(d0.rows());
  if (static_cast<int>(table.shifts.size()) != h)
    throw std::invalid_argument("restore_disparity: table length != map height");
  DisparityMap d1 = d0;
  for (int v = 0; v < h; ++v) {
    const float shift = static_cast<float>(table.shifts[static_cast<std::size_t>(v)]);
    for (int u = 0; u < d0.cols(); ++u)
      if (is_valid(d0(v, u))) d1(v, u) = d0(v, u) + shift;
  }
  return d1;
}

}  // namespace rpd

#endif
