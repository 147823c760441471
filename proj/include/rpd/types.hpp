#ifndef RPD_TYPES_HPP
#define RPD_TYPES_HPP

#include <Eigen/Dense>

namespace rpd {

// Row-major rasters indexed (v, u) = (row, col).
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 8-bit intensities promoted to float, range [0, 255].
using GrayImage = Raster<float>;

// Disparities in pixels. Pixels without an estimate carry kInvalidDisparity.
using DisparityMap = Raster<float>;

// Non-negative integer labels, 0 = background.
using LabelMap = Raster<int>;

inline constexpr float kInvalidDisparity = -1.0f;

inline bool is_valid(float d) { return d != kInvalidDisparity; }

struct StereoRig {
  double focal = 700.0;    // px
  double baseline = 0.12;  // m
  double cu = 0.0;         // principal point, px
  double cv = 0.0;
};

// Road disparity projection d(u,v) = a0 + a1 (v cos(phi) - u sin(phi)).
struct RoadModel {
  double a0 = 0.0;
  double a1 = 0.0;
  double phi = 0.0;  // stereo rig roll angle, rad
};

inline double road_disparity_at(const RoadModel& m, double u, double v) {
  return m.a0 + m.a1 * (v * std::cos(m.phi) - u * std::sin(m.phi));
}

struct Point3 {
  float x, y, z;
};

using PointCloud = std::vector<Point3>;

}  // namespace rpd

#endif
