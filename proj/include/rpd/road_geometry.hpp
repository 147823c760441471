#ifndef RPD_ROAD_GEOMETRY_HPP
#define RPD_ROAD_GEOMETRY_HPP

#include <optional>
#include <string>

#include "rpd/types.hpp"

namespace rpd {

// Valid (d, u, v) samples feeding the road model fit.
struct RoadObservations {
  Eigen::VectorXd d;
  Eigen::VectorXd u;
  Eigen::VectorXd v;

  Eigen::Index count() const { return d.size(); }
};

struct LineFit {
  RoadModel model;
  double e0min = 0.0;  // residual sum of squares at the optimum
};

// Closed-form least squares for a = (a0, a1) at fixed roll angle:
// a = (T'T)^-1 T'd with T = [1  cos(phi) v - sin(phi) u].
// Throws on a singular normal matrix (all samples in one rotated row).
LineFit fit_line(const RoadObservations& obs, double phi);

// Golden-section minimisation of the fit residual over the roll bracket.
RoadModel estimate_roll(const RoadObservations& obs, double bracket_lo, double bracket_hi,
                        double tol);

struct RoadFit {
  RoadModel model;
  double e0min = 0.0;
  Eigen::Index used = 0;  // observations surviving the trimming pass
};

// estimate_roll plus one trimming pass: samples with residual beyond
// 3x the residual RMS (potholes, gross mismatches) are dropped and the
// roll search repeats once on the survivors.
RoadFit fit_road(const RoadObservations& obs, double bracket, double tol);

struct RectRoi {
  int u0, v0, width, height;
};

// Collects every valid pixel in the ROI (default: whole map), deterministically
// stride-sampled down to at most `cap` observations.
RoadObservations sample_observations(const DisparityMap& d1,
                                     std::optional<RectRoi> roi = std::nullopt,
                                     Eigen::Index cap = 100000);

struct TransformResult {
  DisparityMap d2;
  long clamped = 0;  // negative values clamped to zero; high counts mean a bad fit
};

// D2(p) = D1(p) - (a0 + a1 (v cos(phi) - u sin(phi))) + delta_dt.
TransformResult transform_disparity(const DisparityMap& d1, const RoadModel& model,
                                    double delta_dt);

// Z = f b / d, X = (u - cu) Z / f, Y = (v - cv) Z / f; invalid or d <= 0 skipped.
PointCloud reproject(const DisparityMap& d1, const StereoRig& rig);

PointCloud reproject_masked(const DisparityMap& d1, const LabelMap& labels, int label,
                            const StereoRig& rig);

// Root mean squared distance from each test point to its nearest ground-truth
// point (exact, brute force).
double closest_distance_error(const PointCloud& test, const PointCloud& truth);

// ASCII PLY, float x/y/z per vertex.
void save_ply(const PointCloud& cloud, const std::string& path);
PointCloud load_ply(const std::string& path);

}  // namespace rpd

#endif
