#ifndef RPD_SEGMENTATION_HPP
#define RPD_SEGMENTATION_HPP

#include <vector>

#include "rpd/types.hpp"

namespace rpd {

struct SuperpixelMap {
  struct Center {
    double cu = 0.0;
    double cv = 0.0;
    double value = 0.0;  // mean transformed disparity
  };
  LabelMap labels;               // 1..count, every pixel assigned
  std::vector<Center> centers;   // centers[k-1] belongs to label k
  int count = 0;
  double spacing = 0.0;          // grid interval S = sqrt(H W / p)
};

// SLIC clustering of the transformed disparity map. Invalid pixels participate
// with value 0. Seeds start on a regular grid, get nudged to the lowest-gradient
// spot in their 3x3 neighbourhood, and are refined by windowed k-means with
// distance sqrt(dval^2 + (ds/S)^2 m^2). Each cluster survives as its largest
// connected piece; stray fragments are absorbed by the nearest grown
// neighbour.
SuperpixelMap slic(const DisparityMap& d2, int p, double compactness, int iterations);

// D3(p) = mean of the valid D2 values inside label(p); all-invalid superpixels
// become invalid.
DisparityMap pool_superpixels(const DisparityMap& d2, const SuperpixelMap& sp);

struct Histogram2D {
  double bin_width = 0.25;
  double origin = 0.0;   // lower edge of bin 0, shared by both axes
  Raster<long> counts;   // rows index g1 bins, cols index g2 bins
  long total = 0;

  double center(Eigen::Index bin) const { return origin + (bin + 0.5) * bin_width; }
};

// Bins (D2(p), neighbour mean) for every interior pixel whose eight-connected
// neighbourhood is fully valid. The neighbour-sum axis is divided by 8 so both
// axes share disparity units and the principal diagonal is the identity line.
Histogram2D build_histogram(const DisparityMap& d2, double bin_width);

struct ThresholdResult {
  double t_r = 0.0;   // road-cluster mean
  double t_s = 0.0;   // t_r - delta_pd
  double mu1 = 0.0;   // pothole-side cluster mean
  double mu2 = 0.0;   // road-side cluster mean
  double excluded_fraction = 0.0;
  bool degenerate = false;  // fewer than two distinct diagonal values
};

// Adaptive road/pothole threshold: vectors off the diagonal by more than tau
// are excluded, the rest are projected onto the diagonal and split by exact
// contiguous 2-means.
ThresholdResult find_road_threshold(const Histogram2D& hist, double delta_pd,
                                    double tau = 3.0);

// Flood-fill labeling of a {0,1} mask; labels numbered in first-encounter scan
// order.
LabelMap connected_components(const LabelMap& mask, int connectivity = 8);

// Superpixels with pooled value below t_s, connected-component labeled, with
// border-touching, single-superpixel and sub-S^2 components discarded.
LabelMap detect_potholes(const DisparityMap& d3, const SuperpixelMap& sp,
                         const ThresholdResult& thr, int border_margin,
                         int min_superpixels, int connectivity = 8);

}  // namespace rpd

#endif
