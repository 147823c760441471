#ifndef RPD_EVALUATION_HPP
#define RPD_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rpd/types.hpp"

namespace rpd {

// Percentage of pixels with |est - gt| > eps, over pixels valid in both maps.
inline double pep(const DisparityMap& est, const DisparityMap& gt, double eps) {
  if (est.rows() != gt.rows() || est.cols() != gt.cols())
    throw std::invalid_argument("pep: dimension mismatch");
  long q = 0, bad = 0;
  for (int v = 0; v < est.rows(); ++v)
    for (int u = 0; u < est.cols(); ++u) {
      if (!is_valid(est(v, u)) || !is_valid(gt(v, u))) continue;
      ++q;
      if (std::abs(static_cast<double>(est(v, u)) - gt(v, u)) > eps) ++bad;
    }
  if (q == 0) throw std::runtime_error("pep: no overlapping valid pixels");
  return 100.0 * static_cast<double>(bad) / static_cast<double>(q);
}

inline double rmse(const DisparityMap& est, const DisparityMap& gt) {
  if (est.rows() != gt.rows() || est.cols() != gt.cols())
    throw std::invalid_argument("rmse: dimension mismatch");
  long q = 0;
  double sum = 0.0;
  for (int v = 0; v < est.rows(); ++v)
    for (int u = 0; u < est.cols(); ++u) {
      if (!is_valid(est(v, u)) || !is_valid(gt(v, u))) continue;
      ++q;
      const double e = static_cast<double>(est(v, u)) - gt(v, u);
      sum += e * e;
    }
  if (q == 0) throw std::runtime_error("rmse: no overlapping valid pixels");
  return std::sqrt(sum / static_cast<double>(q));
}

struct ConfusionCounts {
  long n_tp = 0, n_fp = 0, n_fn = 0, n_tn = 0;
  long total() const { return n_tp + n_fp + n_fn + n_tn; }
};

struct PixelMetrics {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double fscore = 0.0;
  bool degenerate_precision = false;  // 0/0, reported as 0
  bool degenerate_recall = false;
};

inline double fscore(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

// Nonzero = pothole in both maps; all pixels evaluated.
inline PixelMetrics pixel_metrics(const LabelMap& pred, const LabelMap& gt_mask) {
  if (pred.rows() != gt_mask.rows() || pred.cols() != gt_mask.cols())
    throw std::invalid_argument("pixel_metrics: dimension mismatch");
  PixelMetrics m;
  for (int v = 0; v < pred.rows(); ++v)
    for (int u = 0; u < pred.cols(); ++u) {
      const bool p = pred(v, u) != 0, g = gt_mask(v, u) != 0;
      if (p && g) ++m.counts.n_tp;
      else if (p) ++m.counts.n_fp;
      else if (g) ++m.counts.n_fn;
      else ++m.counts.n_tn;
    }
  const auto& c = m.counts;
  m.degenerate_precision = c.n_tp + c.n_fp == 0;
  m.degenerate_recall = c.n_tp + c.n_fn == 0;
  m.precision = m.degenerate_precision ? 0.0 : static_cast<double>(c.n_tp) / (c.n_tp + c.n_fp);
  m.recall = m.degenerate_recall ? 0.0 : static_cast<double>(c.n_tp) / (c.n_tp + c.n_fn);
  m.accuracy = c.total() > 0 ? static_cast<double>(c.n_tp + c.n_tn) / c.total() : 0.0;
  m.fscore = fscore(m.precision, m.recall);
  return m;
}

struct InstanceReport {
  int correct = 0;
  int incorrect = 0;
  int misdetection = 0;  // unmatched ground-truth instances
};

// Greedy one-to-one matching by descending IoU; a prediction counts as correct
// when its match reaches iou_min.
inline InstanceReport instance_metrics(const LabelMap& pred, const LabelMap& gt_instances,
                                       double iou_min = 0.5) {
  if (pred.rows() != gt_instances.rows() || pred.cols() != gt_instances.cols())
    throw std::invalid_argument("instance_metrics: dimension mismatch");
  const int np = pred.maxCoeff();
  const int ng = gt_instances.maxCoeff();
  std::vector<long> area_p(static_cast<std::size_t>(np) + 1, 0);
  std::vector<long> area_g(static_cast<std::size_t>(ng) + 1, 0);
  std::vector<std::vector<long>> inter(static_cast<std::size_t>(np) + 1,
                                       std::vector<long>(static_cast<std::size_t>(ng) + 1, 0));
  for (int v = 0; v < pred.rows(); ++v)
    for (int u = 0; u < pred.cols(); ++u) {
      const int p = pred(v, u), g = gt_instances(v, u);
      if (p > 0) ++area_p[static_cast<std::size_t>(p)];
      if (g > 0) ++area_g[static_cast<std::size_t>(g)];
      if (p > 0 && g > 0) ++inter[static_cast<std::size_t>(p)][static_cast<std::size_t>(g)];
    }

  struct Pair {
    double iou;
    int p, g;
  };
  std::vector<Pair> pairs;
  for (int p = 1; p <= np; ++p)
    for (int g = 1; g <= ng; ++g) {
      const long i = inter[static_cast<std::size_t>(p)][static_cast<std::size_t>(g)];
      if (i == 0) continue;
      const double iou = static_cast<double>(i) /
                         static_cast<double>(area_p[static_cast<std::size_t>(p)] +
                                             area_g[static_cast<std::size_t>(g)] - i);
      pairs.push_back({iou, p, g});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.p != b.p) return a.p < b.p;
    return a.g < b.g;
  });

  std::vector<char> used_p(static_cast<std::size_t>(np) + 1, 0);
  std::vector<char> used_g(static_cast<std::size_t>(ng) + 1, 0);
  InstanceReport rep;
  for (const auto& pr : pairs) {
    if (pr.iou < iou_min) break;
    if (used_p[static_cast<std::size_t>(pr.p)] || used_g[static_cast<std::size_t>(pr.g)])
      continue;
    used_p[static_cast<std::size_t>(pr.p)] = 1;
    used_g[static_cast<std::size_t>(pr.g)] = 1;
    ++rep.correct;
  }
  for (int p = 1; p <= np; ++p)
    if (!used_p[static_cast<std::size_t>(p)]) ++rep.incorrect;
  for (int g = 1; g <= ng; ++g)
    if (!used_g[static_cast<std::size_t>(g)]) ++rep.misdetection;
  return rep;
}

}  // namespace rpd

#endif
