#include "rpd/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

namespace rpd {
namespace {

Raster<float> values_or_zero(const DisparityMap& d2) {
  Raster<float> vals = d2;
  for (int v = 0; v < vals.rows(); ++v)
    for (int u = 0; u < vals.cols(); ++u)
      if (!is_valid(vals(v, u))) vals(v, u) = 0.0f;
  return vals;
}

// Squared forward-difference gradient used for seed perturbation.
double gradient_at(const Raster<float>& vals, int u, int v) {
  const int h = static_cast<int>(vals.rows());
  const int w = static_cast<int>(vals.cols());
  const double gu = vals(v, std::min(u + 1, w - 1)) - vals(v, u);
  const double gv = vals(std::min(v + 1, h - 1), u) - vals(v, u);
  return gu * gu + gv * gv;
}

void assign_pixels(const Raster<float>& vals, const std::vector<SuperpixelMap::Center>& centers,
                   double spacing, double compactness, LabelMap& labels) {
  const int h = static_cast<int>(vals.rows());
  const int w = static_cast<int>(vals.cols());
  Raster<double> best = Raster<double>::Constant(h, w, std::numeric_limits<double>::infinity());
  labels.setZero();
  const int win = static_cast<int>(std::ceil(spacing));
  const double spatial_weight = compactness * compactness / (spacing * spacing);

  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto& c = centers[k];
    const int cu = static_cast<int>(std::lround(c.cu));
    const int cv = static_cast<int>(std::lround(c.cv));
    const int v0 = std::max(0, cv - win), v1 = std::min(h - 1, cv + win);
    const int u0 = std::max(0, cu - win), u1 = std::min(w - 1, cu + win);
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u) {
        const double dval = vals(v, u) - c.value;
        const double du = u - c.cu, dv = v - c.cv;
        const double dist = dval * dval + (du * du + dv * dv) * spatial_weight;
        if (dist < best(v, u)) {
          best(v, u) = dist;
          labels(v, u) = static_cast<int>(k) + 1;
        }
      }
  }

  // Pixels outside every window (degenerate grids) fall back to the spatially
  // nearest center.
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (labels(v, u) != 0) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double du = u - centers[k].cu, dv = v - centers[k].cv;
        const double d = du * du + dv * dv;
        if (d < nearest) {
          nearest = d;
          labels(v, u) = static_cast<int>(k) + 1;
        }
      }
    }
}

void update_centers(const Raster<float>& vals, const LabelMap& labels,
                    std::vector<SuperpixelMap::Center>& centers) {
  std::vector<double> su(centers.size(), 0), sv(centers.size(), 0), sval(centers.size(), 0);
  std::vector<long> n(centers.size(), 0);
  for (int v = 0; v < labels.rows(); ++v)
    for (int u = 0; u < labels.cols(); ++u) {
      const int k = labels(v, u) - 1;
      if (k < 0) continue;
      su[static_cast<std::size_t>(k)] += u;
      sv[static_cast<std::size_t>(k)] += v;
      sval[static_cast<std::size_t>(k)] += vals(v, u);
      ++n[static_cast<std::size_t>(k)];
    }
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (n[k] == 0) continue;
    centers[k].cu = su[k] / n[k];
    centers[k].cv = sv[k] / n[k];
    centers[k].value = sval[k] / n[k];
  }
}

// Splits labels into connected pieces, keeps each label's largest piece, and
// grows the kept regions over the orphaned fragments. Every label survives and
// stays connected, so the cluster count is decided by the seeding alone.
void enforce_connectivity(LabelMap& labels) {
  const int h = static_cast<int>(labels.rows());
  const int w = static_cast<int>(labels.cols());
  LabelMap piece = LabelMap::Zero(h, w);
  std::vector<long> piece_size;
  std::vector<int> piece_label;
  const int dus[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dvs[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (piece(v, u) != 0) continue;
      const int id = static_cast<int>(piece_size.size()) + 1;
      const int lab = labels(v, u);
      long size = 0;
      std::deque<std::array<int, 2>> queue{{u, v}};
      piece(v, u) = id;
      while (!queue.empty()) {
        auto [pu, pv] = queue.front();
        queue.pop_front();
        ++size;
        for (int i = 0; i < 8; ++i) {
          const int nu = pu + dus[i], nv = pv + dvs[i];
          if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
          if (piece(nv, nu) == 0 && labels(nv, nu) == lab) {
            piece(nv, nu) = id;
            queue.push_back({nu, nv});
          }
        }
      }
      piece_size.push_back(size);
      piece_label.push_back(lab);
    }

  // Largest piece per label.
  std::map<int, int> main_piece;  // label -> piece id
  for (std::size_t i = 0; i < piece_size.size(); ++i) {
    auto it = main_piece.find(piece_label[i]);
    if (it == main_piece.end() ||
        piece_size[i] > piece_size[static_cast<std::size_t>(it->second - 1)])
      main_piece[piece_label[i]] = static_cast<int>(i) + 1;
  }
  std::vector<char> kept(piece_size.size(), 0);
  for (auto [lab, pid] : main_piece) kept[static_cast<std::size_t>(pid - 1)] = 1;

  // Grass-fire growth from the kept regions absorbs every orphan fragment and
  // keeps each surviving label connected.
  std::deque<std::array<int, 2>> frontier;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (kept[static_cast<std::size_t>(piece(v, u) - 1)]) {
        frontier.push_back({u, v});
      } else {
        labels(v, u) = 0;
      }
    }
  while (!frontier.empty()) {
    auto [pu, pv] = frontier.front();
    frontier.pop_front();
    for (int i = 0; i < 8; ++i) {
      const int nu = pu + dus[i], nv = pv + dvs[i];
      if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
      if (labels(nv, nu) == 0) {
        labels(nv, nu) = labels(pv, pu);
        frontier.push_back({nu, nv});
      }
    }
  }
}

}  // namespace

SuperpixelMap slic(const DisparityMap& d2, int p, double compactness, int iterations) {
  const int h = static_cast<int>(d2.rows());
  const int w = static_cast<int>(d2.cols());
  if (p < 4) throw std::invalid_argument("slic: p must be >= 4");
  if (p > w * h) throw std::invalid_argument("slic: p exceeds pixel count");

  const Raster<float> vals = values_or_zero(d2);
  SuperpixelMap sp;
  sp.spacing = std::sqrt(static_cast<double>(w) * h / p);

  // Seed grid sized so nu * nv tracks p closely even when the aspect ratio
  // fights the nominal spacing.
  const int nu = std::max(1, static_cast<int>(std::lround(
                                  std::sqrt(static_cast<double>(p) * w / h))));
  const int nv = std::max(1, static_cast<int>(std::lround(static_cast<double>(p) / nu)));
  const double su = static_cast<double>(w) / nu;
  const double sv = static_cast<double>(h) / nv;
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      int cu = static_cast<int>((i + 0.5) * su);
      int cv = static_cast<int>((j + 0.5) * sv);
      // Nudge to the lowest-gradient position in the 3x3 neighbourhood.
      double best = std::numeric_limits<double>::infinity();
      int bu = cu, bv = cv;
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int uu = std::clamp(cu + du, 0, w - 1);
          const int vv = std::clamp(cv + dv, 0, h - 1);
          const double g = gradient_at(vals, uu, vv);
          if (g < best) {
            best = g;
            bu = uu;
            bv = vv;
          }
        }
      sp.centers.push_back({static_cast<double>(bu), static_cast<double>(bv), vals(bv, bu)});
    }

  sp.labels = LabelMap::Zero(h, w);
  assign_pixels(vals, sp.centers, sp.spacing, compactness, sp.labels);
  for (int it = 0; it < iterations; ++it) {
    update_centers(vals, sp.labels, sp.centers);
    assign_pixels(vals, sp.centers, sp.spacing, compactness, sp.labels);
  }

  enforce_connectivity(sp.labels);

  // Compact labels to 1..count in scan order and rebuild centers.
  std::map<int, int> remap;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      auto [it, inserted] = remap.try_emplace(sp.labels(v, u),
                                              static_cast<int>(remap.size()) + 1);
      sp.labels(v, u) = it->second;
    }
  sp.count = static_cast<int>(remap.size());
  sp.centers.assign(static_cast<std::size_t>(sp.count), {});
  update_centers(vals, sp.labels, sp.centers);
  return sp;
}

DisparityMap pool_superpixels(const DisparityMap& d2, const SuperpixelMap& sp) {
  if (d2.rows() != sp.labels.rows() || d2.cols() != sp.labels.cols())
    throw std::invalid_argument("pool_superpixels: dimension mismatch");
  std::vector<double> sum(static_cast<std::size_t>(sp.count) + 1, 0.0);
  std::vector<long> n(static_cast<std::size_t>(sp.count) + 1, 0);
  for (int v = 0; v < d2.rows(); ++v)
    for (int u = 0; u < d2.cols(); ++u) {
      if (!is_valid(d2(v, u))) continue;
      sum[static_cast<std::size_t>(sp.labels(v, u))] += d2(v, u);
      ++n[static_cast<std::size_t>(sp.labels(v, u))];
    }
  DisparityMap d3(d2.rows(), d2.cols());
  for (int v = 0; v < d2.rows(); ++v)
    for (int u = 0; u < d2.cols(); ++u) {
      const auto k = static_cast<std::size_t>(sp.labels(v, u));
      d3(v, u) = n[k] > 0 ? static_cast<float>(sum[k] / n[k]) : kInvalidDisparity;
    }
  return d3;
}

Histogram2D build_histogram(const DisparityMap& d2, double bin_width) {
  if (bin_width <= 0) throw std::invalid_argument("build_histogram: bin_width must be > 0");
  const int h = static_cast<int>(d2.rows());
  const int w = static_cast<int>(d2.cols());

  std::vector<std::array<double, 2>> vectors;
  for (int v = 1; v + 1 < h; ++v)
    for (int u = 1; u + 1 < w; ++u) {
      if (!is_valid(d2(v, u))) continue;
      double sum = 0.0;
      bool ok = true;
      for (int dv = -1; dv <= 1 && ok; ++dv)
        for (int du = -1; du <= 1; ++du) {
          if (du == 0 && dv == 0) continue;
          if (!is_valid(d2(v + dv, u + du))) {
            ok = false;
            break;
          }
          sum += d2(v + dv, u + du);
        }
      if (ok) vectors.push_back({static_cast<double>(d2(v, u)), sum / 8.0});
    }

  Histogram2D hist;
  hist.bin_width = bin_width;
  if (vectors.empty()) {
    hist.counts = Raster<long>::Zero(0, 0);
    return hist;
  }
  double lo = vectors[0][0], hi = vectors[0][0];
  for (const auto& g : vectors) {
    lo = std::min({lo, g[0], g[1]});
    hi = std::max({hi, g[0], g[1]});
  }
  hist.origin = std::floor(lo / bin_width) * bin_width;
  const auto bin_of = [&](double x) {
    return static_cast<Eigen::Index>(std::floor((x - hist.origin) / bin_width));
  };
  const Eigen::Index n = bin_of(hi) + 1;
  hist.counts = Raster<long>::Zero(n, n);
  for (const auto& g : vectors) {
    ++hist.counts(std::min(bin_of(g[0]), n - 1), std::min(bin_of(g[1]), n - 1));
    ++hist.total;
  }
  return hist;
}

ThresholdResult find_road_threshold(const Histogram2D& hist, double delta_pd, double tau) {
  // Diagonal projection of the kept bins: (value, weight), ascending in value.
  std::map<double, long> diag;
  long excluded = 0;
  for (Eigen::Index i = 0; i < hist.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < hist.counts.cols(); ++j) {
      const long c = hist.counts(i, j);
      if (c == 0) continue;
      const double g1 = hist.center(i), g2 = hist.center(j);
      if (std::abs(g1 - g2) > tau) {
        excluded += c;
        continue;
      }
      diag[(g1 + g2) / 2.0] += c;
    }
  if (diag.empty()) throw std::runtime_error("find_road_threshold: all vectors excluded");

  ThresholdResult res;
  res.excluded_fraction = hist.total > 0 ? static_cast<double>(excluded) / hist.total : 0.0;

  std::vector<double> x;
  std::vector<long> w;
  for (auto [value, count] : diag) {
    x.push_back(value);
    w.push_back(count);
  }
  const std::size_t m = x.size();
  if (m < 2) {
    res.degenerate = true;
    res.mu1 = res.mu2 = res.t_r = x[0];
    res.t_s = res.t_r - delta_pd;
    return res;
  }

  // Exact 2-means: the 1-D optimum is a contiguous split, so scan them all.
  std::vector<double> pw(m + 1, 0), pwx(m + 1, 0), pwxx(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    pw[i + 1] = pw[i] + w[i];
    pwx[i + 1] = pwx[i] + w[i] * x[i];
    pwxx[i + 1] = pwxx[i] + w[i] * x[i] * x[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // [a, b)
    const double n = pw[b] - pw[a];
    const double s = pwx[b] - pwx[a];
    const double ss = pwxx[b] - pwxx[a];
    return ss - s * s / n;
  };
  std::size_t best_split = 1;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < m; ++s) {
    const double e = sse(0, s) + sse(s, m);
    if (e < best_sse) {
      best_sse = e;
      best_split = s;
    }
  }
  res.mu1 = (pwx[best_split] - pwx[0]) / (pw[best_split] - pw[0]);
  res.mu2 = (pwx[m] - pwx[best_split]) / (pw[m] - pw[best_split]);
  res.t_r = res.mu2;
  res.t_s = res.t_r - delta_pd;
  return res;
}

LabelMap connected_components(const LabelMap& mask, int connectivity) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  const int n_dirs = connectivity == 4 ? 4 : 8;
  const int dus[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dvs[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  LabelMap out = LabelMap::Zero(h, w);
  int next = 0;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (mask(v, u) == 0 || out(v, u) != 0) continue;
      ++next;
      std::deque<std::array<int, 2>> queue{{u, v}};
      out(v, u) = next;
      while (!queue.empty()) {
        auto [pu, pv] = queue.front();
        queue.pop_front();
        for (int i = 0; i < n_dirs; ++i) {
          const int nu = pu + dus[i], nv = pv + dvs[i];
          if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
          if (mask(nv, nu) != 0 && out(nv, nu) == 0) {
            out(nv, nu) = next;
            queue.push_back({nu, nv});
          }
        }
      }
    }
  return out;
}

LabelMap detect_potholes(const DisparityMap& d3, const SuperpixelMap& sp,
                         const ThresholdResult& thr, int border_margin,
                         int min_superpixels, int connectivity) {
  const int h = static_cast<int>(d3.rows());
  const int w = static_cast<int>(d3.cols());
  LabelMap mask = LabelMap::Zero(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (is_valid(d3(v, u)) && d3(v, u) < thr.t_s) mask(v, u) = 1;

  const LabelMap comp = connected_components(mask, connectivity);
  int n_comp = comp.maxCoeff();
  std::vector<char> touches_border(static_cast<std::size_t>(n_comp) + 1, 0);
  std::vector<long> area(static_cast<std::size_t>(n_comp) + 1, 0);
  std::vector<std::map<int, char>> sp_labels(static_cast<std::size_t>(n_comp) + 1);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const int c = comp(v, u);
      if (c == 0) continue;
      ++area[static_cast<std::size_t>(c)];
      sp_labels[static_cast<std::size_t>(c)][sp.labels(v, u)] = 1;
      if (u < border_margin || u >= w - border_margin || v < border_margin ||
          v >= h - border_margin)
        touches_border[static_cast<std::size_t>(c)] = 1;
    }

  const long min_area = static_cast<long>(sp.spacing * sp.spacing);
  std::vector<int> relabel(static_cast<std::size_t>(n_comp) + 1, 0);
  LabelMap out = LabelMap::Zero(h, w);
  int next = 0;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const int c = comp(v, u);
      if (c == 0) continue;
      const auto ci = static_cast<std::size_t>(c);
      if (touches_border[ci] || area[ci] < min_area ||
          static_cast<int>(sp_labels[ci].size()) < min_superpixels)
        continue;
      if (relabel[ci] == 0) relabel[ci] = ++next;
      out(v, u) = relabel[ci];
    }
  return out;
}

}  // namespace rpd
