#include "rpd/road_geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rpd {

LineFit fit_line(const RoadObservations& obs, double phi) {
  const Eigen::Index k = obs.count();
  if (k < 3) throw std::invalid_argument("fit_line: need at least 3 observations");

  const double c = std::cos(phi), s = std::sin(phi);
  const Eigen::VectorXd t = c * obs.v - s * obs.u;  // second column of T(phi)

  // Normal equations of the 2-column system, solved in closed form.
  const double kk = static_cast<double>(k);
  const double st = t.sum();
  const double stt = t.squaredNorm();
  const double sd = obs.d.sum();
  const double std_ = obs.d.dot(t);

  const double det = kk * stt - st * st;
  const double scale = std::max(kk * stt, 1.0);
  if (std::abs(det) < 1e-12 * scale)
    throw std::runtime_error("fit_line: degenerate observations (singular normal matrix)");

  LineFit fit;
  fit.model.phi = phi;
  fit.model.a0 = (stt * sd - st * std_) / det;
  fit.model.a1 = (kk * std_ - st * sd) / det;
  // Residual form of d'd - d'T(T'T)^-1 T'd; avoids the cancellation the
  // expanded expression suffers when the fit is near-exact.
  fit.e0min = (obs.d.array() - fit.model.a0 - fit.model.a1 * t.array()).matrix().squaredNorm();
  return fit;
}

RoadModel estimate_roll(const RoadObservations& obs, double bracket_lo, double bracket_hi,
                        double tol) {
  if (tol <= 0) throw std::invalid_argument("estimate_roll: tol must be > 0");
  auto energy = [&obs](double phi) { return fit_line(obs, phi).e0min; };

  constexpr double kInvGolden = 0.6180339887498949;
  double a = bracket_lo, b = bracket_hi;
  double x1 = b - kInvGolden * (b - a);
  double x2 = a + kInvGolden * (b - a);
  double f1 = energy(x1);
  double f2 = energy(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvGolden * (b - a);
      f1 = energy(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvGolden * (b - a);
      f2 = energy(x2);
    }
  }
  return fit_line(obs, 0.5 * (a + b)).model;
}

RoadFit fit_road(const RoadObservations& obs, double bracket, double tol) {
  RoadModel m = estimate_roll(obs, -bracket, bracket, tol);
  LineFit first = fit_line(obs, m.phi);

  const Eigen::Index k = obs.count();
  const double rms = std::sqrt(first.e0min / static_cast<double>(k));
  RoadFit out{first.model, first.e0min, k};
  if (rms <= 0) return out;

  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double r = obs.d[i] - road_disparity_at(first.model, obs.u[i], obs.v[i]);
    if (std::abs(r) <= 3.0 * rms) keep.push_back(i);
  }
  if (static_cast<Eigen::Index>(keep.size()) < 3 ||
      static_cast<Eigen::Index>(keep.size()) == k)
    return out;

  RoadObservations trimmed;
  trimmed.d.resize(static_cast<Eigen::Index>(keep.size()));
  trimmed.u.resize(trimmed.d.size());
  trimmed.v.resize(trimmed.d.size());
  for (Eigen::Index i = 0; i < trimmed.d.size(); ++i) {
    trimmed.d[i] = obs.d[keep[static_cast<std::size_t>(i)]];
    trimmed.u[i] = obs.u[keep[static_cast<std::size_t>(i)]];
    trimmed.v[i] = obs.v[keep[static_cast<std::size_t>(i)]];
  }
  RoadModel m2 = estimate_roll(trimmed, -bracket, bracket, tol);
  LineFit second = fit_line(trimmed, m2.phi);
  return RoadFit{second.model, second.e0min, trimmed.d.size()};
}

RoadObservations sample_observations(const DisparityMap& d1, std::optional<RectRoi> roi,
                                     Eigen::Index cap) {
  const int h = static_cast<int>(d1.rows());
  const int w = static_cast<int>(d1.cols());
  RectRoi r = roi.value_or(RectRoi{0, 0, w, h});
  r.u0 = std::clamp(r.u0, 0, w);
  r.v0 = std::clamp(r.v0, 0, h);
  r.width = std::clamp(r.width, 0, w - r.u0);
  r.height = std::clamp(r.height, 0, h - r.v0);

  std::vector<std::array<int, 2>> valid;
  for (int v = r.v0; v < r.v0 + r.height; ++v)
    for (int u = r.u0; u < r.u0 + r.width; ++u)
      if (is_valid(d1(v, u))) valid.push_back({u, v});

  const Eigen::Index n = static_cast<Eigen::Index>(valid.size());
  if (n < 3) throw std::runtime_error("sample_observations: fewer than 3 valid pixels");

  const Eigen::Index k = std::min(n, cap);
  RoadObservations obs;
  obs.d.resize(k);
  obs.u.resize(k);
  obs.v.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    // Uniform fixed-stride pick: floor(i * n / k) is exact and deterministic.
    const auto& p = valid[static_cast<std::size_t>(i * n / k)];
    obs.u[i] = p[0];
    obs.v[i] = p[1];
    obs.d[i] = d1(p[1], p[0]);
  }
  return obs;
}

TransformResult transform_disparity(const DisparityMap& d1, const RoadModel& model,
                                    double delta_dt) {
  TransformResult out;
  out.d2 = d1;
  for (int v = 0; v < d1.rows(); ++v)
    for (int u = 0; u < d1.cols(); ++u) {
      if (!is_valid(d1(v, u))) continue;
      double d2 = d1(v, u) - road_disparity_at(model, u, v) + delta_dt;
      if (d2 < 0) {
        d2 = 0;
        ++out.clamped;
      }
      out.d2(v, u) = static_cast<float>(d2);
    }
  return out;
}

PointCloud reproject(const DisparityMap& d1, const StereoRig& rig) {
  if (rig.focal <= 0 || rig.baseline <= 0) throw std::invalid_argument("reproject: bad rig");
  PointCloud cloud;
  for (int v = 0; v < d1.rows(); ++v)
    for (int u = 0; u < d1.cols(); ++u) {
      const float d = d1(v, u);
      if (!is_valid(d) || d <= 0.0f) continue;
      const double z = rig.focal * rig.baseline / d;
      cloud.push_back({static_cast<float>((u - rig.cu) * z / rig.focal),
                       static_cast<float>((v - rig.cv) * z / rig.focal),
                       static_cast<float>(z)});
    }
  return cloud;
}

PointCloud reproject_masked(const DisparityMap& d1, const LabelMap& labels, int label,
                            const StereoRig& rig) {
  DisparityMap masked = DisparityMap::Constant(d1.rows(), d1.cols(), kInvalidDisparity);
  for (int v = 0; v < d1.rows(); ++v)
    for (int u = 0; u < d1.cols(); ++u)
      if (labels(v, u) == label) masked(v, u) = d1(v, u);
  return reproject(masked, rig);
}

double closest_distance_error(const PointCloud& test, const PointCloud& truth) {
  if (test.empty() || truth.empty())
    throw std::invalid_argument("closest_distance_error: empty cloud");
  double sum = 0.0;
  for (const auto& p : test) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : truth) {
      const double dx = p.x - g.x, dy = p.y - g.y, dz = p.z - g.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum += best;
  }
  return std::sqrt(sum / static_cast<double>(test.size()));
}

void save_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : cloud) out << p.x << " " << p.y << " " << p.z << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("not found: " + path);
  std::string line;
  std::size_t n = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      ss >> what >> n;
    } else if (tok == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("bad PLY header: " + path);
  PointCloud cloud;
  cloud.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point3 p;
    if (!(in >> p.x >> p.y >> p.z)) throw std::runtime_error("truncated PLY: " + path);
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace rpd
