#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "rpd/road_geometry.hpp"

using namespace rpd;

namespace {

RoadObservations synth_observations(const RoadModel& model, int k, double noise_sigma,
                                    unsigned seed, int width = 640, int height = 480) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uu(0.0, width - 1.0);
  std::uniform_real_distribution<double> vv(0.0, height - 1.0);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  RoadObservations obs;
  obs.d.resize(k);
  obs.u.resize(k);
  obs.v.resize(k);
  for (int i = 0; i < k; ++i) {
    obs.u[i] = uu(rng);
    obs.v[i] = vv(rng);
    obs.d[i] = road_disparity_at(model, obs.u[i], obs.v[i]);
    if (noise_sigma > 0) obs.d[i] += noise(rng);
  }
  return obs;
}

// Generic least-squares reference through Eigen's dense solver; independent of
// the closed-form route under test.
LineFit dense_oracle(const RoadObservations& obs, double phi) {
  Eigen::MatrixXd T(obs.count(), 2);
  T.col(0).setOnes();
  T.col(1) = std::cos(phi) * obs.v - std::sin(phi) * obs.u;
  Eigen::Vector2d a = T.colPivHouseholderQr().solve(obs.d);
  LineFit fit;
  fit.model = {a[0], a[1], phi};
  fit.e0min = (obs.d - T * a).squaredNorm();
  return fit;
}

double grid_search_phi(const RoadObservations& obs, double lo, double hi, double step) {
  double best_phi = lo, best_e = std::numeric_limits<double>::infinity();
  for (double phi = lo; phi <= hi; phi += step) {
    const double e = fit_line(obs, phi).e0min;
    if (e < best_e) {
      best_e = e;
      best_phi = phi;
    }
  }
  return best_phi;
}

constexpr double kDeg = M_PI / 180.0;

}  // namespace

TEST_CASE("fit_line recovers exact lines") {
  RoadObservations obs;
  obs.d.resize(5);
  obs.u.resize(5);
  obs.v.resize(5);
  for (int i = 0; i < 5; ++i) {
    obs.u[i] = 10.0 * i;
    obs.v[i] = 40.0 * i;
    obs.d[i] = 5.0 + 0.1 * obs.v[i];
  }
  LineFit fit = fit_line(obs, 0.0);
  CHECK(fit.model.a0 == doctest::Approx(5.0));
  CHECK(fit.model.a1 == doctest::Approx(0.1));
  CHECK(fit.e0min == doctest::Approx(0.0).epsilon(1e-12));

  obs.d.setConstant(7.0);
  LineFit flat = fit_line(obs, 0.0);
  CHECK(flat.model.a0 == doctest::Approx(7.0));
  CHECK(flat.model.a1 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_line matches the dense oracle on random observations") {
  RoadModel truth{20.0, 0.15, 0.03};
  RoadObservations obs = synth_observations(truth, 50, 0.3, 5);
  LineFit fit = fit_line(obs, 0.03);
  LineFit oracle = dense_oracle(obs, 0.03);
  CHECK(fit.model.a0 == doctest::Approx(oracle.model.a0).epsilon(1e-9));
  CHECK(fit.model.a1 == doctest::Approx(oracle.model.a1).epsilon(1e-9));
  CHECK(fit.e0min == doctest::Approx(oracle.e0min).epsilon(1e-9));
}

TEST_CASE("fit_line residual equals the direct recomputation") {
  RoadObservations obs = synth_observations({8.0, 0.09, -0.02}, 300, 0.25, 9);
  LineFit fit = fit_line(obs, -0.015);
  double direct = 0.0;
  for (Eigen::Index i = 0; i < obs.count(); ++i) {
    const double r = obs.d[i] - road_disparity_at(fit.model, obs.u[i], obs.v[i]);
    direct += r * r;
  }
  CHECK(fit.e0min == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("e0min is invariant under a constant disparity offset") {
  RoadObservations obs = synth_observations({8.0, 0.09, 0.01}, 200, 0.2, 13);
  LineFit base = fit_line(obs, 0.01);
  obs.d.array() += 3.5;
  LineFit shifted = fit_line(obs, 0.01);
  CHECK(shifted.model.a0 == doctest::Approx(base.model.a0 + 3.5).epsilon(1e-9));
  CHECK(shifted.model.a1 == doctest::Approx(base.model.a1).epsilon(1e-9));
  CHECK(shifted.e0min == doctest::Approx(base.e0min).epsilon(1e-6));
}

TEST_CASE("fit_line rejects degenerate geometry") {
  RoadObservations obs;
  obs.d = Eigen::VectorXd::Constant(4, 3.0);
  obs.u = Eigen::VectorXd::Constant(4, 10.0);
  obs.v = Eigen::VectorXd::Constant(4, 20.0);  // all in one rotated row
  CHECK_THROWS_AS(fit_line(obs, 0.0), std::runtime_error);
  RoadObservations few;
  few.d.resize(2);
  few.u.resize(2);
  few.v.resize(2);
  CHECK_THROWS_AS(fit_line(few, 0.0), std::invalid_argument);
}

TEST_CASE("estimate_roll recovers the true roll angle") {
  SUBCASE("zero roll, noiseless") {
    RoadObservations obs = synth_observations({20.0, 0.3, 0.0}, 2000, 0.0, 17);
    RoadModel m = estimate_roll(obs, -15 * kDeg, 15 * kDeg, 1e-4);
    CHECK(std::abs(m.phi) <= 1e-4);
  }
  SUBCASE("2 degrees, noiseless, against grid oracle") {
    RoadObservations obs = synth_observations({20.0, 0.3, 2.0 * kDeg}, 2000, 0.0, 19);
    RoadModel m = estimate_roll(obs, -15 * kDeg, 15 * kDeg, 1e-4);
    CHECK(std::abs(m.phi - 2.0 * kDeg) <= 0.01 * kDeg);
    const double oracle = grid_search_phi(obs, 1.0 * kDeg, 3.0 * kDeg, 0.001 * kDeg);
    CHECK(std::abs(m.phi - oracle) <= 0.01 * kDeg);
  }
  SUBCASE("-3 degrees with noise") {
    RoadObservations obs = synth_observations({20.0, 0.3, -3.0 * kDeg}, 10000, 0.1, 23);
    RoadModel m = estimate_roll(obs, -15 * kDeg, 15 * kDeg, 1e-4);
    CHECK(std::abs(m.phi - (-3.0 * kDeg)) <= 0.1 * kDeg);
    const double oracle = grid_search_phi(obs, -5.0 * kDeg, -1.0 * kDeg, 0.002 * kDeg);
    CHECK(std::abs(m.phi - oracle) <= 0.05 * kDeg);
  }
}

TEST_CASE("fit_road trims pothole outliers") {
  RoadModel truth{18.0, 0.12, 0.01};
  RoadObservations obs = synth_observations(truth, 4000, 0.05, 29);
  // A block of pothole-like samples 3 px below the surface.
  for (int i = 0; i < 300; ++i) obs.d[i] -= 3.0;
  RoadFit fit = fit_road(obs, 15 * kDeg, 1e-4);
  CHECK(fit.used < obs.count());
  CHECK(fit.model.a0 == doctest::Approx(truth.a0).epsilon(0.02));
  CHECK(fit.model.a1 == doctest::Approx(truth.a1).epsilon(0.02));
}

TEST_CASE("sample_observations counts and caps") {
  DisparityMap full = DisparityMap::Constant(10, 10, 4.0f);
  CHECK(sample_observations(full).count() == 100);

  DisparityMap sparse = DisparityMap::Constant(10, 10, kInvalidDisparity);
  sparse(0, 0) = 1.0f;
  sparse(5, 5) = 2.0f;
  CHECK_THROWS_AS(sample_observations(sparse), std::runtime_error);

  DisparityMap big = DisparityMap::Constant(1000, 1000, 4.0f);
  CHECK(sample_observations(big).count() == 100000);
}

TEST_CASE("transform_disparity") {
  const RoadModel model{10.0, 0.1, 0.02};
  DisparityMap d1(20, 30);
  for (int v = 0; v < 20; ++v)
    for (int u = 0; u < 30; ++u)
      d1(v, u) = static_cast<float>(road_disparity_at(model, u, v));

  SUBCASE("exact surface maps to delta_dt") {
    TransformResult r = transform_disparity(d1, model, 30.0);
    for (int v = 0; v < 20; ++v)
      for (int u = 0; u < 30; ++u) CHECK(r.d2(v, u) == doctest::Approx(30.0).epsilon(1e-5));
    CHECK(r.clamped == 0);
  }
  SUBCASE("pothole pixels drop below delta_dt") {
    d1(5, 5) -= 2.0f;
    TransformResult r = transform_disparity(d1, model, 30.0);
    CHECK(r.d2(5, 5) == doctest::Approx(28.0).epsilon(1e-5));
  }
  SUBCASE("invalid pixels stay invalid, negatives clamp and count") {
    d1(0, 0) = kInvalidDisparity;
    d1(1, 1) = 0.0f;  // far below the surface
    TransformResult r = transform_disparity(d1, model, 5.0);
    CHECK(r.d2(0, 0) == kInvalidDisparity);
    CHECK(r.d2(1, 1) == 0.0f);
    CHECK(r.clamped >= 1);
  }
  SUBCASE("adding the surface back reproduces d1") {
    TransformResult r = transform_disparity(d1, model, 30.0);
    for (int v = 0; v < 20; ++v)
      for (int u = 0; u < 30; ++u) {
        const double back = r.d2(v, u) + road_disparity_at(model, u, v) - 30.0;
        CHECK(back == doctest::Approx(d1(v, u)).epsilon(1e-5));
      }
  }
}

TEST_CASE("reproject") {
  StereoRig rig{700.0, 0.12, 320.0, 240.0};
  DisparityMap d = DisparityMap::Constant(2, 2, kInvalidDisparity);
  d(0, 0) = 7.0f;
  PointCloud cloud = reproject(d, rig);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud[0].z == doctest::Approx(12.0));

  DisparityMap centre = DisparityMap::Constant(481, 641, kInvalidDisparity);
  centre(240, 320) = 7.0f;
  PointCloud on_axis = reproject(centre, rig);
  REQUIRE(on_axis.size() == 1);
  CHECK(on_axis[0].x == doctest::Approx(0.0));
  CHECK(on_axis[0].y == doctest::Approx(0.0));

  DisparityMap zero = DisparityMap::Constant(2, 2, 0.0f);
  CHECK(reproject(zero, rig).empty());
}

TEST_CASE("closest_distance_error") {
  PointCloud a = {{0, 0, 1}};
  CHECK(closest_distance_error(a, a) == doctest::Approx(0.0));

  PointCloud b = {{0, 0, 1.002f}};
  CHECK(closest_distance_error(b, a) == doctest::Approx(0.002).epsilon(1e-4));

  std::mt19937 rng(31);
  std::uniform_real_distribution<float> coord(-1.0f, 1.0f);
  PointCloud truth;
  for (int i = 0; i < 100; ++i) truth.push_back({coord(rng), coord(rng), coord(rng) + 2.0f});
  PointCloud test = truth;
  for (auto& p : test) p.x += 0.003f;
  const double e = closest_distance_error(test, truth);
  CHECK(e <= 0.003 + 1e-6);  // float coordinates round the shift slightly

  // Brute-force all-pairs reference.
  double sum = 0.0;
  for (const auto& p : test) {
    double best = 1e30;
    for (const auto& g : truth) {
      const double dx = p.x - g.x, dy = p.y - g.y, dz = p.z - g.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum += best;
  }
  CHECK(e == doctest::Approx(std::sqrt(sum / test.size())).epsilon(1e-12));

  CHECK_THROWS_AS(closest_distance_error({}, a), std::invalid_argument);
}

TEST_CASE("ply round trip") {
  PointCloud cloud = {{1.5f, -2.25f, 3.0f}, {0.0f, 0.5f, 9.75f}};
  const auto path = std::filesystem::temp_directory_path() / "rpd_test_cloud.ply";
  save_ply(cloud, path.string());
  PointCloud back = load_ply(path.string());
  REQUIRE(back.size() == 2);
  CHECK(back[1].z == doctest::Approx(9.75));
}
