#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpd/perspective.hpp"

using namespace rpd;

TEST_CASE("road_disparity_at evaluates the rotated line") {
  CHECK(road_disparity_at({10.0, 0.5, 0.0}, 77.0, 200.0) == doctest::Approx(110.0));
  CHECK(road_disparity_at({10.0, 0.5, M_PI / 2.0}, 20.0, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // High-precision reference for a0=8, a1=0.4, phi=0.05, (u,v)=(100,300).
  const double expected = 8.0 + 0.4 * (300.0 * std::cos(0.05) - 100.0 * std::sin(0.05));
  CHECK(road_disparity_at({8.0, 0.4, 0.05}, 100.0, 300.0) == doctest::Approx(expected));
  CHECK(expected == doctest::Approx(125.850864).epsilon(1e-6));
}

TEST_CASE("row shifts: zero roll is x-independent") {
  RowShiftTable t = compute_row_shifts({10.0, 0.5, 0.0}, 320, 6, 0.0);
  for (int v = 0; v < 6; ++v) CHECK(t.shifts[v] == doctest::Approx(10.0 + 0.5 * v));
}

TEST_CASE("row shifts: endpoint minimum under roll") {
  const double phi = std::asin(0.1);
  RowShiftTable t = compute_row_shifts({10.0, 0.5, phi}, 100, 1, 0.0);
  CHECK(t.shifts[0] == doctest::Approx(10.0 - 0.5 * 100.0 * 0.1));
}

TEST_CASE("row shifts clamp at zero") {
  RowShiftTable t = compute_row_shifts({2.0, 0.01, 0.0}, 100, 1, 5.0);
  CHECK(t.shifts[0] == 0.0);
}

TEST_CASE("warp: zero shift is the identity") {
  GrayImage img(2, 4);
  img << 1, 2, 3, 4, 5, 6, 7, 8;
  RowShiftTable t{{0.0, 0.0}, 0.0};
  WarpResult w = warp_right_image(img, t);
  CHECK((w.image == img).all());
  CHECK((w.in_view == 1).all());
}

TEST_CASE("warp: integer and fractional shifts") {
  GrayImage img(1, 4);
  img << 10, 20, 30, 40;

  WarpResult w1 = warp_right_image(img, {{1.0}, 0.0});
  CHECK(w1.image(0, 0) == 0.0f);
  CHECK(w1.in_view(0, 0) == 0);
  CHECK(w1.image(0, 1) == 10.0f);
  CHECK(w1.image(0, 2) == 20.0f);
  CHECK(w1.image(0, 3) == 30.0f);

  WarpResult w2 = warp_right_image(img, {{0.5}, 0.0});
  CHECK(w2.in_view(0, 0) == 0);
  CHECK(w2.image(0, 1) == doctest::Approx(15.0));
  CHECK(w2.image(0, 2) == doctest::Approx(25.0));
  CHECK(w2.image(0, 3) == doctest::Approx(35.0));
}

TEST_CASE("restore adds the row shift and keeps invalids") {
  DisparityMap d0 = DisparityMap::Constant(2, 3, 3.0f);
  d0(1, 2) = kInvalidDisparity;
  DisparityMap d1 = restore_disparity(d0, {{7.0, 7.0}, 0.0});
  CHECK(d1(0, 0) == 10.0f);
  CHECK(d1(1, 0) == 10.0f);
  CHECK(d1(1, 2) == kInvalidDisparity);
}

TEST_CASE("dimension mismatches are rejected") {
  GrayImage img(3, 4);
  img.setZero();
  CHECK_THROWS_AS(warp_right_image(img, {{0.0, 0.0}, 0.0}), std::invalid_argument);
  DisparityMap d(3, 4);
  d.setZero();
  CHECK_THROWS_AS(restore_disparity(d, {{0.0}, 0.0}), std::invalid_argument);
}

TEST_CASE("property: planar scene warps to constant delta_pt and restores exactly") {
  // True disparity equals the road model everywhere; after the shift the
  // residual is delta_pt plus the within-row variation left by the endpoint rule.
  const RoadModel model{12.0, 0.2, 0.01};
  const int w = 64, h = 32;
  const double delta_pt = 5.0;
  RowShiftTable t = compute_row_shifts(model, w, h, delta_pt);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double truth = road_disparity_at(model, u, v);
      const double residual = truth - t.shifts[v];
      CHECK(residual >= delta_pt - 1e-9);
      CHECK(residual <= delta_pt + std::abs(model.a1 * std::sin(model.phi)) * w + 1e-9);
    }

  DisparityMap d0(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      d0(v, u) = static_cast<float>(road_disparity_at(model, u, v) - t.shifts[v]);
  DisparityMap d1 = restore_disparity(d0, t);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      CHECK(d1(v, u) == doctest::Approx(road_disparity_at(model, u, v)).epsilon(1e-5));
}
