#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rpd/sgm.hpp"

using namespace rpd;

namespace {

// Independent scan-line recursion; memoized top-down evaluation of the
// aggregation formula, kept separate from the production implementation.
struct DpOracle {
  const CostVolume& raw;
  float lambda1, lambda2;
  int du, dv;
  std::vector<double> memo;
  std::vector<char> done;

  DpOracle(const CostVolume& raw_, float l1, float l2, int du_, int dv_)
      : raw(raw_), lambda1(l1), lambda2(l2), du(du_), dv(dv_),
        memo(raw.costs.size(), 0.0), done(raw.costs.size(), 0) {}

  std::size_t idx(int v, int u, int d) const {
    return (static_cast<std::size_t>(v) * raw.width + u) * raw.levels() + d;
  }

  double agg(int v, int u, int d) {
    const std::size_t i = idx(v, u, d);
    if (done[i]) return memo[i];
    done[i] = 1;
    const int pv = v - dv, pu = u - du;
    if (pv < 0 || pv >= raw.height || pu < 0 || pu >= raw.width) {
      return memo[i] = raw.at(v, u, d);
    }
    double prev_min = agg(pv, pu, 0);
    for (int k = 1; k < raw.levels(); ++k) prev_min = std::min(prev_min, agg(pv, pu, k));
    double best = agg(pv, pu, d);
    if (d > 0) best = std::min(best, agg(pv, pu, d - 1) + lambda1);
    if (d + 1 < raw.levels()) best = std::min(best, agg(pv, pu, d + 1) + lambda1);
    best = std::min(best, prev_min + lambda2);
    return memo[i] = raw.at(v, u, d) + best - prev_min;
  }
};

CostVolume oracle_aggregate(const CostVolume& raw, const SgmParams& params) {
  CostVolume total(raw.width, raw.height, raw.d_max);
  for (const auto& dir : params.directions) {
    DpOracle oracle(raw, params.lambda1, params.lambda2, dir[0], dir[1]);
    for (int v = 0; v < raw.height; ++v)
      for (int u = 0; u < raw.width; ++u)
        for (int d = 0; d <= raw.d_max; ++d)
          total.at(v, u, d) += static_cast<float>(oracle.agg(v, u, d));
  }
  return total;
}

CostVolume random_volume(int w, int h, int d_max, unsigned seed, int cost_max = 40) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> cost(0, cost_max);
  CostVolume volume(w, h, d_max);
  for (auto& c : volume.costs) c = static_cast<float>(cost(rng));
  return volume;
}

GrayImage textured_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> gray(0, 255);
  GrayImage img(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) img(v, u) = static_cast<float>(gray(rng));
  return img;
}

int argmin_d(const CostVolume& vol, int v, int u) {
  int best = 0;
  for (int d = 1; d <= vol.d_max; ++d)
    if (vol.at(v, u, d) < vol.at(v, u, best)) best = d;
  return best;
}

}  // namespace

TEST_CASE("census cost: identical constant images give zero in-range cost") {
  GrayImage img = GrayImage::Constant(8, 8, 100.0f);
  CostVolume vol = census_cost_volume(img, img, 3, 5);
  for (int v = 0; v < 8; ++v)
    for (int u = 3; u < 8; ++u)
      for (int d = 0; d <= 3; ++d) CHECK(vol.at(v, u, d) == 0.0f);
  CHECK(vol.at(0, 0, 1) == 24.0f);  // out-of-range sample carries maximum cost
}

TEST_CASE("census cost: integer shift recovered by per-pixel argmin") {
  GrayImage right = textured_image(32, 16, 3);
  GrayImage left(16, 32);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 32; ++u) left(v, u) = right(v, std::max(0, u - 2));
  CostVolume vol = census_cost_volume(left, right, 6, 5);
  for (int v = 2; v < 14; ++v)
    for (int u = 6; u < 30; ++u) CHECK(argmin_d(vol, v, u) == 2);
}

TEST_CASE("census cost: one differing comparison bit costs 1") {
  GrayImage left = GrayImage::Constant(9, 9, 10.0f);
  GrayImage right = left;
  right(4, 3) = 5.0f;  // darker than the centre at (4,4): one census bit flips
  CostVolume vol = census_cost_volume(left, right, 0, 5);
  CHECK(vol.at(4, 4, 0) == 1.0f);
}

TEST_CASE("aggregation equals the DP oracle: single direction, large penalties") {
  CostVolume row = random_volume(12, 1, 5, 11);
  SgmParams params;
  params.lambda1 = params.lambda2 = 1e6f;
  params.directions = {{{1, 0}}};
  CostVolume agg = aggregate_costs(row, params);
  CostVolume expected = oracle_aggregate(row, params);
  for (std::size_t i = 0; i < agg.costs.size(); ++i) CHECK(agg.costs[i] == expected.costs[i]);
}

TEST_CASE("aggregation equals the DP oracle: 4x4x4, 8 directions") {
  CostVolume vol = random_volume(4, 4, 3, 21);
  SgmParams params;
  params.lambda1 = 7.0f;
  params.lambda2 = 20.0f;
  CostVolume agg = aggregate_costs(vol, params);
  CostVolume expected = oracle_aggregate(vol, params);
  for (std::size_t i = 0; i < agg.costs.size(); ++i) CHECK(agg.costs[i] == expected.costs[i]);
}

TEST_CASE("zero penalties never change the per-pixel argmin") {
  CostVolume vol = random_volume(10, 6, 7, 31);
  // Break exact ties so the argmin comparison is well-defined.
  for (std::size_t i = 0; i < vol.costs.size(); ++i)
    vol.costs[i] = vol.costs[i] * 64.0f + static_cast<float>(i % 61);
  SgmParams params;
  params.lambda1 = params.lambda2 = 0.0f;
  CostVolume agg = aggregate_costs(vol, params);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 10; ++u) CHECK(argmin_d(agg, v, u) == argmin_d(vol, v, u));
}

TEST_CASE("adding a constant to every cost preserves argmins") {
  CostVolume vol = random_volume(8, 5, 6, 41);
  for (std::size_t i = 0; i < vol.costs.size(); ++i)
    vol.costs[i] = vol.costs[i] * 64.0f + static_cast<float>(i % 53);
  CostVolume shifted = vol;
  for (auto& c : shifted.costs) c += 9.0f;
  SgmParams params;
  CostVolume a = aggregate_costs(vol, params);
  CostVolume b = aggregate_costs(shifted, params);
  for (int v = 0; v < 5; ++v)
    for (int u = 0; u < 8; ++u) CHECK(argmin_d(a, v, u) == argmin_d(b, v, u));
}

TEST_CASE("parabola refinement") {
  auto make = [](std::initializer_list<float> costs_at_234) {
    CostVolume vol(1, 1, 6);
    const float filler[7] = {40, 30, 0, 0, 0, 31, 41};
    for (int d = 0; d <= 6; ++d) vol.at(0, 0, d) = filler[d];
    int d = 2;
    for (float c : costs_at_234) vol.at(0, 0, d++) = c;
    return vol;
  };

  DisparityMap sym = select_disparity(make({4, 2, 4}));
  CHECK(sym(0, 0) == doctest::Approx(3.0));

  DisparityMap skew = select_disparity(make({4, 2, 3}));
  CHECK(skew(0, 0) == doctest::Approx(3.1667).epsilon(1e-4));

  CostVolume at_zero(1, 1, 3);
  at_zero.at(0, 0, 0) = 1;
  at_zero.at(0, 0, 1) = 5;
  at_zero.at(0, 0, 2) = 6;
  at_zero.at(0, 0, 3) = 7;
  DisparityMap edge = select_disparity(at_zero);
  CHECK(edge(0, 0) == 0.0f);  // boundary: no refinement
}

TEST_CASE("property: refinement stays within half a pixel of the integer argmin") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    CostVolume vol = random_volume(6, 4, 8, 100 + seed, 1000);
    DisparityMap disp = select_disparity(vol);
    for (int v = 0; v < 4; ++v)
      for (int u = 0; u < 6; ++u) {
        if (!is_valid(disp(v, u))) continue;
        CHECK(std::abs(disp(v, u) - std::round(disp(v, u))) <= 0.5f);
        CHECK(std::abs(disp(v, u) - argmin_d(vol, v, u)) <= 0.5f);
      }
  }
}

TEST_CASE("match_pair: self-match with zero shifts is zero disparity") {
  GrayImage img = textured_image(64, 32, 77);
  PipelineConfig config;
  config.delta_pt = 0.0;
  MatchResult result = match_pair(img, img, RoadModel{}, config, 8);
  long valid = 0, near_zero = 0;
  for (int v = 0; v < 32; ++v)
    for (int u = 0; u < 64; ++u) {
      if (!is_valid(result.d0(v, u))) continue;
      ++valid;
      if (std::abs(result.d0(v, u)) <= 0.5f) ++near_zero;
    }
  CHECK(valid > 32 * 64 / 2);
  CHECK(near_zero == valid);
}

TEST_CASE("match_pair: textureless input is mostly invalidated") {
  GrayImage flat = GrayImage::Constant(48, 64, 128.0f);
  PipelineConfig config;
  config.delta_pt = 0.0;
  MatchResult result = match_pair(flat, flat, RoadModel{}, config, 8);
  long invalid = 0;
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u)
      if (!is_valid(result.d0(v, u))) ++invalid;
  CHECK(invalid >= static_cast<long>(0.9 * 48 * 64));
}

TEST_CASE("dimension and range errors") {
  GrayImage a = GrayImage::Zero(4, 8);
  GrayImage b = GrayImage::Zero(4, 9);
  CHECK_THROWS_AS(census_cost_volume(a, b, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(census_cost_volume(a, a, 8, 5), std::invalid_argument);
  CHECK_THROWS_AS(census_cost_volume(a, a, 2, 4), std::invalid_argument);
}
