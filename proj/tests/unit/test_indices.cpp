#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>

#include "singtrace/indices.hpp"
#include "support/oracles.hpp"

using namespace singtrace;
using Catch::Approx;

namespace {

const double E = std::numbers::e;

EstimatorConfig estimate() {
  EstimatorConfig c;
  c.force_estimate = true;
  return c;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidInput;
}

/// Flats and jumps on a finite horizon: lower index below 1, upper index infinite.
GFunction oscillating() {
  return GFunction::step({1, 2, 10, 11, 22, 23, 30, 31}, {0, 1, 5, 6, 12, 13, 20, 21, 30}, 40.0);
}

}  // namespace

TEST_CASE("exact indices of the closed-form families", "[indices]") {
  auto r = matuszewska(EigenvalueFunction::power_law(2.0, 1.0));
  CHECK(r.mode == IndexMode::Exact);
  CHECK(r.delta_lower == 0.5);
  CHECK(r.delta_upper == 0.5);
  r = matuszewska(EigenvalueFunction::power_log({1, 0, 1, E}));
  CHECK(r.delta_lower == kInf);
  CHECK(r.delta_upper == kInf);
  r = matuszewska(EigenvalueFunction::exponential({}));
  CHECK(r.delta_lower == 0.0);
  CHECK(r.delta_upper == 0.0);
  r = matuszewska(EigenvalueFunction::step({0, 1}, {1}));
  CHECK(r.finite_rank);
  CHECK(r.delta_lower == 0.0);
}

TEST_CASE("estimated indices of power laws", "[indices]") {
  for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = matuszewska(EigenvalueFunction::power_law(p), estimate());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.mode == IndexMode::Estimated);
    CHECK(r.delta_lower == Approx(1.0 / p).margin(0.02));
    CHECK(r.delta_upper == Approx(1.0 / p).margin(0.02));
    CHECK(r.delta_lower <= r.delta_upper);
    CHECK(secs < 1.0);
    // nominal grid 1..64 reduced to h < 20
    REQUIRE(r.per_h.size() == 5);
    CHECK(r.per_h.back().h == 16.0);
  }
  const auto e = matuszewska(EigenvalueFunction::exponential({}), estimate());
  CHECK(e.delta_lower < 1e-6);
  CHECK(e.delta_upper < 1e-6);
}

TEST_CASE("short horizons are rejected", "[indices]") {
  auto cfg = estimate();
  cfg.horizon = 2.0;
  cfg.h_grid = {0.5};
  cfg.t_step = 0.1;
  CHECK(kind_of([&] { matuszewska(EigenvalueFunction::power_law(1.0), cfg); }) == ErrorKind::HorizonTooShort);
  cfg.h_grid = {64};
  CHECK(kind_of([&] { matuszewska(EigenvalueFunction::power_law(1.0), cfg); }) == ErrorKind::HorizonTooShort);
}

TEST_CASE("indices are invariant under shifts and dilations", "[indices]") {
  const auto g = GFunction::power_log({1.0, 1.5, 1.0, E});
  const auto base_exact = matuszewska(g);
  const auto base_est = matuszewska(g, estimate());
  for (double a : {-3.0, 0.0, 2.5})
    for (double b : {-1.0, 4.0}) {
      const auto s = shift(g, a, b);
      const auto ex = matuszewska(s);
      CHECK(ex.delta_lower == base_exact.delta_lower);
      CHECK(ex.delta_upper == base_exact.delta_upper);
      const auto es = matuszewska(s, estimate());
      CHECK(es.delta_lower == Approx(base_est.delta_lower).margin(1e-2));
      CHECK(es.delta_upper == Approx(base_est.delta_upper).margin(1e-2));
    }
  const auto mu = EigenvalueFunction::power_law(0.8);
  const auto r0 = matuszewska(mu, estimate());
  for (double lam : {0.5, 2.0, 10.0}) {
    const auto r = matuszewska(dilate(mu, lam), estimate());
    CHECK(r.delta_lower == Approx(r0.delta_lower).margin(1e-2));
    CHECK(r.delta_upper == Approx(r0.delta_upper).margin(1e-2));
    const auto x = matuszewska(dilate(mu, lam));
    CHECK(x.delta_lower == 1.25);
  }
}

TEST_CASE("g/t in the tail lies between the reciprocal indices", "[indices]") {
  for (double p : {0.5, 1.0, 3.0}) {
    const auto g = GFunction::power_log({1.0, p, 0.0, E});
    const auto r = matuszewska(g, estimate());
    const double lo_slope = 1.0 / r.delta_upper, hi_slope = 1.0 / r.delta_lower;
    for (double t = r.config.omega * 40; t <= 40; t += 0.5) {
      CHECK(g(t) / t >= lo_slope - 0.1);
      CHECK(g(t) / t <= hi_slope + 0.1);
    }
  }
}

TEST_CASE("regularity", "[indices]") {
  auto r = is_regular(EigenvalueFunction::power_law(1.0, 1.0), 0.02);
  CHECK(r.regular);
  CHECK(*r.delta == 1.0);
  r = is_regular(EigenvalueFunction::power_law(3.0, 1.0), 0.02);
  CHECK(r.regular);
  CHECK(*r.delta == Approx(1.0 / 3.0));
  r = is_regular(oscillating(), 0.02, staircase_config(40));
  CHECK_FALSE(r.regular);
  CHECK(r.report.delta_upper == kInf);
}

TEST_CASE("linear bound witnesses", "[indices]") {
  const auto half = EigenvalueFunction::power_law(0.5, 1.0);
  const auto w1 = linear_bound_witness(half, 0.25);
  CHECK(w1.bound_case == BoundCase::Upper);
  const auto g1 = g_transform(half);
  for (double t = w1.t0; t <= w1.t_end; t += w1.t_step / 2) CHECK(w1.holds(g1, t));

  const auto sq = EigenvalueFunction::power_law(2.0, 1.0);
  const auto w2 = linear_bound_witness(sq, 0.5);
  CHECK(w2.bound_case == BoundCase::Lower);
  const auto g2 = g_transform(sq);
  for (double t = w2.t0; t <= w2.t_end; t += w2.t_step / 2) CHECK(w2.holds(g2, t));

  const auto one = EigenvalueFunction::power_law(1.0, 1.0);
  const auto w3 = linear_bound_witness(one, 0.1);
  CHECK(w3.bound_case == BoundCase::Both);
  const auto g3 = g_transform(one);
  for (double t = w3.t0; t <= w3.t_end; t += w3.t_step / 2) CHECK(w3.holds(g3, t));

  CHECK(kind_of([&] { linear_bound_witness(half, 0.6); }) == ErrorKind::PreconditionFailed);
  CHECK(kind_of([&] { linear_bound_witness(sq, 1.5); }) == ErrorKind::PreconditionFailed);
  CHECK(kind_of([&] { linear_bound_witness(oscillating(), 0.1, staircase_config(40)); }) ==
        ErrorKind::PreconditionFailed);
}
