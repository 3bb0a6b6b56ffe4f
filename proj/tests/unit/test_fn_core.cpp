#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "singtrace/fn_core.hpp"
#include "support/oracles.hpp"

using namespace singtrace;
using Catch::Approx;

namespace {

EigenvalueFunction inv_1pt(double p) { return EigenvalueFunction::power_law(p, 1.0); }

}  // namespace

TEST_CASE("rearrange sorts descending with weights as lengths", "[fn_core]") {
  const auto mu = rearrange({{{3, 1}, {1, 1}, {2, 1}}});
  const auto& st = std::get<Step>(mu.repr());
  CHECK(st.breakpoints == std::vector<double>{0, 1, 2, 3});
  CHECK(st.values == std::vector<double>{3, 2, 1});
  CHECK(mu(0.0) == 3.0);
  CHECK(mu(0.999) == 3.0);
  CHECK(mu(1.0) == 2.0);
  CHECK(mu(2.5) == 1.0);
  CHECK(mu(3.0) == 0.0);
  CHECK(mu.finite_rank());

  const auto single = rearrange({{{5, 2}}});
  CHECK(single(1.9) == 5.0);
  CHECK(single(2.0) == 0.0);

  const auto merged = std::get<Step>(rearrange({{{1, 1}, {1, 1}}}).repr());
  CHECK(merged.breakpoints == std::vector<double>{0, 2});
  CHECK(merged.values == std::vector<double>{1});
}

TEST_CASE("rearrange edge cases", "[fn_core]") {
  const auto empty = rearrange({});
  CHECK(empty.finite_rank());
  CHECK(empty(0.0) == 0.0);
  CHECK_THROWS_MATCHES(rearrange({{{-1, 1}}}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::NegativeValue; }));
  CHECK_THROWS_MATCHES(
      rearrange({{{1, 0}}}), Error,
      Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::NonpositiveWeight; }));
  // zero values vanish into the zero tail
  const auto z = std::get<Step>(rearrange({{{0, 3}, {2, 0.5}}}).repr());
  CHECK(z.values == std::vector<double>{2});
}

TEST_CASE("rearrange matches the definitional inf formula", "[fn_core]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(0.0, 10.0), wt(0.05, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, double>> raw;
    SpectralData data;
    const int n = 1 + trial % 20;
    for (int i = 0; i < n; ++i) {
      const double v = std::round(val(rng) * 4) / 4;  // force ties
      const double w = wt(rng);
      raw.emplace_back(v, w);
      data.pairs.push_back({v, w});
    }
    const auto mu = rearrange(data);
    double total = 0;
    for (auto [v, w] : raw) total += w;
    for (double t = 0.0; t < total + 1.0; t += 0.037) CHECK(mu(t) == oracle::mu_definitional(raw, t));
  }
}

TEST_CASE("distribution function counts weight strictly above", "[fn_core]") {
  DistributionFunction lam({{{3, 1}, {1, 1}, {2, 1.5}}});
  CHECK(lam(0.0) == 3.5);
  CHECK(lam(1.0) == 2.5);
  CHECK(lam(2.5) == 1.0);
  CHECK(lam(3.0) == 0.0);
}

TEST_CASE("g_transform closed forms", "[fn_core]") {
  const auto g = g_transform(EigenvalueFunction::exponential({}));
  for (double t : {-3.0, 0.0, 1.0, 5.0}) CHECK(g(t) == Approx(std::exp(t)).epsilon(1e-14));

  const auto mu = inv_1pt(1.0);
  const auto g1 = g_transform(mu);
  for (double t : {0.0, 1.0, 10.0}) {
    CHECK(g1(t) == Approx(std::log1p(std::exp(t))).epsilon(1e-14));
    CHECK(g1(t) == Approx(-std::log(mu(std::exp(t)))).epsilon(1e-14));
  }
  CHECK(std::holds_alternative<GPowerLog>(g1.node()));
}

TEST_CASE("g_transform of a step", "[fn_core]") {
  const auto g = g_transform(rearrange({{{3, 1}, {1, 1}, {2, 1}}}));
  CHECK(g(-5.0) == Approx(-std::log(3.0)));
  CHECK(g(-1e-9) == Approx(-std::log(3.0)));
  CHECK(g(0.0) == Approx(-std::log(2.0)));
  CHECK(g(std::log(2.0) - 1e-9) == Approx(-std::log(2.0)));
  CHECK(g(std::log(2.0)) == Approx(0.0).margin(1e-15));
  CHECK(g(std::log(3.0)) == kInf);
  CHECK(g(100.0) == kInf);
  CHECK(g.support_end() == Approx(std::log(3.0)));
}

TEST_CASE("g_inverse", "[fn_core]") {
  const auto mu = g_inverse(GFunction::exponential({}));
  CHECK(mu.representation() == Representation::Exponential);
  CHECK(mu(2.0) == Approx(std::exp(-2.0)));

  const auto fr = g_inverse(GFunction::step({0.0, 1.0}, {0.0, 1.0, kInf}));
  CHECK(fr.finite_rank());
  CHECK(fr(0.5) == Approx(1.0));
  CHECK(fr(2.0) == Approx(std::exp(-1.0)));
  CHECK(fr(std::exp(1.0)) == 0.0);
  CHECK(fr(1e6) == 0.0);

  const auto lin = g_inverse(GFunction::linear({1.0, 0.0}));
  for (double x : {1.0, 2.0, 10.0, 1e5}) CHECK(lin(x) == Approx(1.0 / x));

  const auto bounded = GFunction::minimum(GFunction::linear({1.0, 0.0}), GFunction::step({1.0}, {0.0, 5.0}, 3.0));
  CHECK_THROWS_AS(GFunction::step({1.0}, {0.0, 5.0}), Error);
  (void)bounded;
}

TEST_CASE("round trip g_inverse(g_transform(mu))", "[fn_core]") {
  std::vector<EigenvalueFunction> fams = {
      EigenvalueFunction::power_law(0.5),
      EigenvalueFunction::power_law(2.0, 1.0),
      EigenvalueFunction::power_log({2.0, 1.0, 2.0, std::numbers::e}),
      EigenvalueFunction::power_log({1.0, 0.0, 1.0, std::numbers::e}),
      EigenvalueFunction::exponential({3.0, 0.5}),
      rearrange({{{3, 1}, {1, 1}, {2, 1}}}),
  };
  for (const auto& mu : fams) {
    const auto back = g_inverse(g_transform(mu));
    for (double x : oracle::log_grid(1e-3, 1e9, 300)) {
      const double a = mu(x), b = back(x);
      CHECK(std::abs(a - b) <= 1e-12);
    }
  }
}

TEST_CASE("dilation", "[fn_core]") {
  const auto mu = inv_1pt(1.0);
  const auto d = dilate(mu, 2.0);
  for (double t : {0.0, 0.5, 3.0, 100.0}) CHECK(d(t) == Approx(2.0 / (1.0 + 2.0 * t)).epsilon(1e-14));
  CHECK_THROWS_AS(dilate(mu, 0.0), Error);
  CHECK_THROWS_AS(dilate(mu, -1.0), Error);

  std::vector<EigenvalueFunction> fams = {
      inv_1pt(0.7), EigenvalueFunction::power_log({1.0, 1.0, -1.0, std::numbers::e}),
      EigenvalueFunction::exponential({2.0, 1.5}), rearrange({{{3, 1}, {1, 2}}}),
      EigenvalueFunction::from_g(GFunction::linear({2.0, 1.0}))};
  for (const auto& f : fams) {
    const auto id = dilate(dilate(f, 2.0), 0.5);
    const auto d6 = dilate(dilate(f, 2.0), 3.0), d6d = dilate(f, 6.0);
    for (double x : oracle::log_grid(1e-3, 1e3, 100)) {
      CHECK(std::abs(id(x) - f(x)) <= 1e-12 * std::max(1.0, f(x)));
      CHECK(std::abs(d6(x) - d6d(x)) <= 1e-12 * std::max(1.0, d6d(x)));
    }
    CHECK(dilate(f, 1.0)(0.3) == f(0.3));
  }
}

TEST_CASE("dilation is a shift in g-coordinates", "[fn_core]") {
  const auto mu = EigenvalueFunction::power_log({1.5, 1.2, 0.5, std::numbers::e});
  const auto g = g_transform(mu);
  for (double lam : {0.5, 2.0, 10.0}) {
    const auto gd = g_transform(dilate(mu, lam));
    for (double t = -5.0; t <= 30.0; t += 0.7)
      CHECK(gd(t) == Approx(-std::log(lam) + g(t + std::log(lam))).epsilon(1e-12));
  }
}

TEST_CASE("shift and pointwise min", "[fn_core]") {
  const auto g = GFunction::linear({1.0, 0.0});
  CHECK(shift(g, 0, 0)(3.0) == 3.0);
  CHECK(shift(g, 1, 2)(5.0) == 6.0);
  CHECK(shift(shift(g, 1, 0), 0, 2)(7.0) == shift(g, 1, 2)(7.0));

  CHECK(pointwise_min(g, g)(4.0) == 4.0);
  const auto g2 = GFunction::linear({2.0, -5.0});
  const auto m = pointwise_min(g, g2);
  for (double t : {1.0, 2.0, 4.9}) CHECK(m(t) == Approx(2 * t - 5));
  for (double t : {5.0, 6.0, 50.0}) CHECK(m(t) == Approx(t));
  const auto big = shift(g, 0, 3);
  CHECK(pointwise_min(g, big)(10.0) == 10.0);
}

TEST_CASE("g_transform is order reversing", "[fn_core]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> P(0.1, 3.0), Cs(0.2, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double p = P(rng), c1 = Cs(rng), c2 = Cs(rng);
    const auto mu1 = EigenvalueFunction::power_log({std::min(c1, c2), p, 0.0, std::numbers::e});
    const auto mu2 = EigenvalueFunction::power_log({std::max(c1, c2), p, 0.0, std::numbers::e});
    const auto g1 = g_transform(mu1), g2 = g_transform(mu2);
    for (double t = -5; t <= 40; t += 1.3) {
      REQUIRE(mu1(std::exp(t)) <= mu2(std::exp(t)));
      CHECK(g1(t) >= g2(t));
    }
  }
}

TEST_CASE("grid checks of the M and G axioms", "[fn_core]") {
  const auto mu = inv_1pt(1.0);
  CHECK(check_in_M(mu, oracle::log_grid(1e-3, 1e6, 200)).ok);
  CHECK(check_in_G(g_transform(mu), oracle::lin_grid(-10, 50, 200)).ok);
  const auto gs = g_transform(rearrange({{{3, 1}, {1, 1}}}));
  CHECK(check_in_G(gs, oracle::lin_grid(-10, 50, 200)).ok);
}

TEST_CASE("input validation", "[fn_core]") {
  CHECK_THROWS_AS(EigenvalueFunction::power_log({1.0, 0.0, 0.0, std::numbers::e}), Error);
  CHECK_THROWS_AS(EigenvalueFunction::step({0, 1}, {1, 2, 0}), Error);
  CHECK_THROWS_AS(EigenvalueFunction::step({0, 2, 1}, {1, 0.5}), Error);
  CHECK_THROWS_AS(EigenvalueFunction::sampled({0, 1}, {1, 2}), Error);
  const auto s = EigenvalueFunction::sampled({0, 1, 2}, {1, 0.5, 0.25});
  CHECK(s(1.5) == 0.5);
  CHECK_THROWS_AS(s(2.0), Error);
  CHECK(g_transform(s).horizon_limited());
}
