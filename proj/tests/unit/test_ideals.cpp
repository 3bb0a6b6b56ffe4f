#include <catch_amalgamated.hpp>

#include <random>

#include "singtrace/ideals.hpp"
#include "support/oracles.hpp"

using namespace singtrace;

namespace {

const double E = std::numbers::e;

GFunction power(double p, double C = 1.0) { return GFunction::power_log({C, p, 0.0, 1.0}); }

std::vector<GFunction> symbolic_suite() {
  return {power(0.25), power(0.5), power(1.0), power(2.0), power(4.0), power(1.0, 2.0),
          GFunction::power_log({1, 1, -1, E}), GFunction::power_log({1, 1, 2, E}), GFunction::power_log({1, 0, 1, E}),
          GFunction::exponential({}), GFunction::exponential({1.0, 3.0}), GFunction::linear({1.0, 0.0}),
          GFunction::linear({2.0, -5.0})};
}

}  // namespace

TEST_CASE("principal ideal examples", "[ideals]") {
  const auto d0 = in_principal_ideal(power(1), power(1));
  CHECK(d0.verdict == Membership::Member);
  REQUIRE(d0.witness);
  CHECK(d0.witness->a == 0.0);
  CHECK(d0.witness->b == 0.0);
  CHECK(d0.mode == DecisionMode::Exact);

  const auto d1 = in_principal_ideal(power(2), power(1));
  CHECK(d1.verdict == Membership::Member);
  REQUIRE(d1.witness);
  for (double t = d1.witness->t0; t < 200; t += 0.37)
    CHECK(power(2)(t) >= d1.witness->b + power(1)(t - d1.witness->a));

  const auto d2 = in_principal_ideal(power(0.5), power(1));
  CHECK(d2.verdict == Membership::NonMember);
  REQUIRE(d2.refutation);
  CHECK(d2.refutation->slope_a < d2.refutation->slope_b);
}

TEST_CASE("kernel examples", "[ideals]") {
  CHECK(in_kernel(power(2), power(1)).verdict == Membership::Member);
  CHECK(in_kernel(power(1), power(1)).verdict == Membership::NonMember);
  // mu_A = 2/(1+t): the gap is -log 2, bounded
  const auto k = in_kernel(power(1, 2.0), power(1));
  CHECK(k.verdict == Membership::NonMember);
  CHECK(in_principal_ideal(power(1, 2.0), power(1)).verdict == Membership::Member);
  // equal slopes, divergent log order
  CHECK(in_kernel(GFunction::power_log({1, 1, 2, E}), power(1)).verdict == Membership::Member);
  CHECK(in_kernel(GFunction::exponential({1.0, 0.5}), GFunction::exponential({1.0, 3.0})).verdict == Membership::Member);
  CHECK(in_kernel(power(8), GFunction::exponential({})).verdict == Membership::NonMember);
}

TEST_CASE("finite-rank inputs", "[ideals]") {
  const auto fr = GFunction::step({0.0, 1.0}, {0.0, 1.0, kInf});
  CHECK(in_principal_ideal(fr, power(1)).verdict == Membership::Member);
  CHECK(in_kernel(fr, power(1)).verdict == Membership::Member);
  const auto d = in_principal_ideal(power(1), fr);
  CHECK(d.verdict == Membership::NonMember);
  CHECK(d.finite_rank_base);
  CHECK(in_principal_ideal(fr, fr).verdict == Membership::Member);
}

TEST_CASE("kernel is inside the ideal; order reversal gives the trivial witness", "[ideals]") {
  const auto suite = symbolic_suite();
  for (const auto& a : suite)
    for (const auto& b : suite) {
      const auto k = in_kernel(a, b), i = in_principal_ideal(a, b);
      if (k.verdict == Membership::Member) CHECK(i.verdict == Membership::Member);
      CHECK(i.verdict != Membership::Undecided);
      CHECK(k.verdict != Membership::Undecided);
    }
  // mu_A <= mu_B pointwise
  const auto gB = power(1.0, 3.0), gA = power(1.0, 1.0);
  const auto d = in_principal_ideal(gA, gB);
  CHECK(d.verdict == Membership::Member);
  CHECK(d.witness->a == 0.0);
  CHECK(d.witness->b == 0.0);
}

TEST_CASE("decisions are stable under shifts of the generator", "[ideals]") {
  const auto suite = symbolic_suite();
  for (const auto& a : suite)
    for (const auto& b : suite)
      for (double sa : {-1.0, 1.0})
        for (double sb : {-1.0, 1.0}) {
          const auto bs = shift(b, sa, sb);
          CHECK(in_principal_ideal(a, bs).verdict == in_principal_ideal(a, b).verdict);
          CHECK(in_kernel(a, bs).verdict == in_kernel(a, b).verdict);
        }
}

TEST_CASE("faces are dilation invariant", "[ideals]") {
  const auto suite = symbolic_suite();
  for (const auto& a : suite)
    for (const auto& b : suite) {
      if (in_principal_ideal(a, b).verdict != Membership::Member) continue;
      for (double lam : {2.0, 10.0}) {
        const auto da = g_transform(dilate(g_inverse(a), lam));
        CHECK(in_principal_ideal(da, b).verdict == Membership::Member);
      }
    }
}

TEST_CASE("face axioms", "[ideals]") {
  const auto b = power(1);
  auto r = face_axioms_check({b, shift(b, 0, 5)});
  CHECK(r.passed());
  CHECK(r.checks > 0);
  r = face_axioms_check({power(1), power(2)});
  CHECK(r.passed());
  r = face_axioms_check({power(3)});
  CHECK(r.passed());
  CHECK(r.checks == 4);
}

TEST_CASE("regular domination agrees with the ideal decision", "[ideals]") {
  const auto d = regular_domination(power(2), power(1));
  CHECK(d.verdict == Membership::Member);
  CHECK(regular_domination(power(0.5), power(1)).verdict == Membership::NonMember);
  CHECK(regular_domination(power(1), power(1)).verdict == Membership::Member);
  for (const auto& a : symbolic_suite())
    for (const auto& b : symbolic_suite())
      CHECK(regular_domination(a, b).verdict == in_principal_ideal(a, b).verdict);
  const auto irregular = GFunction::step({1, 2, 10, 11, 22, 23, 30, 31}, {0, 1, 5, 6, 12, 13, 20, 21, 30}, 40.0);
  CHECK_THROWS_AS(regular_domination(power(1), irregular, staircase_config(40)), Error);
}

TEST_CASE("horizon mode on sampled data", "[ideals]") {
  // a sampled copy of x^-10 against the exact 1/x, and against itself
  std::vector<double> knots, levels{0.0};
  for (int i = 1; i <= 4000; ++i) {
    knots.push_back(i * 0.01);
    levels.push_back(10.0 * i * 0.01);
  }
  const auto sampled = GFunction::step(knots, levels, 40.0);
  const auto same = in_principal_ideal(sampled, sampled);
  CHECK(same.verdict == Membership::Member);
  CHECK(same.mode == DecisionMode::HorizonLimited);
  CHECK(in_principal_ideal(sampled, GFunction::linear({1.0, 0.0})).verdict == Membership::Member);
  CHECK(in_kernel(sampled, GFunction::linear({1.0, 0.0})).verdict == Membership::Member);
  CHECK(in_principal_ideal(GFunction::linear({1.0, 0.0}), sampled).verdict == Membership::NonMember);
  CHECK(in_kernel(sampled, sampled).verdict != Membership::Member);
}
