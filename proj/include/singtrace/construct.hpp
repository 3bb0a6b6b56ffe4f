#pragma once

// Greedy staircases over a given g_A. The vanisher climbs like g_A^(1/2) and
// puts A in the kernel of the ideal it generates; the dominator climbs like
// g_A^2 and keeps A out of that ideal. Both have lower index 0 and upper
// index infinity, so the operator they describe is singularly traceable.

#include <cmath>
#include <string>
#include <vector>

#include "singtrace/gfunction.hpp"
#include "singtrace/ideals.hpp"
#include "singtrace/indices.hpp"

namespace singtrace {

enum class StaircaseVariant { Vanisher, Dominator };

inline constexpr std::string_view to_string(StaircaseVariant v) {
  return v == StaircaseVariant::Vanisher ? "vanisher" : "dominator";
}

struct StaircaseConstruction {
  StaircaseVariant variant = StaircaseVariant::Vanisher;
  std::vector<double> breakpoints;  ///< t_1 < ... < t_{N+1}
  std::vector<double> step_values;  ///< value on [t_n, t_{n+1}), n = 1..N
  GFunction source;                 ///< g_A as given
  double offset = 0.0;              ///< g_A + offset >= 1 from t_1 on
  std::string rule;

  double horizon() const { return breakpoints.back(); }

  /// The staircase as an element of G, known up to t_{N+1}.
  GFunction staircase() const {
    std::vector<double> knots(breakpoints.begin() + 1, breakpoints.end() - 1);
    return GFunction::step(std::move(knots), step_values, horizon());
  }

  /// g_A + offset.
  double normalized(double t) const { return source(t) + offset; }
};

namespace detail {

inline double normalization_offset(const GFunction& g, double t1) {
  const double v = g(t1);
  if (!std::isfinite(v)) fail(ErrorKind::FiniteRank, "g_A is infinite at the start point");
  return std::max(0.0, 1.0 - v);
}

inline void staircase_preconditions(const GFunction& g) {
  if (g.finite_rank()) fail(ErrorKind::FiniteRank, "g_A is eventually +inf: A has finite rank");
}

inline double next_breakpoint(const GFunction& g, double offset, double tn, int n, double target) {
  const double t = g.first_reach(target - offset);
  if (!std::isfinite(t)) {
    fail(ErrorKind::Bounded, "g_A does not reach " + std::to_string(target - offset) + " (step " + std::to_string(n) +
                                 "): g_A is bounded on its known range");
  }
  return std::max(tn + (n + 1), t);
}

}  // namespace detail

inline StaircaseConstruction construct_vanisher(const GFunction& gA, int n_steps = 40, double t1 = 1.0) {
  detail::staircase_preconditions(gA);
  if (n_steps < 1) fail(ErrorKind::InvalidInput, "n_steps must be >= 1");
  StaircaseConstruction s{StaircaseVariant::Vanisher, {t1}, {}, gA, detail::normalization_offset(gA, t1),
                          "t[n+1] = max(t[n] + n + 1, inf{t : g(t) >= (sqrt(g(t[n])) + n + 1)^2}); value sqrt(g(t[n]))"};
  for (int n = 1; n <= n_steps; ++n) {
    const double tn = s.breakpoints.back();
    const double root = std::sqrt(s.normalized(tn));
    s.step_values.push_back(root);
    const double target = (root + (n + 1)) * (root + (n + 1));
    s.breakpoints.push_back(detail::next_breakpoint(gA, s.offset, tn, n, target));
  }
  return s;
}

inline StaircaseConstruction construct_dominator(const GFunction& gA, int n_steps = 40, double t1 = 1.0) {
  detail::staircase_preconditions(gA);
  if (n_steps < 1) fail(ErrorKind::InvalidInput, "n_steps must be >= 1");
  StaircaseConstruction s{StaircaseVariant::Dominator, {t1}, {}, gA, detail::normalization_offset(gA, t1),
                          "t[n+1] = max(t[n] + n + 1, inf{t : g(t) >= sqrt(g(t[n])^2 + n + 1)}); value g(t[n+1])^2"};
  for (int n = 1; n <= n_steps; ++n) {
    const double tn = s.breakpoints.back();
    const double v = s.normalized(tn);
    const double target = std::sqrt(v * v + (n + 1));
    const double next = detail::next_breakpoint(gA, s.offset, tn, n, target);
    s.breakpoints.push_back(next);
    const double w = s.normalized(next);
    s.step_values.push_back(w * w);
  }
  return s;
}

struct VerificationReport {
  std::size_t gaps_checked = 0;
  MatuszewskaReport indices;
  std::vector<Threshold> thresholds;  ///< t0(c) of the kernel or exclusion condition
};

/// Re-checks a construction from scratch: gap conditions, the pointwise
/// bound against g_A^(1/2) or g_A^2, the indices of the staircase, and the
/// kernel (vanisher) or exclusion (dominator) condition for c in {1, 10, 100}.
inline VerificationReport verify_construction(const StaircaseConstruction& s) {
  auto violated = [](const std::string& what) { fail(ErrorKind::VerificationFailed, what); };
  const auto& t = s.breakpoints;
  const auto& v = s.step_values;
  if (t.size() != v.size() + 1 || v.empty()) violated("breakpoints and values do not match");
  VerificationReport rep;

  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    if (!(t[i + 1] - t[i] > n)) violated("t[n+1] - t[n] > n fails at n = " + std::to_string(i + 1));
    const double a = s.normalized(t[i]), b = s.normalized(t[i + 1]);
    const bool ok = s.variant == StaircaseVariant::Vanisher ? std::sqrt(b) - std::sqrt(a) > n : b * b - a * a > n;
    if (!ok) violated("value gap condition fails at n = " + std::to_string(i + 1));
    const double expect = s.variant == StaircaseVariant::Vanisher ? std::sqrt(a) : b * b;
    if (v[i] != expect) violated("step value differs from the rule at n = " + std::to_string(i + 1));
    ++rep.gaps_checked;
  }

  const auto g = s.staircase();
  const auto grid = detail::gap_grid(s.source, g, 0.0, t.front(), std::nextafter(t.back(), -kInf));
  for (double x : grid) {
    const double gt = g(x), ga = s.normalized(x);
    if (s.variant == StaircaseVariant::Vanisher && gt > std::sqrt(ga) * (1 + 1e-15))
      violated("staircase exceeds g_A^(1/2) at t = " + std::to_string(x));
    if (s.variant == StaircaseVariant::Dominator && gt < ga * ga * (1 - 1e-15))
      violated("staircase falls below g_A^2 at t = " + std::to_string(x));
  }

  rep.indices = matuszewska(g, staircase_config(s.horizon()));
  if (!(rep.indices.delta_lower <= 0.1)) violated("lower index estimate above 0.1");
  if (!(rep.indices.delta_upper >= 10.0)) violated("upper index estimate below 10");

  for (double c : {1.0, 10.0, 100.0}) {
    // last grid point where the condition fails; t0 is the next one
    std::size_t last_bad = grid.size();
    for (std::size_t i = grid.size(); i-- > 0;) {
      const double x = grid[i];
      const bool holds = s.variant == StaircaseVariant::Vanisher ? s.source(x) > c + g(x) : s.source(x) < c + g(x);
      if (!holds) {
        last_bad = i;
        break;
      }
    }
    if (last_bad + 1 >= grid.size() && last_bad != grid.size())
      violated("condition with c = " + std::to_string(c) + " never settles on the staircase range");
    rep.thresholds.push_back({c, last_bad == grid.size() ? grid.front() : grid[last_bad + 1]});
  }
  if (s.variant == StaircaseVariant::Vanisher && !(rep.thresholds.front().t0 < rep.thresholds.back().t0))
    violated("kernel thresholds t0(c) do not increase with c");
  return rep;
}

}  // namespace singtrace
