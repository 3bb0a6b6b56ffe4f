#pragma once

// Matuszewska indices of g: reciprocal asymptotic growth rates measured by the
// increment quotients (g(t+h) - g(t)) / h, regularity, and linear bounds.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "singtrace/eigenvalue_function.hpp"
#include "singtrace/fn_core.hpp"
#include "singtrace/gfunction.hpp"

namespace singtrace {

struct EstimatorConfig {
  std::vector<double> h_grid{1, 2, 4, 8, 16, 32, 64};
  double horizon = 40.0;  ///< T, in g-coordinates
  double omega = 0.5;     ///< tail window starts at omega*T
  double t_step = 0.01;
  bool force_estimate = false;  ///< estimate even when a closed form exists

  // traceability criteria
  double criteria_horizon = 1000.0;
  double theta = 0.01;
  double lambda = 2.0;
  double band = 0.02;  ///< indecision band around 1 for estimated indices

  // ideal searches
  double a_max = 50.0;

  void validate() const {
    if (h_grid.empty()) fail(ErrorKind::InvalidInput, "h-grid is empty");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
      if (!(h_grid[i] > 0.0) || !std::isfinite(h_grid[i])) fail(ErrorKind::InvalidInput, "h-grid entries must be > 0");
      if (i > 0 && !(h_grid[i] > h_grid[i - 1])) fail(ErrorKind::InvalidInput, "h-grid must be increasing");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::InvalidInput, "horizon must be > 0");
    if (!(omega > 0.0 && omega < 1.0)) fail(ErrorKind::InvalidInput, "tail window fraction must be in (0, 1)");
    if (!(t_step > 0.0)) fail(ErrorKind::InvalidInput, "t_step must be > 0");
    if (!(criteria_horizon > 0.0)) fail(ErrorKind::InvalidInput, "criteria horizon must be > 0");
    if (!(theta > 0.0)) fail(ErrorKind::InvalidInput, "theta must be > 0");
    if (!(lambda > 1.0)) fail(ErrorKind::InvalidInput, "lambda must be > 1");
    if (!(band >= 0.0)) fail(ErrorKind::InvalidInput, "band must be >= 0");
    if (!(a_max >= 0.0)) fail(ErrorKind::InvalidInput, "a_max must be >= 0");
  }

  /// The h values satisfying h < (1 - omega) * T for the given T.
  std::vector<double> effective_h_grid(double T) const {
    std::vector<double> out;
    for (double h : h_grid)
      if (h < (1.0 - omega) * T) out.push_back(h);
    return out;
  }
  std::vector<double> effective_h_grid() const { return effective_h_grid(horizon); }
};

/// Index estimation settings for a finite staircase prefix ending at `horizon`:
/// the flats and jumps are O(n), so only small h can resolve them.
inline EstimatorConfig staircase_config(double horizon) {
  EstimatorConfig cfg;
  cfg.horizon = horizon;
  cfg.h_grid = {0.5, 1.0, 2.0};
  return cfg;
}

enum class IndexMode { Exact, Estimated };

inline constexpr std::string_view to_string(IndexMode m) { return m == IndexMode::Exact ? "exact" : "estimated"; }

struct HRow {
  double h;
  double sup;  ///< tail-window sup of the increment quotient
  double inf;  ///< tail-window inf
  std::size_t increments;
};

struct MatuszewskaReport {
  double delta_lower = 0.0;
  double delta_upper = 0.0;
  IndexMode mode = IndexMode::Exact;
  std::vector<HRow> per_h;
  EstimatorConfig config;
  double horizon_used = 0.0;  ///< T actually used (Estimated mode)
  bool finite_rank = false;
  bool horizon_limited = false;
};

namespace detail {

/// Last usable point: values are known on (-inf, horizon) only.
inline double usable_horizon(const GFunction& g, double T) {
  return g.horizon_limited() ? std::min(T, std::nextafter(g.horizon(), -kInf)) : T;
}

inline double reciprocal(double r) {
  if (r == 0.0) return kInf;
  if (r == kInf) return 0.0;
  return 1.0 / r;
}

/// Indices from a closed-form expansion g ~ a e^t + s t + q log t + c.
inline std::pair<double, double> exact_indices(const Expansion& e) {
  if (e.exp_rate > 0.0) return {0.0, 0.0};
  const double d = reciprocal(e.slope);
  return {d, d};
}

inline HRow window_quotients(const GFunction& g, double h, double lo, double hi, double t_step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / t_step + 1e-9));
  if (n < 10) {
    fail(ErrorKind::HorizonTooShort, "tail window for h=" + std::to_string(h) + " holds " + std::to_string(n) +
                                         " increments (need 10)");
  }
  double sup = -kInf, inf = kInf;
  auto visit = [&](double t) {
    const double q = (g(t + h) - g(t)) / h;
    if (std::isnan(q)) return;  // inf - inf: both past the support
    sup = std::max(sup, q);
    inf = std::min(inf, q);
  };
  if (g.piecewise_constant()) {
    // the quotient only changes where t or t + h crosses a knot
    std::vector<double> cand{lo, hi};
    std::vector<double> knots;
    g.collect_knots(lo, hi + h, knots);
    for (double k : knots) {
      if (k >= lo && k <= hi) cand.push_back(k);
      if (k - h >= lo && k - h <= hi) cand.push_back(k - h);
    }
    for (double t : cand) visit(t);
  } else {
    for (std::size_t i = 0; i <= n; ++i) visit(lo + static_cast<double>(i) * t_step);
    std::vector<double> knots;
    g.collect_knots(lo, hi + h, knots);
    for (double k : knots) {
      if (k >= lo && k <= hi) visit(k);
      if (k - h >= lo && k - h <= hi) visit(k - h);
    }
  }
  return {h, sup, inf, n};
}

}  // namespace detail

inline MatuszewskaReport matuszewska(const GFunction& g, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  MatuszewskaReport r;
  r.config = cfg;
  r.horizon_limited = g.horizon_limited();
  if (g.finite_rank()) {
    // increments are eventually infinite; the convention is delta = 0
    r.finite_rank = true;
    r.mode = IndexMode::Exact;
    return r;
  }
  if (!cfg.force_estimate) {
    if (auto e = g.expansion()) {
      std::tie(r.delta_lower, r.delta_upper) = detail::exact_indices(*e);
      r.mode = IndexMode::Exact;
      return r;
    }
  }
  r.mode = IndexMode::Estimated;
  const double T = detail::usable_horizon(g, cfg.horizon);
  r.horizon_used = T;
  const auto hs = cfg.effective_h_grid(T);
  if (hs.empty()) fail(ErrorKind::HorizonTooShort, "no h in the grid satisfies h < (1 - omega) T");
  for (double h : hs) r.per_h.push_back(detail::window_quotients(g, h, cfg.omega * T, T - h, cfg.t_step));

  double min_sup = kInf, max_inf = -kInf;
  for (const auto& row : r.per_h) {
    min_sup = std::min(min_sup, row.sup);
    max_inf = std::max(max_inf, row.inf);
  }
  if (min_sup < max_inf) {
    // a non-doubling grid can cross the two scans; the largest h is consistent
    min_sup = r.per_h.back().sup;
    max_inf = r.per_h.back().inf;
  }
  r.delta_lower = detail::reciprocal(std::max(min_sup, 0.0));
  r.delta_upper = detail::reciprocal(std::max(max_inf, 0.0));
  return r;
}

inline MatuszewskaReport matuszewska(const EigenvalueFunction& mu, const EstimatorConfig& cfg = {}) {
  return matuszewska(g_transform(mu), cfg);
}

struct Regularity {
  bool regular = false;
  std::optional<double> delta;
  MatuszewskaReport report;
};

inline Regularity is_regular(const GFunction& g, double tol, const EstimatorConfig& cfg = {}) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidInput, "regularity tolerance must be > 0");
  Regularity out;
  out.report = matuszewska(g, cfg);
  const auto& r = out.report;
  if (r.mode == IndexMode::Exact) {
    out.regular = r.delta_lower == r.delta_upper;
  } else {
    out.regular = r.delta_upper == kInf ? r.delta_lower == kInf : r.delta_upper - r.delta_lower <= tol;
  }
  if (out.regular) out.delta = r.mode == IndexMode::Exact ? r.delta_lower : 0.5 * (r.delta_lower + r.delta_upper);
  return out;
}

inline Regularity is_regular(const EigenvalueFunction& mu, double tol, const EstimatorConfig& cfg = {}) {
  return is_regular(g_transform(mu), tol, cfg);
}

enum class BoundCase { Upper, Lower, Both };  ///< g below a flatter line, above a steeper one, or between

inline constexpr std::string_view to_string(BoundCase c) {
  switch (c) {
    case BoundCase::Upper: return "i";
    case BoundCase::Lower: return "ii";
    case BoundCase::Both: return "iii";
  }
  return "?";
}

/// Upper:  g(t) <  c  + (1-eps) t
/// Lower:  g(t) > -c  + (1+eps) t
/// Both:  -c1 + (1-eps) t <= g(t) <= c2 + (1+eps) t
struct LinearBoundWitness {
  BoundCase bound_case = BoundCase::Upper;
  double eps = 0.0;
  double c = 0.0;   ///< c, or c1 in the two-sided case
  double c2 = 0.0;  ///< two-sided case only
  double t0 = 0.0;
  double t_end = 0.0;
  double t_step = 0.0;
  std::size_t grid_points = 0;

  /// Re-check on any grid past t0.
  bool holds(const GFunction& g, double t) const {
    const double v = g(t);
    switch (bound_case) {
      case BoundCase::Upper: return v < c + (1.0 - eps) * t;
      case BoundCase::Lower: return v > -c + (1.0 + eps) * t;
      case BoundCase::Both: return -c + (1.0 - eps) * t <= v && v <= c2 + (1.0 + eps) * t;
    }
    return false;
  }
};

namespace detail {

struct GridMax {
  double value = -kInf;
  double where = 0.0;
};

/// Max of f on [t0, t1]: grid scan, left and right limits at the knots of g,
/// then a local Brent refinement around the best point.
inline GridMax grid_max(const GFunction& g, double t0, double t1, double step, auto&& f) {
  GridMax m;
  auto take = [&](double t) {
    const double v = f(t);
    if (v > m.value) m = {v, t};
  };
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) take(t0 + static_cast<double>(i) * step);
  std::vector<double> knots;
  g.collect_knots(t0, t1, knots);
  for (double k : knots) {
    take(k);
    if (k > t0) take(std::nextafter(k, -kInf));
  }
  if (m.value > -kInf && !g.piecewise_constant()) {
    const double lo = std::max(t0, m.where - step), hi = std::min(t1, m.where + step);
    if (hi > lo) {
      const auto [t, negv] = boost::math::tools::brent_find_minima([&](double t) { return -f(t); }, lo, hi, 52);
      if (-negv > m.value) m = {-negv, t};
    }
  }
  return m;
}

inline double bound_margin(double c) { return 1e-9 * std::max(1.0, std::abs(c)); }

}  // namespace detail

/// Smallest grid-verified constant(s) for the linear bounds implied by the
/// indices. The case is chosen from the indices; eps must be admissible.
inline LinearBoundWitness linear_bound_witness(const GFunction& g, double eps, const EstimatorConfig& cfg = {}) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidInput, "eps must be > 0");
  const auto rep = matuszewska(g, cfg);
  const double dl = rep.delta_lower, du = rep.delta_upper;
  const double tol = rep.mode == IndexMode::Exact ? 0.0 : cfg.band;

  LinearBoundWitness w;
  w.eps = eps;
  w.t0 = 0.0;
  w.t_end = detail::usable_horizon(g, cfg.horizon);
  w.t_step = cfg.t_step;
  w.grid_points = static_cast<std::size_t>(std::floor((w.t_end - w.t0) / w.t_step + 1e-9)) + 1;

  auto late = [&](const detail::GridMax& m) { return m.where > w.t_end - 0.1 * (w.t_end - w.t0); };
  auto too_late = [&](const detail::GridMax& m) {
    if (late(m) && m.value > -kInf)
      fail(ErrorKind::NoWitnessOnHorizon, "the bound violation still grows at the end of the horizon");
  };

  if (dl > 1.0 + tol) {
    if (!(eps < 1.0 - 1.0 / dl)) fail(ErrorKind::PreconditionFailed, "case (i) needs eps < 1 - 1/delta_lower");
    w.bound_case = BoundCase::Upper;
    const auto m = detail::grid_max(g, w.t0, w.t_end, w.t_step, [&](double t) { return g(t) - (1.0 - eps) * t; });
    too_late(m);
    w.c = m.value + detail::bound_margin(m.value);
  } else if (du < 1.0 - tol) {
    if (!(eps < 1.0 / du - 1.0)) fail(ErrorKind::PreconditionFailed, "case (ii) needs eps < 1/delta_upper - 1");
    w.bound_case = BoundCase::Lower;
    const auto m = detail::grid_max(g, w.t0, w.t_end, w.t_step, [&](double t) { return (1.0 + eps) * t - g(t); });
    too_late(m);
    w.c = m.value + detail::bound_margin(m.value);
  } else if (std::abs(dl - 1.0) <= tol && std::abs(du - 1.0) <= tol) {
    w.bound_case = BoundCase::Both;
    const auto m1 = detail::grid_max(g, w.t0, w.t_end, w.t_step, [&](double t) { return (1.0 - eps) * t - g(t); });
    const auto m2 = detail::grid_max(g, w.t0, w.t_end, w.t_step, [&](double t) { return g(t) - (1.0 + eps) * t; });
    too_late(m1);
    too_late(m2);
    w.c = m1.value + detail::bound_margin(m1.value);
    w.c2 = m2.value + detail::bound_margin(m2.value);
  } else {
    fail(ErrorKind::PreconditionFailed, "no linear bound case applies: need delta_lower > 1, delta_upper < 1, or delta = 1");
  }
  return w;
}

inline LinearBoundWitness linear_bound_witness(const EigenvalueFunction& mu, double eps, const EstimatorConfig& cfg = {}) {
  return linear_bound_witness(g_transform(mu), eps, cfg);
}

}  // namespace singtrace
