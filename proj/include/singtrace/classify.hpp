#pragma once

// Singular traceability by three independent criteria: index straddling of 1,
// liminf of x mu(x) / S(x), and 1 as a limit point of S(lambda x) / S(x).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "singtrace/eigenvalue_function.hpp"
#include "singtrace/fn_core.hpp"
#include "singtrace/ideals.hpp"
#include "singtrace/indices.hpp"
#include "singtrace/integral.hpp"

namespace singtrace {

enum class Tri { True, False, Undecided };
enum class Criterion { Indices, Liminf, RatioLimitPoint };

inline constexpr std::string_view to_string(Tri v) {
  switch (v) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    case Tri::Undecided: return "undecided";
  }
  return "unknown";
}

inline constexpr std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Indices: return "indices";
    case Criterion::Liminf: return "liminf";
    case Criterion::RatioLimitPoint: return "ratio_limit_point";
  }
  return "unknown";
}

struct WindowStat {
  double lo, hi;  ///< window in t = log x
  double value;   ///< min of x mu/S, or min |ratio - 1|
  std::size_t hits = 0;
};

struct TraceabilityVerdict {
  Tri traceable = Tri::Undecided;
  Criterion criterion = Criterion::Indices;
  std::vector<WindowStat> windows;  ///< decisive quantity per tail window, latest first
  double delta_lower = 0.0, delta_upper = 0.0;  ///< indices criterion
  bool horizon_limited = false;
  bool finite_rank = false;
  std::string note;
};

namespace detail {

/// Uniform points in [lo, hi] plus both sides of every knot.
inline std::vector<double> window_grid(const GFunction& g, double lo, double hi, std::size_t n = 512) {
  std::vector<double> t;
  for (std::size_t i = 0; i <= n; ++i) t.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
  std::vector<double> knots;
  g.collect_knots(lo, hi, knots);
  for (double k : knots) {
    t.push_back(k);
    if (k > lo) t.push_back(std::nextafter(k, -kInf));
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

/// Dyadic tail windows [T/2, T], [T/4, T/2] in g-coordinates.
inline std::vector<std::pair<double, double>> tail_windows(double T) { return {{T / 2, T}, {T / 4, T / 2}}; }

inline double criteria_horizon(const GFunction& g, const EstimatorConfig& cfg) {
  return usable_horizon(g, cfg.criteria_horizon);
}

/// Shared prelude of the two integral criteria: finite rank and branch.
inline std::optional<TraceabilityVerdict> integral_prelude(const GFunction& g, Criterion c, std::optional<Branch>& br) {
  TraceabilityVerdict v;
  v.criterion = c;
  v.horizon_limited = g.horizon_limited();
  if (g.finite_rank()) {
    v.traceable = Tri::False;
    v.finite_rank = true;
    v.note = "finite rank: every singular trace vanishes";
    return v;
  }
  const auto tc = is_trace_class(g);
  if (tc.verdict == TraceClass::Undecided) {
    v.traceable = Tri::Undecided;
    v.note = "trace-class status undecided on the horizon; S has no branch";
    return v;
  }
  br = tc.verdict == TraceClass::TraceClass ? Branch::Down : Branch::Up;
  return std::nullopt;
}

}  // namespace detail

inline TraceabilityVerdict traceable_by_indices(const GFunction& g, const EstimatorConfig& cfg = {}) {
  TraceabilityVerdict v;
  v.criterion = Criterion::Indices;
  const auto r = matuszewska(g, cfg);
  v.delta_lower = r.delta_lower;
  v.delta_upper = r.delta_upper;
  v.horizon_limited = r.horizon_limited;
  if (r.finite_rank) {
    v.traceable = Tri::False;
    v.finite_rank = true;
    v.note = "finite rank: every singular trace vanishes";
    return v;
  }
  const bool straddles = r.delta_lower <= 1.0 && 1.0 <= r.delta_upper;
  if (r.mode == IndexMode::Exact) {
    v.traceable = straddles ? Tri::True : Tri::False;
    return v;
  }
  const bool in_band = std::abs(r.delta_lower - 1.0) <= cfg.band || std::abs(r.delta_upper - 1.0) <= cfg.band;
  v.traceable = in_band ? Tri::Undecided : (straddles ? Tri::True : Tri::False);
  if (in_band) v.note = "an estimated index lies within the band around 1";
  return v;
}

inline TraceabilityVerdict traceable_by_liminf(const GFunction& g, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  std::optional<Branch> br;
  if (auto early = detail::integral_prelude(g, Criterion::Liminf, br)) return *early;
  TraceabilityVerdict v;
  v.criterion = Criterion::Liminf;
  v.horizon_limited = g.horizon_limited();
  const LogIntegral li(g, *br);
  const double T = detail::criteria_horizon(g, cfg);
  for (auto [lo, hi] : detail::tail_windows(T)) {
    double m = kInf;
    for (double t : detail::window_grid(g, lo, hi)) m = std::min(m, std::exp(li.log_mu_over_S(t)));
    v.windows.push_back({lo, hi, m, 0});
  }
  const double m0 = v.windows[0].value, m1 = v.windows[1].value;
  if (m0 < cfg.theta && m0 <= m1) {
    v.traceable = Tri::True;
  } else if (m0 >= cfg.theta && m0 >= 0.9 * m1) {
    v.traceable = Tri::False;
  } else {
    v.traceable = Tri::Undecided;
    v.note = "window minima neither settle below theta nor stay away from 0";
  }
  return v;
}

inline TraceabilityVerdict traceable_by_ratio(const GFunction& g, double lambda, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  if (!(lambda > 1.0)) fail(ErrorKind::InvalidInput, "ratio criterion needs lambda > 1");
  std::optional<Branch> br;
  if (auto early = detail::integral_prelude(g, Criterion::RatioLimitPoint, br)) return *early;
  TraceabilityVerdict v;
  v.criterion = Criterion::RatioLimitPoint;
  v.horizon_limited = g.horizon_limited();
  const LogIntegral li(g, *br);
  const double ll = std::log(lambda);
  const double T = detail::criteria_horizon(g, cfg) - ll;
  std::size_t windows_hit = 0;
  for (auto [lo, hi] : detail::tail_windows(T)) {
    WindowStat w{lo, hi, kInf, 0};
    for (double t : detail::window_grid(g, lo, hi)) {
      const double d = std::abs(std::expm1(li.log_ratio(t, ll)));
      w.value = std::min(w.value, d);
      if (d < cfg.theta) ++w.hits;
    }
    if (w.hits > 0) ++windows_hit;
    v.windows.push_back(w);
  }
  if (windows_hit == v.windows.size()) {
    v.traceable = Tri::True;
  } else if (windows_hit == 0) {
    v.traceable = Tri::False;
  } else {
    v.traceable = Tri::Undecided;
    v.note = "the ratio comes within theta of 1 in some tail windows only";
  }
  return v;
}

inline TraceabilityVerdict traceable_by_indices(const EigenvalueFunction& mu, const EstimatorConfig& cfg = {}) {
  return traceable_by_indices(g_transform(mu), cfg);
}
inline TraceabilityVerdict traceable_by_liminf(const EigenvalueFunction& mu, const EstimatorConfig& cfg = {}) {
  return traceable_by_liminf(g_transform(mu), cfg);
}
inline TraceabilityVerdict traceable_by_ratio(const EigenvalueFunction& mu, double lambda,
                                              const EstimatorConfig& cfg = {}) {
  return traceable_by_ratio(g_transform(mu), lambda, cfg);
}

struct ClassificationReport {
  TraceClassVerdict trace_class;
  bool regular = false;
  std::optional<double> delta;
  MatuszewskaReport indices;
  TraceabilityVerdict by_indices, by_liminf, by_ratio;
  bool agreement = true;
  bool finite_rank = false;
  bool horizon_limited = false;

  /// The common verdict of the decided criteria; Undecided if none decided or they disagree.
  Tri traceable() const {
    std::optional<Tri> v;
    for (const auto* c : {&by_indices, &by_liminf, &by_ratio}) {
      if (c->traceable == Tri::Undecided) continue;
      if (v && *v != c->traceable) return Tri::Undecided;
      v = c->traceable;
    }
    return v.value_or(Tri::Undecided);
  }
};

inline ClassificationReport classify(const GFunction& g, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  ClassificationReport r;
  r.trace_class = is_trace_class(g);
  const auto reg = is_regular(g, std::max(cfg.band, 1e-12), cfg);
  r.regular = reg.regular;
  r.delta = reg.delta;
  r.indices = reg.report;
  r.by_indices = traceable_by_indices(g, cfg);
  r.by_liminf = traceable_by_liminf(g, cfg);
  r.by_ratio = traceable_by_ratio(g, cfg.lambda, cfg);
  r.finite_rank = g.finite_rank();
  r.horizon_limited = g.horizon_limited();
  std::optional<Tri> seen;
  for (const auto* c : {&r.by_indices, &r.by_liminf, &r.by_ratio}) {
    if (c->traceable == Tri::Undecided) continue;
    if (seen && *seen != c->traceable) r.agreement = false;
    seen = c->traceable;
  }
  return r;
}

inline ClassificationReport classify(const EigenvalueFunction& mu, const EstimatorConfig& cfg = {}) {
  return classify(g_transform(mu), cfg);
}

enum class Dichotomy { Infinite, Zero };

inline constexpr std::string_view to_string(Dichotomy d) { return d == Dichotomy::Infinite ? "Infinite" : "Zero"; }

struct DichotomyReport {
  Dichotomy verdict = Dichotomy::Zero;
  TraceClassVerdict trace_class;
  double delta_b = 1.0;
  IdealDecision ideal_check;  ///< A in I(B) for Infinite, A in I_0(B) for Zero
  bool consistent = false;    ///< the ideal decision matches the verdict
};

/// For A not singularly traceable and B regular with delta(B) = 1: every
/// singular trace on I(B) is infinite on A when A is not trace class, and
/// zero on A when it is.
inline DichotomyReport trace_dichotomy(const GFunction& gA, const GFunction& gB, const EstimatorConfig& cfg = {}) {
  const auto reg = is_regular(gB, std::max(cfg.band, 1e-12), cfg);
  if (!reg.regular) fail(ErrorKind::NotApplicable, "B is not regular");
  const double tol = reg.report.mode == IndexMode::Exact ? 0.0 : cfg.band;
  if (!(std::abs(*reg.delta - 1.0) <= tol)) fail(ErrorKind::NotApplicable, "B is regular with delta != 1");

  const auto ca = classify(gA, cfg);
  const Tri t = ca.traceable();
  if (t == Tri::True) fail(ErrorKind::NotApplicable, "A is singularly traceable");
  if (t == Tri::Undecided) fail(ErrorKind::NotApplicable, "singular traceability of A is undecided");
  if (ca.trace_class.verdict == TraceClass::Undecided) fail(ErrorKind::NotApplicable, "trace-class status of A is undecided");

  DichotomyReport r;
  r.trace_class = ca.trace_class;
  r.delta_b = *reg.delta;
  if (ca.trace_class.verdict == TraceClass::NotTraceClass) {
    r.verdict = Dichotomy::Infinite;
    r.ideal_check = in_principal_ideal(gA, gB, cfg);
    r.consistent = r.ideal_check.verdict == Membership::NonMember;
  } else {
    r.verdict = Dichotomy::Zero;
    r.ideal_check = in_kernel(gA, gB, cfg);
    r.consistent = r.ideal_check.verdict == Membership::Member;
  }
  return r;
}

inline DichotomyReport trace_dichotomy(const EigenvalueFunction& A, const EigenvalueFunction& B,
                                       const EstimatorConfig& cfg = {}) {
  return trace_dichotomy(g_transform(A), g_transform(B), cfg);
}

}  // namespace singtrace
