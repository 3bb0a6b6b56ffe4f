#pragma once

// Elements of G: non-decreasing, right-continuous, bounded below and
// unbounded above functions on the real line with values in (-inf, +inf].
// A GFunction is an immutable expression tree; +inf is IEEE infinity and
// always means "eventually infinite" (finite rank), never overflow.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "singtrace/error.hpp"

namespace singtrace {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct PowerLogParams {
  double scale = 1.0;
  double p = 1.0;
  double q = 0.0;
  double offset = std::numbers::e;
};

struct ExponentialParams {
  double scale = 1.0;
  double alpha = 1.0;
};

/// g(t) = intercept + slope * max(t, 0), i.e. mu(x) = e^-intercept * min(1, x^-slope).
struct LinearParams {
  double slope = 1.0;
  double intercept = 0.0;
};

/// Leading behaviour g(t) = exp_rate*e^t + slope*t + log_coef*log(t) + constant + o(1).
struct Expansion {
  double exp_rate = 0.0;
  double slope = 0.0;
  double log_coef = 0.0;
  double constant = 0.0;
};

namespace detail {

inline bool nearly_equal(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Sign of the divergence of f - g ignoring constants: +1, -1, or 0 when the
/// growth terms coincide (then the difference tends to constant_f - constant_g).
inline int compare_growth(const Expansion& f, const Expansion& g) {
  const double fs[3] = {f.exp_rate, f.slope, f.log_coef};
  const double gs[3] = {g.exp_rate, g.slope, g.log_coef};
  for (int i = 0; i < 3; ++i) {
    if (detail::nearly_equal(fs[i], gs[i])) continue;
    return fs[i] > gs[i] ? 1 : -1;
  }
  return 0;
}

/// log(e^t + a) without overflow for large t.
inline double log_exp_plus(double t, double a) {
  if (t > 0.0) return t + std::log1p(a * std::exp(-t));
  return std::log(std::exp(t) + a);
}

class GFunction;

struct GPowerLog {
  PowerLogParams params;
};
struct GExponential {
  ExponentialParams params;
};
struct GLinear {
  LinearParams params;
};
struct GStep;
struct GShift;
struct GMin;
struct GMax;

class GFunction {
 public:
  using Node = std::variant<GPowerLog, GExponential, GLinear, GStep, GShift, GMin, GMax>;

  static GFunction power_log(const PowerLogParams& p);
  static GFunction exponential(const ExponentialParams& p);
  static GFunction linear(const LinearParams& p);
  /// levels[0] holds on (-inf, knots[0]), levels[i] on [knots[i-1], knots[i]),
  /// the last level on [knots.back(), inf). Values are known on (-inf, horizon);
  /// past the horizon the tail takes over, or evaluation fails.
  static GFunction step(std::vector<double> knots, std::vector<double> levels, double horizon = kInf,
                        std::optional<GFunction> tail = std::nullopt);
  static GFunction shifted(const GFunction& base, double a, double b);
  static GFunction minimum(const GFunction& f, const GFunction& g);
  static GFunction maximum(const GFunction& f, const GFunction& g);

  double operator()(double t) const;

  /// Values are defined on (-inf, horizon()).
  double horizon() const;
  bool horizon_limited() const { return horizon() < kInf; }
  /// Infimum of the set where g is +inf from then on; kInf if never.
  double support_end() const;
  bool finite_rank() const { return support_end() < kInf; }
  bool piecewise_constant() const;
  /// Closed-form asymptotics, present for symbolic trees only.
  std::optional<Expansion> expansion() const;
  /// Discontinuities and kinks inside [lo, hi], appended unsorted.
  void collect_knots(double lo, double hi, std::vector<double>& out) const;
  /// inf{t : g(t) >= v}; kInf if v is not reached on the known range.
  double first_reach(double v) const;
  std::string describe() const;

  const Node& node() const;

 private:
  explicit GFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  double first_reach_closed(double v) const;

  std::shared_ptr<const Node> node_;
};

struct GStep {
  std::vector<double> knots;
  std::vector<double> levels;
  double horizon = kInf;
  std::optional<GFunction> tail;

  double level_at(double t) const {
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    return levels[static_cast<std::size_t>(it - knots.begin())];
  }
};

struct GShift {
  GFunction base;
  double a;
  double b;
};

struct GMin {
  GFunction f;
  GFunction g;
};

struct GMax {
  GFunction f;
  GFunction g;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------

inline const GFunction::Node& GFunction::node() const { return *node_; }

inline GFunction GFunction::power_log(const PowerLogParams& p) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) fail(ErrorKind::InvalidInput, "power_log: scale must be > 0");
  if (!(p.p >= 0.0) || !std::isfinite(p.p)) fail(ErrorKind::InvalidInput, "power_log: p must be >= 0");
  if (!std::isfinite(p.q)) fail(ErrorKind::InvalidInput, "power_log: q must be finite");
  if (!(p.offset > 0.0) || !std::isfinite(p.offset)) fail(ErrorKind::InvalidInput, "power_log: offset must be > 0");
  if (p.q != 0.0 && !(p.offset > 1.0))
    fail(ErrorKind::InvalidInput, "power_log: offset must exceed 1 when q != 0");
  if (!(p.p > 0.0 || p.q > 0.0)) fail(ErrorKind::NotInfinitesimal, "power_log: needs p > 0, or p = 0 and q > 0");
  // d/du [p log u + q log log u] >= 0 for u >= offset
  if (p.q < 0.0 && p.p * std::log(p.offset) + p.q < 0.0)
    fail(ErrorKind::InvalidInput, "power_log: not monotone (need p*log(offset) + q >= 0)");
  return GFunction(std::make_shared<const Node>(GPowerLog{p}));
}

inline GFunction GFunction::exponential(const ExponentialParams& p) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) fail(ErrorKind::InvalidInput, "exponential: scale must be > 0");
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) fail(ErrorKind::InvalidInput, "exponential: alpha must be > 0");
  return GFunction(std::make_shared<const Node>(GExponential{p}));
}

inline GFunction GFunction::linear(const LinearParams& p) {
  if (!(p.slope > 0.0) || !std::isfinite(p.slope)) fail(ErrorKind::InvalidInput, "linear: slope must be > 0");
  if (!std::isfinite(p.intercept)) fail(ErrorKind::InvalidInput, "linear: intercept must be finite");
  return GFunction(std::make_shared<const Node>(GLinear{p}));
}

inline GFunction GFunction::step(std::vector<double> knots, std::vector<double> levels, double horizon,
                                 std::optional<GFunction> tail) {
  if (levels.size() != knots.size() + 1) fail(ErrorKind::InvalidInput, "step: need one more level than knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i])) fail(ErrorKind::InvalidInput, "step: knots must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1])) fail(ErrorKind::InvalidInput, "step: knots must be strictly increasing");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::isnan(levels[i]) || levels[i] == -kInf) fail(ErrorKind::InvalidInput, "step: levels must be > -inf");
    if (i > 0 && levels[i] < levels[i - 1]) fail(ErrorKind::InvalidInput, "step: levels must be non-decreasing");
  }
  if (std::isnan(horizon)) fail(ErrorKind::InvalidInput, "step: horizon is NaN");
  if (tail && horizon == kInf) fail(ErrorKind::InvalidInput, "step: a tail needs a finite horizon");
  if (tail) {
    const auto it = std::lower_bound(knots.begin(), knots.end(), horizon);
    const double last_known = levels[static_cast<std::size_t>(it - knots.begin())];
    if ((*tail)(horizon) < last_known) fail(ErrorKind::InvalidInput, "step: tail breaks monotonicity at the horizon");
  }
  if (!tail && horizon == kInf && levels.back() < kInf)
    fail(ErrorKind::NotInfinitesimal, "step: bounded above on an unlimited horizon");
  return GFunction(std::make_shared<const Node>(GStep{std::move(knots), std::move(levels), horizon, std::move(tail)}));
}

inline GFunction GFunction::shifted(const GFunction& base, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::InvalidInput, "shift: a and b must be finite");
  if (a == 0.0 && b == 0.0) return base;
  if (const auto* s = std::get_if<GShift>(base.node_.get()))
    return shifted(s->base, s->a + a, s->b + b);
  return GFunction(std::make_shared<const Node>(GShift{base, a, b}));
}

inline GFunction GFunction::minimum(const GFunction& f, const GFunction& g) {
  if (f.node_ == g.node_) return f;
  return GFunction(std::make_shared<const Node>(GMin{f, g}));
}

inline GFunction GFunction::maximum(const GFunction& f, const GFunction& g) {
  if (f.node_ == g.node_) return f;
  return GFunction(std::make_shared<const Node>(GMax{f, g}));
}

inline double GFunction::operator()(double t) const {
  return std::visit(
      overloaded{
          [t](const GPowerLog& n) {
            const auto& p = n.params;
            const double L = log_exp_plus(t, p.offset);
            double v = -std::log(p.scale) + p.p * L;
            if (p.q != 0.0) v += p.q * std::log(L);
            return v;
          },
          [t](const GExponential& n) { return -std::log(n.params.scale) + n.params.alpha * std::exp(t); },
          [t](const GLinear& n) { return n.params.intercept + n.params.slope * std::max(t, 0.0); },
          [t](const GStep& n) {
            if (t >= n.horizon) {
              if (n.tail) return (*n.tail)(t);
              std::ostringstream os;
              os << "step evaluated at t=" << t << " past its horizon " << n.horizon;
              fail(ErrorKind::HorizonExceeded, os.str());
            }
            return n.level_at(t);
          },
          [t](const GShift& n) { return n.b + n.base(t - n.a); },
          [t](const GMin& n) { return std::min(n.f(t), n.g(t)); },
          [t](const GMax& n) { return std::max(n.f(t), n.g(t)); },
      },
      *node_);
}

inline double GFunction::horizon() const {
  return std::visit(overloaded{
                        [](const GStep& n) { return n.tail ? n.tail->horizon() : n.horizon; },
                        [](const GShift& n) { return n.base.horizon() + n.a; },
                        [](const GMin& n) { return std::min(n.f.horizon(), n.g.horizon()); },
                        [](const GMax& n) { return std::min(n.f.horizon(), n.g.horizon()); },
                        [](const auto&) { return kInf; },
                    },
                    *node_);
}

inline double GFunction::support_end() const {
  return std::visit(overloaded{
                        [](const GStep& n) {
                          for (std::size_t i = 0; i < n.levels.size(); ++i) {
                            if (n.levels[i] < kInf) continue;
                            const double start = i == 0 ? -kInf : n.knots[i - 1];
                            if (start < n.horizon) return start;
                            break;
                          }
                          return n.tail ? std::max(n.horizon, n.tail->support_end()) : kInf;
                        },
                        [](const GShift& n) { return n.base.support_end() + n.a; },
                        [](const GMin& n) { return std::max(n.f.support_end(), n.g.support_end()); },
                        [](const GMax& n) { return std::min(n.f.support_end(), n.g.support_end()); },
                        [](const auto&) { return kInf; },
                    },
                    *node_);
}

inline bool GFunction::piecewise_constant() const {
  return std::visit(overloaded{
                        [](const GStep& n) { return !n.tail || n.tail->piecewise_constant(); },
                        [](const GShift& n) { return n.base.piecewise_constant(); },
                        [](const GMin& n) { return n.f.piecewise_constant() && n.g.piecewise_constant(); },
                        [](const GMax& n) { return n.f.piecewise_constant() && n.g.piecewise_constant(); },
                        [](const auto&) { return false; },
                    },
                    *node_);
}

inline std::optional<Expansion> GFunction::expansion() const {
  return std::visit(
      overloaded{
          [](const GPowerLog& n) -> std::optional<Expansion> {
            return Expansion{0.0, n.params.p, n.params.q, -std::log(n.params.scale)};
          },
          [](const GExponential& n) -> std::optional<Expansion> {
            return Expansion{n.params.alpha, 0.0, 0.0, -std::log(n.params.scale)};
          },
          [](const GLinear& n) -> std::optional<Expansion> {
            return Expansion{0.0, n.params.slope, 0.0, n.params.intercept};
          },
          [](const GStep&) -> std::optional<Expansion> { return std::nullopt; },
          [](const GShift& n) -> std::optional<Expansion> {
            auto e = n.base.expansion();
            if (!e) return std::nullopt;
            e->exp_rate *= std::exp(-n.a);
            e->constant += n.b - e->slope * n.a;
            return e;
          },
          [](const GMin& n) -> std::optional<Expansion> {
            auto ef = n.f.expansion(), eg = n.g.expansion();
            if (!ef || !eg) return std::nullopt;
            const int c = compare_growth(*ef, *eg);
            if (c == 0) return Expansion{ef->exp_rate, ef->slope, ef->log_coef, std::min(ef->constant, eg->constant)};
            return c < 0 ? ef : eg;
          },
          [](const GMax& n) -> std::optional<Expansion> {
            auto ef = n.f.expansion(), eg = n.g.expansion();
            if (!ef || !eg) return std::nullopt;
            const int c = compare_growth(*ef, *eg);
            if (c == 0) return Expansion{ef->exp_rate, ef->slope, ef->log_coef, std::max(ef->constant, eg->constant)};
            return c > 0 ? ef : eg;
          },
      },
      *node_);
}

inline void GFunction::collect_knots(double lo, double hi, std::vector<double>& out) const {
  std::visit(overloaded{
                 [&](const GLinear&) {
                   if (lo <= 0.0 && 0.0 <= hi) out.push_back(0.0);
                 },
                 [&](const GStep& n) {
                   auto first = std::lower_bound(n.knots.begin(), n.knots.end(), lo);
                   for (auto it = first; it != n.knots.end() && *it <= hi; ++it) out.push_back(*it);
                   if (n.tail) {
                     if (lo <= n.horizon && n.horizon <= hi) out.push_back(n.horizon);
                     n.tail->collect_knots(std::max(lo, n.horizon), hi, out);
                   }
                 },
                 [&](const GShift& n) {
                   const std::size_t start = out.size();
                   n.base.collect_knots(lo - n.a, hi - n.a, out);
                   for (std::size_t i = start; i < out.size(); ++i) out[i] += n.a;
                 },
                 [&](const GMin& n) {
                   n.f.collect_knots(lo, hi, out);
                   n.g.collect_knots(lo, hi, out);
                 },
                 [&](const GMax& n) {
                   n.f.collect_knots(lo, hi, out);
                   n.g.collect_knots(lo, hi, out);
                 },
                 [](const auto&) {},
             },
             *node_);
}

inline double GFunction::first_reach_closed(double v) const {
  return std::visit(
      overloaded{
          [v](const GPowerLog& n) {
            const auto& p = n.params;
            const double target = v + std::log(p.scale);
            const double L0 = std::log(p.offset);
            auto h = [&](double L) { return p.p * L + (p.q != 0.0 ? p.q * std::log(L) : 0.0) - target; };
            if (h(L0) >= 0.0) return -kInf;
            double L = 0.0;
            if (p.q == 0.0) {
              L = target / p.p;
            } else {
              double lo = L0, hi = std::max(2.0 * L0, 1.0);
              while (h(hi) < 0.0) {
                lo = hi;
                hi *= 2.0;
                if (hi > 1e300) return kInf;
              }
              for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
                const double mid = 0.5 * (lo + hi);
                (h(mid) >= 0.0 ? hi : lo) = mid;
              }
              L = hi;
            }
            // t = log(e^L - offset)
            return L + std::log1p(-p.offset * std::exp(-L));
          },
          [v](const GExponential& n) {
            const double r = (v + std::log(n.params.scale)) / n.params.alpha;
            return r <= 0.0 ? -kInf : std::log(r);
          },
          [v](const GLinear& n) {
            if (v <= n.params.intercept) return -kInf;
            return (v - n.params.intercept) / n.params.slope;
          },
          [v](const GStep& n) {
            const auto it = std::lower_bound(n.levels.begin(), n.levels.end(), v);
            if (it != n.levels.end()) {
              const auto i = static_cast<std::size_t>(it - n.levels.begin());
              const double t = i == 0 ? -kInf : n.knots[i - 1];
              if (t < n.horizon) return t;
            }
            if (n.tail) return std::max(n.horizon, n.tail->first_reach(v));
            return kInf;
          },
          [v](const GShift& n) { return n.base.first_reach(v - n.b) + n.a; },
          [v](const GMin& n) { return std::max(n.f.first_reach(v), n.g.first_reach(v)); },
          [v](const GMax& n) { return std::min(n.f.first_reach(v), n.g.first_reach(v)); },
      },
      *node_);
}

inline double GFunction::first_reach(double v) const {
  double t = first_reach_closed(v);
  if (!std::isfinite(t)) return t;
  // Closed forms can be off by a few ulps; restore g(t) >= v with a tight bracket.
  auto ok = [&](double s) {
    try {
      return (*this)(s) >= v;
    } catch (const Error&) {
      return false;
    }
  };
  if (ok(t) && !ok(std::nextafter(t, -kInf))) return t;
  double width = 1e-12 * std::max(1.0, std::abs(t));
  double lo = t, hi = t;
  while (ok(lo)) {
    lo = t - width;
    width *= 2.0;
    if (width > 1e6 * std::max(1.0, std::abs(t))) return t;
  }
  width = 1e-12 * std::max(1.0, std::abs(t));
  while (!ok(hi)) {
    hi = t + width;
    width *= 2.0;
    if (width > 1e6 * std::max(1.0, std::abs(t))) return kInf;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline std::string GFunction::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
                 [&](const GPowerLog& n) {
                   os << "power_log(scale=" << n.params.scale << ", p=" << n.params.p << ", q=" << n.params.q
                      << ", offset=" << n.params.offset << ")";
                 },
                 [&](const GExponential& n) {
                   os << "exponential(scale=" << n.params.scale << ", alpha=" << n.params.alpha << ")";
                 },
                 [&](const GLinear& n) {
                   os << "linear(slope=" << n.params.slope << ", intercept=" << n.params.intercept << ")";
                 },
                 [&](const GStep& n) {
                   os << "step(" << n.knots.size() << " knots, horizon=" << n.horizon << (n.tail ? ", tail" : "")
                      << ")";
                 },
                 [&](const GShift& n) { os << n.b << " + (" << n.base.describe() << ")(t - " << n.a << ")"; },
                 [&](const GMin& n) { os << "min(" << n.f.describe() << ", " << n.g.describe() << ")"; },
                 [&](const GMax& n) { os << "max(" << n.f.describe() << ", " << n.g.describe() << ")"; },
             },
             *node_);
  return os.str();
}

}  // namespace singtrace
