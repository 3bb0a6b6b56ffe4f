#pragma once

// The integral eigenvalue function S: cumulative integral of mu when mu is
// not integrable, tail integral when it is. Everything runs in logarithmic
// coordinates t = log x so that horizons like x = e^(10^5) stay representable.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "singtrace/eigenvalue_function.hpp"
#include "singtrace/fn_core.hpp"
#include "singtrace/gfunction.hpp"

namespace singtrace {

enum class TraceClass { TraceClass, NotTraceClass, Undecided };
enum class VerdictBasis { Exact, TailModel, HorizonOnly };

inline constexpr std::string_view to_string(TraceClass v) {
  switch (v) {
    case TraceClass::TraceClass: return "trace_class";
    case TraceClass::NotTraceClass: return "not_trace_class";
    case TraceClass::Undecided: return "undecided";
  }
  return "unknown";
}

inline constexpr std::string_view to_string(VerdictBasis b) {
  switch (b) {
    case VerdictBasis::Exact: return "exact";
    case VerdictBasis::TailModel: return "tail_model";
    case VerdictBasis::HorizonOnly: return "horizon_only";
  }
  return "unknown";
}

struct TraceClassVerdict {
  TraceClass verdict = TraceClass::Undecided;
  VerdictBasis basis = VerdictBasis::HorizonOnly;

  bool operator==(const TraceClassVerdict&) const = default;
};

enum class Branch { Up, Down };

inline constexpr std::string_view to_string(Branch b) { return b == Branch::Up ? "up" : "down"; }

namespace detail {

inline bool integrable(const Expansion& e) {
  if (e.exp_rate > 0.0) return true;
  if (e.slope != 1.0) return e.slope > 1.0;
  return e.log_coef > 1.0;
}

inline VerdictBasis weaker(VerdictBasis a, VerdictBasis b) { return std::max(a, b); }

}  // namespace detail

inline TraceClassVerdict is_trace_class(const GFunction& g) {
  using TC = TraceClass;
  using VB = VerdictBasis;
  if (g.finite_rank()) return {TC::TraceClass, VB::Exact};
  if (auto e = g.expansion()) return {detail::integrable(*e) ? TC::TraceClass : TC::NotTraceClass, VB::Exact};
  return std::visit(overloaded{
                        [](const GStep& n) -> TraceClassVerdict {
                          if (!n.tail) return {TC::Undecided, VB::HorizonOnly};
                          auto v = is_trace_class(*n.tail);
                          if (v.verdict != TC::Undecided) v.basis = detail::weaker(v.basis, VB::TailModel);
                          return v;
                        },
                        [](const GShift& n) { return is_trace_class(n.base); },
                        [](const GMin& n) -> TraceClassVerdict {
                          // mu = max(mu_f, mu_g): integrable iff both are
                          const auto a = is_trace_class(n.f), b = is_trace_class(n.g);
                          if (a.verdict == TC::NotTraceClass) return a;
                          if (b.verdict == TC::NotTraceClass) return b;
                          if (a.verdict == TC::TraceClass && b.verdict == TC::TraceClass)
                            return {TC::TraceClass, detail::weaker(a.basis, b.basis)};
                          return {TC::Undecided, VB::HorizonOnly};
                        },
                        [](const GMax& n) -> TraceClassVerdict {
                          // mu = min(mu_f, mu_g): integrable if either is
                          const auto a = is_trace_class(n.f), b = is_trace_class(n.g);
                          if (a.verdict == TC::TraceClass) return a;
                          if (b.verdict == TC::TraceClass) return b;
                          return {TC::Undecided, VB::HorizonOnly};
                        },
                        [](const auto&) -> TraceClassVerdict { return {TC::Undecided, VB::HorizonOnly}; },
                    },
                    g.node());
}

inline TraceClassVerdict is_trace_class(const EigenvalueFunction& mu) { return is_trace_class(g_transform(mu)); }

namespace detail {

/// log(1 - e^-d) for d > 0.
inline double log1mexp(double d) {
  if (d <= 0.0) return -kInf;
  if (d == kInf) return 0.0;
  return d < 0.6931471805599453 ? std::log(-std::expm1(-d)) : std::log1p(-std::exp(-d));
}

/// log(e^y - 1) for y > 0.
inline double log_expm1(double y) { return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y)); }

inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

/// log(e^a - e^b), a >= b.
inline double log_sub(double a, double b) {
  if (b == -kInf) return a;
  return a + log1mexp(a - b);
}

/// u - g(u), the log of the x-domain integrand in u = log x, arranged so the
/// linear parts cancel symbolically rather than in floating point.
inline double log_integrand(const GFunction& g, double u) {
  return std::visit(overloaded{
                        [u](const GPowerLog& n) {
                          const auto& p = n.params;
                          const double L = log_exp_plus(u, p.offset);
                          const double lin = u > 0.0 ? (1.0 - p.p) * u - p.p * std::log1p(p.offset * std::exp(-u))
                                                     : u - p.p * L;
                          return std::log(p.scale) + lin - (p.q != 0.0 ? p.q * std::log(L) : 0.0);
                        },
                        [u](const GExponential& n) {
                          return u + std::log(n.params.scale) - n.params.alpha * std::exp(u);
                        },
                        [u](const GLinear& n) {
                          const auto& p = n.params;
                          return u > 0.0 ? (1.0 - p.slope) * u - p.intercept : u - p.intercept;
                        },
                        [&g, u](const GStep& n) {
                          if (n.tail && u >= n.horizon) return log_integrand(*n.tail, u);
                          return u - g(u);
                        },
                        [u](const GShift& n) { return n.a - n.b + log_integrand(n.base, u - n.a); },
                        [u](const GMin& n) { return std::max(log_integrand(n.f, u), log_integrand(n.g, u)); },
                        [u](const GMax& n) { return std::min(log_integrand(n.f, u), log_integrand(n.g, u)); },
                    },
                    g.node());
}

class LogIntegralImpl {
 public:
  explicit LogIntegralImpl(GFunction g) : g_(std::move(g)) {}
  virtual ~LogIntegralImpl() = default;
  virtual double log_S(double t) const = 0;
  virtual double log_mu_over_S(double t) const { return t - g_(t) - log_S(t); }
  virtual double log_ratio(double t, double log_lambda) const { return log_S(t + log_lambda) - log_S(t); }
  const GFunction& g() const { return g_; }

 protected:
  GFunction g_;
};

std::unique_ptr<LogIntegralImpl> make_log_integral(const GFunction& g, Branch branch);

class PowerLawIntegral final : public LogIntegralImpl {
 public:
  PowerLawIntegral(GFunction g, PowerLogParams p, Branch b) : LogIntegralImpl(std::move(g)), p_(p), branch_(b) {}

  double log_S(double t) const override {
    const double C = p_.scale, p = p_.p, a = p_.offset;
    const double Lx = log_exp_plus(t, a);
    if (branch_ == Branch::Down) return std::log(C) + (1.0 - p) * Lx - std::log(p - 1.0);
    const double D = t < 30.0 ? std::log1p(std::exp(t) / a) : Lx - std::log(a);
    if (p == 1.0) return std::log(C) + std::log(D);
    return std::log(C) + (1.0 - p) * std::log(a) + log_expm1((1.0 - p) * D) - std::log(1.0 - p);
  }

 private:
  PowerLogParams p_;
  Branch branch_;
};

class ExponentialIntegral final : public LogIntegralImpl {
 public:
  ExponentialIntegral(GFunction g, ExponentialParams p) : LogIntegralImpl(std::move(g)), p_(p) {}
  double log_S(double t) const override { return std::log(p_.scale / p_.alpha) - p_.alpha * std::exp(t); }
  double log_mu_over_S(double t) const override { return t + std::log(p_.alpha); }
  double log_ratio(double t, double ll) const override { return -p_.alpha * std::exp(t) * std::expm1(ll); }

 private:
  ExponentialParams p_;
};

class LinearIntegral final : public LogIntegralImpl {
 public:
  LinearIntegral(GFunction g, LinearParams p, Branch b) : LogIntegralImpl(std::move(g)), p_(p), branch_(b) {}

  double log_S(double t) const override {
    const double c = p_.intercept, s = p_.slope;
    if (branch_ == Branch::Down) {
      if (t >= 0.0) return -c + (1.0 - s) * t - std::log(s - 1.0);
      return -c + std::log(-std::expm1(t) + 1.0 / (s - 1.0));
    }
    if (t <= 0.0) return -c + t;
    if (s == 1.0) return -c + std::log1p(t);
    const double y = (1.0 - s) * t;
    return -c + y + std::log1p(-s * std::exp(-y)) - std::log(1.0 - s);
  }

 private:
  LinearParams p_;
  Branch branch_;
};

/// Exact sums over the flat pieces of a step in g-coordinates.
class StepIntegral final : public LogIntegralImpl {
 public:
  StepIntegral(GFunction g, const GStep& n, Branch b) : LogIntegralImpl(std::move(g)), branch_(b) {
    horizon_ = n.horizon;
    // segment i: level levels[i] on [start_i, end_i), clipped to the horizon
    const std::size_t m = n.levels.size();
    for (std::size_t i = 0; i < m; ++i) {
      const double s = i == 0 ? -kInf : n.knots[i - 1];
      const double e = i + 1 < m ? n.knots[i] : kInf;
      if (s >= horizon_) break;
      starts_.push_back(s);
      ends_.push_back(std::min(e, horizon_));
      levels_.push_back(n.levels[i]);
    }
    const std::size_t k = levels_.size();
    piece_.resize(k);
    for (std::size_t i = 0; i < k; ++i) piece_[i] = segment(i, starts_[i], ends_[i]);
    prefix_.assign(k + 1, -kInf);
    for (std::size_t i = 0; i < k; ++i) prefix_[i + 1] = log_add(prefix_[i], piece_[i]);
    suffix_.assign(k + 1, -kInf);
    for (std::size_t i = k; i-- > 0;) suffix_[i] = log_add(suffix_[i + 1], piece_[i]);
    if (n.tail) tail_ = make_log_integral(*n.tail, b);
  }

  double log_S(double t) const override {
    if (t >= horizon_) {
      if (!tail_) fail(ErrorKind::HorizonExceeded, "integral past the horizon of a step without tail model");
      if (branch_ == Branch::Down) return tail_->log_S(t);
      return log_add(prefix_.back(), log_sub(tail_->log_S(t), tail_->log_S(horizon_)));
    }
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - starts_.begin()) - 1;
    if (branch_ == Branch::Up) return log_add(prefix_[i], segment(i, starts_[i], t));
    double v = log_add(segment(i, t, ends_[i]), suffix_[i + 1]);
    if (tail_) v = log_add(v, tail_->log_S(horizon_));
    else if (horizon_ < kInf) fail(ErrorKind::HorizonExceeded, "tail integral of a horizon-limited step");
    return v;
  }

 private:
  /// log of the integral of e^(u - level_i) over [s, e).
  double segment(std::size_t i, double s, double e) const {
    const double level = levels_[i];
    if (level == kInf || !(e > s)) return -kInf;
    if (e == kInf) fail(ErrorKind::NotInfinitesimal, "step integral over an unbounded flat");
    if (s == -kInf) return e - level;
    return -level + e + log1mexp(e - s);
  }

  Branch branch_;
  double horizon_ = kInf;
  std::vector<double> starts_, ends_, levels_, piece_, prefix_, suffix_;
  std::unique_ptr<LogIntegralImpl> tail_;
};

class ShiftIntegral final : public LogIntegralImpl {
 public:
  ShiftIntegral(GFunction g, const GShift& n, Branch b)
      : LogIntegralImpl(std::move(g)), a_(n.a), b_(n.b), base_(make_log_integral(n.base, b)) {}
  double log_S(double t) const override { return a_ - b_ + base_->log_S(t - a_); }
  double log_mu_over_S(double t) const override { return base_->log_mu_over_S(t - a_); }
  double log_ratio(double t, double ll) const override { return base_->log_ratio(t - a_, ll); }

 private:
  double a_, b_;
  std::unique_ptr<LogIntegralImpl> base_;
};

/// Adaptive Gauss-Kronrod in u = log x on unit cells (split at knots), with a
/// cached cumulative table on [kTableLo, kTableHi] and interval doubling for
/// the tail integral.
class QuadratureIntegral final : public LogIntegralImpl {
 public:
  static constexpr double kTableLo = -40.0;
  static constexpr double kTableHi = 1200.0;
  static constexpr double kRelTol = 1e-12;

  QuadratureIntegral(GFunction g, Branch b) : LogIntegralImpl(std::move(g)), branch_(b) {
    const int n = static_cast<int>(kTableHi - kTableLo);
    nodes_.resize(n + 1);
    for (int i = 0; i <= n; ++i) nodes_[i] = kTableLo + i;
    table_.assign(nodes_.size(), -kInf);
    if (branch_ == Branch::Up) {
      table_[0] = lower_end(kTableLo);
      for (std::size_t i = 1; i < nodes_.size(); ++i) table_[i] = log_add(table_[i - 1], piece(nodes_[i - 1], nodes_[i]));
    } else {
      table_.back() = upper_tail(kTableHi);
      for (std::size_t i = nodes_.size() - 1; i-- > 0;) table_[i] = log_add(table_[i + 1], piece(nodes_[i], nodes_[i + 1]));
    }
  }

  double log_S(double t) const override {
    if (branch_ == Branch::Up) {
      if (t <= kTableLo) return lower_end(t);
      if (t >= kTableHi) return log_add(table_.back(), piece(kTableHi, t));
      const auto i = static_cast<std::size_t>(std::floor(t - kTableLo));
      return log_add(table_[i], piece(nodes_[i], t));
    }
    if (t >= kTableHi) return upper_tail(t);
    if (t <= kTableLo) return log_add(table_.front(), piece(t, kTableLo));
    const auto i = static_cast<std::size_t>(std::floor(t - kTableLo));
    return log_add(piece(t, nodes_[i + 1]), table_[i + 1]);
  }

 private:
  double phi(double u) const { return log_integrand(g_, u); }

  /// Integral over (-inf, t]: g is flat to leading order far left.
  double lower_end(double t) const { return phi(t); }

  double piece(double lo, double hi) const {
    if (!(hi > lo)) return -kInf;
    std::vector<double> cuts{lo, hi};
    g_.collect_knots(lo, hi, cuts);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double acc = -kInf;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc = log_add(acc, smooth_piece(cuts[i], cuts[i + 1]));
    return acc;
  }

  double smooth_piece(double lo, double hi) const {
    if (!(hi > lo)) return -kInf;
    const double mid = 0.5 * (lo + hi);
    // right-continuous jumps at lo are fine; step just inside hi for the left limit
    const double hi_in = std::nextafter(hi, lo);
    const double ref = std::max({phi(lo), phi(mid), phi(hi_in)});
    if (ref == -kInf) return -kInf;
    auto f = [&](double u) {
      const double v = phi(u) - ref;
      return std::isnan(v) ? 0.0 : std::exp(v);
    };
    double err = 0.0;
    const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 15, kRelTol, &err);
    if (!(val >= 0.0)) fail(ErrorKind::QuadratureFailure, "non-finite quadrature result");
    return val == 0.0 ? -kInf : ref + std::log(val);
  }

  /// Integral over [t, inf) by doubling cells until the remainder is negligible.
  double upper_tail(double t) const {
    double acc = -kInf;
    double lo = t, width = 1.0;
    int small = 0;
    for (int k = 0; k < 400; ++k) {
      const double hi = lo + width;
      const double p = piece(lo, hi);
      acc = log_add(acc, p);
      small = (p < acc - 40.0 && phi(hi) <= phi(lo)) ? small + 1 : 0;
      if (small >= 3 || (acc == -kInf && phi(hi) == -kInf)) return acc;
      lo = hi;
      width *= 2.0;
    }
    fail(ErrorKind::QuadratureFailure, "tail integral did not converge");
  }

  Branch branch_;
  std::vector<double> nodes_, table_;
};

inline std::unique_ptr<LogIntegralImpl> make_log_integral(const GFunction& g, Branch branch) {
  return std::visit(overloaded{
                        [&](const GPowerLog& n) -> std::unique_ptr<LogIntegralImpl> {
                          if (n.params.q == 0.0) return std::make_unique<PowerLawIntegral>(g, n.params, branch);
                          return std::make_unique<QuadratureIntegral>(g, branch);
                        },
                        [&](const GExponential& n) -> std::unique_ptr<LogIntegralImpl> {
                          if (branch == Branch::Up) fail(ErrorKind::InvalidInput, "exponential has no up branch");
                          return std::make_unique<ExponentialIntegral>(g, n.params);
                        },
                        [&](const GLinear& n) -> std::unique_ptr<LogIntegralImpl> {
                          return std::make_unique<LinearIntegral>(g, n.params, branch);
                        },
                        [&](const GStep& n) -> std::unique_ptr<LogIntegralImpl> {
                          return std::make_unique<StepIntegral>(g, n, branch);
                        },
                        [&](const GShift& n) -> std::unique_ptr<LogIntegralImpl> {
                          return std::make_unique<ShiftIntegral>(g, n, branch);
                        },
                        [&](const auto&) -> std::unique_ptr<LogIntegralImpl> {
                          return std::make_unique<QuadratureIntegral>(g, branch);
                        },
                    },
                    g.node());
}

}  // namespace detail

/// S in logarithmic coordinates for one function and one branch. Immutable
/// after construction; safe to share between threads.
class LogIntegral {
 public:
  LogIntegral(const GFunction& g, Branch branch)
      : branch_(branch), support_end_(g.support_end()), impl_(detail::make_log_integral(g, branch)) {}

  Branch branch() const { return branch_; }
  const GFunction& g() const { return impl_->g(); }

  /// log S(e^t).
  double log_S(double t) const { return impl_->log_S(t); }
  /// log of x mu(x) / S(x) at x = e^t.
  double log_mu_over_S(double t) const {
    check_support(t);
    return impl_->log_mu_over_S(t);
  }
  /// log of S(lambda x) / S(x) at x = e^t.
  double log_ratio(double t, double log_lambda) const {
    check_support(t + std::max(log_lambda, 0.0));
    return impl_->log_ratio(t, log_lambda);
  }

 private:
  void check_support(double t) const {
    if (branch_ == Branch::Down && t >= support_end_)
      fail(ErrorKind::SupportExceeded, "S vanishes past the support of a finite-rank function");
  }

  Branch branch_;
  double support_end_;
  std::shared_ptr<const detail::LogIntegralImpl> impl_;
};

struct IntegralBranch {
  Branch kind;
  TraceClassVerdict verdict;
};

inline IntegralBranch integral_branch(const EigenvalueFunction& mu) {
  const auto v = is_trace_class(mu);
  if (v.verdict == TraceClass::Undecided)
    fail(ErrorKind::UndecidedBranch, "trace-class status is undecided on the available horizon");
  return {v.verdict == TraceClass::TraceClass ? Branch::Down : Branch::Up, v};
}

namespace detail {

/// Exact S for an x-domain step: finite sums in linear arithmetic.
inline double step_S(const Step& f, Branch b, double x) {
  double up = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double lo = f.breakpoints[i], hi = f.breakpoints[i + 1];
    if (x > lo) up += f.values[i] * (std::min(x, hi) - lo);
  }
  if (b == Branch::Up) return up;
  double down = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double lo = f.breakpoints[i], hi = f.breakpoints[i + 1];
    if (hi > x) down += f.values[i] * (hi - std::max(x, lo));
  }
  return down;
}

}  // namespace detail

/// S(x): S-up when mu is not integrable, S-down when it is.
inline double S(const EigenvalueFunction& mu, double x) {
  if (!(x > 0.0)) fail(ErrorKind::InvalidInput, "S needs x > 0");
  const auto br = integral_branch(mu);
  if (const auto* st = std::get_if<Step>(&mu.repr())) return detail::step_S(*st, br.kind, x);
  return std::exp(LogIntegral(g_transform(mu), br.kind).log_S(std::log(x)));
}

/// S(lambda x) / S(x).
inline double s_ratio(const EigenvalueFunction& mu, double lambda, double x) {
  if (!(lambda > 1.0)) fail(ErrorKind::InvalidInput, "s_ratio needs lambda > 1");
  if (!(x > 0.0)) fail(ErrorKind::InvalidInput, "s_ratio needs x > 0");
  const auto br = integral_branch(mu);
  if (const auto* st = std::get_if<Step>(&mu.repr())) {
    const double den = detail::step_S(*st, br.kind, x);
    if (den == 0.0) fail(br.kind == Branch::Down ? ErrorKind::SupportExceeded : ErrorKind::ZeroDenominator, "S(x) = 0");
    return detail::step_S(*st, br.kind, lambda * x) / den;
  }
  return std::exp(LogIntegral(g_transform(mu), br.kind).log_ratio(std::log(x), std::log(lambda)));
}

/// x mu(x) / S(x).
inline double mu_over_S(const EigenvalueFunction& mu, double x) {
  if (!(x > 0.0)) fail(ErrorKind::InvalidInput, "mu_over_S needs x > 0");
  const auto br = integral_branch(mu);
  if (const auto* st = std::get_if<Step>(&mu.repr())) {
    const double den = detail::step_S(*st, br.kind, x);
    if (den == 0.0) {
      if (br.kind == Branch::Up || st->values.empty()) fail(ErrorKind::ZeroDenominator, "mu vanishes identically before x");
      fail(ErrorKind::SupportExceeded, "S vanishes past the support of a finite-rank function");
    }
    return x * mu(x) / den;
  }
  if (mu.finite_rank() && g_transform(mu).support_end() == -kInf)
    fail(ErrorKind::ZeroDenominator, "mu vanishes identically before x");
  return std::exp(LogIntegral(g_transform(mu), br.kind).log_mu_over_S(std::log(x)));
}

}  // namespace singtrace
