#pragma once

// Elements of M: non-increasing, infinitesimal, right-continuous functions on
// [0, inf), together with the finite spectral data they are rearranged from.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "singtrace/error.hpp"
#include "singtrace/gfunction.hpp"

namespace singtrace {

struct SpectralPair {
  double value;   ///< spectral value of |A|
  double weight;  ///< trace of the corresponding spectral projection
};

struct SpectralData {
  std::vector<SpectralPair> pairs;
  double total_weight = kInf;

  void validate() const {
    double sum = 0.0;
    for (const auto& p : pairs) {
      if (!(p.value >= 0.0) || !std::isfinite(p.value)) fail(ErrorKind::NegativeValue, "spectral value must be >= 0");
      if (!(p.weight > 0.0) || !std::isfinite(p.weight))
        fail(ErrorKind::NonpositiveWeight, "spectral weight must be > 0");
      sum += p.weight;
    }
    if (!(total_weight > 0.0)) fail(ErrorKind::InvalidInput, "total weight must be > 0");
    if (sum > total_weight) fail(ErrorKind::InvalidInput, "weights exceed the total weight");
  }
};

/// lambda(s) = total weight of spectral values strictly above s.
class DistributionFunction {
 public:
  explicit DistributionFunction(SpectralData data) : data_(std::move(data)) { data_.validate(); }

  double operator()(double s) const {
    double w = 0.0;
    for (const auto& p : data_.pairs)
      if (p.value > s) w += p.weight;
    return w;
  }

  const SpectralData& data() const { return data_; }

 private:
  SpectralData data_;
};

class EigenvalueFunction;

struct PowerLog {
  PowerLogParams params;
};
struct Exponential {
  ExponentialParams params;
};
/// values[i] on [breakpoints[i], breakpoints[i+1]); zero from breakpoints.back() on.
struct Step {
  std::vector<double> breakpoints;
  std::vector<double> values;
};
/// values[i] on [grid[i], grid[i+1]). Past grid.back() the tail model applies;
/// without one, the function is known only below grid.back().
struct Sampled {
  std::vector<double> grid;
  std::vector<double> values;
  std::shared_ptr<const EigenvalueFunction> tail;
};
/// mu(x) = exp(-g(log x)) for an arbitrary element of G.
struct FromG {
  GFunction g;
};

enum class Representation { PowerLog, Exponential, Step, Sampled, FromG };

inline constexpr std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::PowerLog: return "power_log";
    case Representation::Exponential: return "exponential";
    case Representation::Step: return "step";
    case Representation::Sampled: return "sampled";
    case Representation::FromG: return "g_function";
  }
  return "unknown";
}

class EigenvalueFunction {
 public:
  using Repr = std::variant<PowerLog, Exponential, Step, Sampled, FromG>;

  static EigenvalueFunction power_log(const PowerLogParams& p) {
    (void)GFunction::power_log(p);  // validation
    return EigenvalueFunction(PowerLog{p});
  }
  static EigenvalueFunction power_law(double p, double offset = std::numbers::e) {
    return power_log({1.0, p, 0.0, offset});
  }
  static EigenvalueFunction exponential(const ExponentialParams& p) {
    (void)GFunction::exponential(p);
    return EigenvalueFunction(Exponential{p});
  }
  static EigenvalueFunction step(std::vector<double> breakpoints, std::vector<double> values);
  static EigenvalueFunction zero() { return EigenvalueFunction(Step{{0.0}, {}}); }
  static EigenvalueFunction sampled(std::vector<double> grid, std::vector<double> values,
                                    std::optional<EigenvalueFunction> tail = std::nullopt);
  static EigenvalueFunction from_g(const GFunction& g) { return EigenvalueFunction(FromG{g}); }

  double operator()(double x) const;

  Representation representation() const { return static_cast<Representation>(repr_.index()); }
  const Repr& repr() const { return repr_; }

  /// Eventually zero. Exact for Step; for other forms decided on the g side.
  bool finite_rank() const;

 private:
  explicit EigenvalueFunction(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

inline EigenvalueFunction EigenvalueFunction::step(std::vector<double> breakpoints, std::vector<double> values) {
  // Accept n breakpoints with n values when the last value is 0.
  if (breakpoints.size() == values.size() && !values.empty()) {
    if (values.back() != 0.0) fail(ErrorKind::NotInfinitesimal, "step: last value must be 0 when no end breakpoint");
    values.pop_back();
  }
  if (breakpoints.size() != values.size() + 1) fail(ErrorKind::InvalidInput, "step: need values.size()+1 breakpoints");
  if (breakpoints.front() != 0.0) fail(ErrorKind::InvalidInput, "step: breakpoints must start at 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]) || !std::isfinite(breakpoints[i]))
      fail(ErrorKind::InvalidInput, "step: breakpoints must be finite and strictly increasing");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) fail(ErrorKind::NegativeValue, "step: values must be >= 0");
    if (i > 0 && values[i] > values[i - 1]) fail(ErrorKind::InvalidInput, "step: values must be non-increasing");
  }
  // Canonical form: merge equal neighbours, drop the trailing zero run.
  Step s{{0.0}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) break;
    if (!s.values.empty() && s.values.back() == values[i]) {
      s.breakpoints.back() = breakpoints[i + 1];
    } else {
      s.values.push_back(values[i]);
      s.breakpoints.push_back(breakpoints[i + 1]);
    }
  }
  return EigenvalueFunction(std::move(s));
}

inline EigenvalueFunction EigenvalueFunction::sampled(std::vector<double> grid, std::vector<double> values,
                                                      std::optional<EigenvalueFunction> tail) {
  if (grid.size() != values.size() || grid.size() < 2)
    fail(ErrorKind::InvalidInput, "sampled: grid and values must match and hold at least 2 points");
  if (!(grid.front() >= 0.0)) fail(ErrorKind::InvalidInput, "sampled: grid must start at >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]) || !std::isfinite(grid[i]))
      fail(ErrorKind::InvalidInput, "sampled: grid must be finite and strictly increasing");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) fail(ErrorKind::NegativeValue, "sampled: values must be >= 0");
    if (i > 0 && values[i] > values[i - 1]) fail(ErrorKind::InvalidInput, "sampled: values must be non-increasing");
  }
  std::shared_ptr<const EigenvalueFunction> tail_ptr;
  if (tail) {
    const auto r = tail->representation();
    if (r != Representation::PowerLog && r != Representation::Exponential)
      fail(ErrorKind::InvalidInput, "sampled: tail model must be power_log or exponential");
    if ((*tail)(grid.back()) > values[values.size() - 2])
      fail(ErrorKind::InvalidInput, "sampled: tail model exceeds the last sampled value");
    tail_ptr = std::make_shared<const EigenvalueFunction>(*tail);
  }
  return EigenvalueFunction(Sampled{std::move(grid), std::move(values), std::move(tail_ptr)});
}

inline double EigenvalueFunction::operator()(double x) const {
  if (std::isnan(x) || x < 0.0) fail(ErrorKind::InvalidInput, "eigenvalue function evaluated at negative x");
  return std::visit(
      overloaded{
          [x](const PowerLog& f) {
            const auto& p = f.params;
            double v = p.scale * std::pow(x + p.offset, -p.p);
            if (p.q != 0.0) v *= std::pow(std::log(x + p.offset), -p.q);
            return v;
          },
          [x](const Exponential& f) { return f.params.scale * std::exp(-f.params.alpha * x); },
          [x](const Step& f) {
            const auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), x);
            const auto i = static_cast<std::size_t>(it - f.breakpoints.begin());
            return i == 0 || i > f.values.size() ? 0.0 : f.values[i - 1];
          },
          [x](const Sampled& f) {
            if (x >= f.grid.back()) {
              if (f.tail) return (*f.tail)(x);
              fail(ErrorKind::HorizonExceeded, "sampled function evaluated past its grid");
            }
            const auto it = std::upper_bound(f.grid.begin(), f.grid.end(), x);
            const auto i = static_cast<std::size_t>(it - f.grid.begin());
            return f.values[i == 0 ? 0 : i - 1];
          },
          [x](const FromG& f) { return std::exp(-f.g(std::log(x))); },
      },
      repr_);
}

inline bool EigenvalueFunction::finite_rank() const {
  return std::visit(overloaded{
                        [](const Step&) { return true; },
                        [](const FromG& f) { return f.g.finite_rank(); },
                        [](const auto&) { return false; },
                    },
                    repr_);
}

}  // namespace singtrace
