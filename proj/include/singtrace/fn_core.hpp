#pragma once

// Rearrangement of spectral data, the order-reversing bijection M <-> G,
// and the group actions (dilation on M, shifts on G).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "singtrace/eigenvalue_function.hpp"
#include "singtrace/gfunction.hpp"

namespace singtrace {

/// Non-increasing rearrangement: values sorted descending, each occupying an
/// interval as long as its weight. Equal values merge; zero values vanish
/// into the zero tail. Empty data gives the zero (finite-rank) function.
inline EigenvalueFunction rearrange(const SpectralData& data) {
  data.validate();
  std::vector<SpectralPair> sorted = data.pairs;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SpectralPair& a, const SpectralPair& b) { return a.value > b.value; });
  std::vector<double> breakpoints{0.0};
  std::vector<double> values;
  std::size_t i = 0;
  while (i < sorted.size() && sorted[i].value > 0.0) {
    const double v = sorted[i].value;
    double w = 0.0;
    for (; i < sorted.size() && sorted[i].value == v; ++i) w += sorted[i].weight;
    values.push_back(v);
    breakpoints.push_back(breakpoints.back() + w);
  }
  return EigenvalueFunction::step(std::move(breakpoints), std::move(values));
}

/// g(t) = -log mu(e^t), keeping closed forms closed.
inline GFunction g_transform(const EigenvalueFunction& mu) {
  return std::visit(
      overloaded{
          [](const PowerLog& f) { return GFunction::power_log(f.params); },
          [](const Exponential& f) { return GFunction::exponential(f.params); },
          [](const Step& f) {
            std::vector<double> knots, levels;
            for (std::size_t i = 1; i < f.breakpoints.size(); ++i) knots.push_back(std::log(f.breakpoints[i]));
            for (double v : f.values) levels.push_back(-std::log(v));
            levels.push_back(kInf);
            return GFunction::step(std::move(knots), std::move(levels));
          },
          [](const Sampled& f) {
            std::vector<double> knots, levels;
            for (std::size_t i = 1; i < f.grid.size(); ++i) knots.push_back(std::log(f.grid[i]));
            for (double v : f.values) levels.push_back(v > 0.0 ? -std::log(v) : kInf);
            const double horizon = std::log(f.grid.back());
            std::optional<GFunction> tail;
            if (f.tail) tail = g_transform(*f.tail);
            return GFunction::step(std::move(knots), std::move(levels), horizon, std::move(tail));
          },
          [](const FromG& f) { return f.g; },
      },
      mu.repr());
}

/// mu(x) = exp(-g(log x)). Returns closed forms where the tree is a bare
/// family node and a finite-rank step when g encodes one exactly.
inline EigenvalueFunction g_inverse(const GFunction& g) {
  if (!g.horizon_limited() && !g.finite_rank() && !g.expansion()) {
    // Unbounded-above check for compound trees on the checkable range.
    bool grows = false;
    for (double t = 8.0; t <= 4096.0 && !grows; t *= 2.0) grows = g(t) > g(t / 2.0);
    if (!grows) fail(ErrorKind::NotInfinitesimal, "g is bounded above on the checkable range");
  }
  return std::visit(overloaded{
                        [](const GPowerLog& n) { return EigenvalueFunction::power_log(n.params); },
                        [](const GExponential& n) { return EigenvalueFunction::exponential(n.params); },
                        [&g](const GStep& n) {
                          const bool exact_step = !n.tail && n.horizon == kInf;
                          if (!exact_step) return EigenvalueFunction::from_g(g);
                          std::vector<double> breakpoints{0.0}, values;
                          for (std::size_t i = 0; i < n.knots.size(); ++i) {
                            if (n.levels[i] == kInf) break;
                            breakpoints.push_back(std::exp(n.knots[i]));
                            values.push_back(std::exp(-n.levels[i]));
                          }
                          if (n.levels[breakpoints.size() - 1] < kInf) return EigenvalueFunction::from_g(g);
                          return EigenvalueFunction::step(std::move(breakpoints), std::move(values));
                        },
                        [&g](const auto&) { return EigenvalueFunction::from_g(g); },
                    },
                    g.node());
}

/// b + g(t - a).
inline GFunction shift(const GFunction& g, double a, double b) { return GFunction::shifted(g, a, b); }

inline GFunction pointwise_min(const GFunction& f, const GFunction& g) { return GFunction::minimum(f, g); }

inline GFunction pointwise_max(const GFunction& f, const GFunction& g) { return GFunction::maximum(f, g); }

/// D_lambda mu(t) = lambda * mu(lambda t). In g-coordinates this is the shift
/// t -> -log(lambda) + g(t + log(lambda)).
inline EigenvalueFunction dilate(const EigenvalueFunction& mu, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::NonpositiveLambda, "dilation needs lambda > 0");
  if (lambda == 1.0) return mu;
  return std::visit(
      overloaded{
          [&](const PowerLog& f) {
            if (f.params.q != 0.0) {
              const double l = std::log(lambda);
              return EigenvalueFunction::from_g(shift(g_transform(mu), -l, -l));
            }
            PowerLogParams p = f.params;
            p.scale *= std::pow(lambda, 1.0 - p.p);
            p.offset /= lambda;
            return EigenvalueFunction::power_log(p);
          },
          [&](const Exponential& f) {
            return EigenvalueFunction::exponential({f.params.scale * lambda, f.params.alpha * lambda});
          },
          [&](const Step& f) {
            std::vector<double> b = f.breakpoints, v = f.values;
            for (double& x : b) x /= lambda;
            for (double& y : v) y *= lambda;
            return EigenvalueFunction::step(std::move(b), std::move(v));
          },
          [&](const Sampled& f) {
            std::vector<double> grid = f.grid, v = f.values;
            for (double& x : grid) x /= lambda;
            for (double& y : v) y *= lambda;
            std::optional<EigenvalueFunction> tail;
            if (f.tail) tail = dilate(*f.tail, lambda);
            return EigenvalueFunction::sampled(std::move(grid), std::move(v), tail);
          },
          [&](const FromG& f) {
            const double l = std::log(lambda);
            return EigenvalueFunction::from_g(shift(f.g, -l, -l));
          },
      },
      mu.repr());
}

struct GridCheck {
  bool ok = true;
  double where = 0.0;  ///< first offending point when !ok
};

/// Pointwise check of the M axioms on a grid: non-increasing, non-negative.
inline GridCheck check_in_M(const EigenvalueFunction& mu, const std::vector<double>& grid) {
  double prev = kInf;
  for (double x : grid) {
    const double v = mu(x);
    if (!(v >= 0.0) || v > prev) return {false, x};
    prev = v;
  }
  return {};
}

/// Pointwise check of the G axioms on a grid: non-decreasing, and +inf is absorbing.
inline GridCheck check_in_G(const GFunction& g, const std::vector<double>& grid) {
  double prev = -kInf;
  for (double t : grid) {
    const double v = g(t);
    if (std::isnan(v) || v < prev) return {false, t};
    prev = v;
  }
  return {};
}

}  // namespace singtrace
