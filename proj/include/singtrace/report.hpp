#pragma once

// JSON reports for every result type, and a text rendering derived from the
// same JSON so both formats always carry the same verdicts and numbers.

#include <iomanip>
#include <sstream>
#include <string>

#include "singtrace/classify.hpp"
#include "singtrace/construct.hpp"
#include "singtrace/io.hpp"

namespace singtrace {

inline json to_json(const TraceClassVerdict& v) {
  return {{"verdict", std::string(to_string(v.verdict))}, {"basis", std::string(to_string(v.basis))}};
}

inline json to_json(const MatuszewskaReport& r) {
  json rows = json::array();
  for (const auto& h : r.per_h)
    rows.push_back({{"h", h.h}, {"sup", num(h.sup)}, {"inf", num(h.inf)}, {"increments", h.increments}});
  return {{"delta_lower", num(r.delta_lower)},
          {"delta_upper", num(r.delta_upper)},
          {"mode", std::string(to_string(r.mode))},
          {"horizon_used", num(r.horizon_used)},
          {"effective_h_grid", [&] {
             json h = json::array();
             for (double x : r.config.effective_h_grid(r.horizon_used > 0 ? r.horizon_used : r.config.horizon))
               h.push_back(x);
             return h;
           }()},
          {"per_h", rows},
          {"finite_rank", r.finite_rank},
          {"horizon_limited", r.horizon_limited}};
}

inline json to_json(const TraceabilityVerdict& v) {
  json w = json::array();
  for (const auto& s : v.windows) w.push_back({{"lo", s.lo}, {"hi", s.hi}, {"value", num(s.value)}, {"hits", s.hits}});
  json j{{"traceable", std::string(to_string(v.traceable))},
         {"criterion", std::string(to_string(v.criterion))},
         {"horizon_limited", v.horizon_limited},
         {"finite_rank", v.finite_rank}};
  if (v.criterion == Criterion::Indices) {
    j["delta_lower"] = num(v.delta_lower);
    j["delta_upper"] = num(v.delta_upper);
  } else {
    j["windows"] = w;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline json to_json(const ClassificationReport& r) {
  return {{"traceable", std::string(to_string(r.traceable()))},
          {"trace_class", to_json(r.trace_class)},
          {"regular", r.regular},
          {"delta", r.delta ? num(*r.delta) : json(nullptr)},
          {"indices", to_json(r.indices)},
          {"by_indices", to_json(r.by_indices)},
          {"by_liminf", to_json(r.by_liminf)},
          {"by_ratio", to_json(r.by_ratio)},
          {"agreement", r.agreement},
          {"finite_rank", r.finite_rank},
          {"horizon_limited", r.horizon_limited}};
}

inline json to_json(const IdealDecision& d) {
  json j{{"verdict", std::string(to_string(d.verdict))},
         {"mode", std::string(to_string(d.mode))},
         {"finite_rank_base", d.finite_rank_base}};
  if (d.witness) {
    const auto& w = *d.witness;
    json th = json::array();
    for (const auto& t : w.thresholds) th.push_back({{"c", t.c}, {"t0", num(t.t0)}});
    j["witness"] = {{"a", w.a}, {"b", num(w.b)}, {"t0", num(w.t0)}, {"t_end", num(w.t_end)}, {"grid_points", w.grid_points}};
    if (!w.thresholds.empty()) j["witness"]["thresholds"] = th;
  }
  if (d.refutation)
    j["refutation"] = {{"slope_a", num(d.refutation->slope_a)},
                       {"slope_b", num(d.refutation->slope_b)},
                       {"reason", d.refutation->reason}};
  if (!d.note.empty()) j["note"] = d.note;
  return j;
}

inline json to_json(const DichotomyReport& r) {
  return {{"verdict", std::string(to_string(r.verdict))},
          {"trace_class", to_json(r.trace_class)},
          {"delta_b", num(r.delta_b)},
          {"ideal_check", to_json(r.ideal_check)},
          {"consistent", r.consistent}};
}

inline json to_json(const StaircaseConstruction& s, const VerificationReport& v) {
  json th = json::array();
  for (const auto& t : v.thresholds) th.push_back({{"c", t.c}, {"t0", num(t.t0)}});
  return {{"variant", std::string(to_string(s.variant))},
          {"rule", s.rule},
          {"n_steps", s.step_values.size()},
          {"offset", s.offset},
          {"source", s.source.describe()},
          {"staircase", staircase_spec(s)},
          {"verification",
           {{"gaps_checked", v.gaps_checked},
            {"indices", to_json(v.indices)},
            {"index_config", to_json(v.indices.config)},
            {s.variant == StaircaseVariant::Vanisher ? "kernel_thresholds" : "exclusion_thresholds", th}}}};
}

inline json to_json(const LinearBoundWitness& w) {
  return {{"case", std::string(to_string(w.bound_case))}, {"eps", w.eps}, {"c", w.c}, {"c2", w.c2},
          {"t0", w.t0}, {"t_end", w.t_end}, {"t_step", w.t_step}, {"grid_points", w.grid_points}};
}

namespace detail {

inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

inline void render(const json& j, std::ostringstream& os, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    const bool numeric_array =
        v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
    if (v.is_object()) {
      os << pad << it.key() << ":\n";
      render(v, os, depth + 1);
    } else if (v.is_array() && !numeric_array) {
      os << pad << it.key() << ":\n";
      std::size_t i = 0;
      for (const auto& e : v) {
        os << pad << "  [" << i++ << "]\n";
        if (e.is_object())
          render(e, os, depth + 2);
        else
          os << pad << "    " << scalar_text(e) << "\n";
      }
    } else if (numeric_array) {
      os << pad << it.key() << ": [";
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << scalar_text(v[i]);
      os << "]\n";
    } else {
      os << pad << it.key() << ": " << scalar_text(v) << "\n";
    }
  }
}

}  // namespace detail

/// Indented key: value rendering of a report, numbers at 17 significant digits.
inline std::string to_text(const json& report) {
  std::ostringstream os;
  detail::render(report, os, 0);
  return os.str();
}

}  // namespace singtrace
