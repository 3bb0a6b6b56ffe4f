#pragma once

// Function-family specifications: JSON objects keyed by "kind", and
// two-column value,weight CSV spectra.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "singtrace/construct.hpp"
#include "singtrace/fn_core.hpp"

namespace singtrace {

using json = nlohmann::json;

/// A parsed input. Most kinds describe mu; a g-domain step (staircases)
/// lives only in G because e^t overflows long before its horizon.
struct FunctionInput {
  std::string source;  ///< file name or "<flags>"
  std::string kind;
  std::optional<EigenvalueFunction> mu;
  GFunction g;
  json spec;  ///< normalized specification, echoed in reports

  bool g_domain() const { return !mu.has_value(); }
};

namespace detail {

inline std::string where(const std::string& ctx, const std::string& field) {
  return ctx.empty() ? "field '" + field + "'" : ctx + ": field '" + field + "'";
}

inline double number_field(const json& j, const std::string& ctx, const std::string& field,
                           std::optional<double> fallback = std::nullopt) {
  if (!j.contains(field)) {
    if (fallback) return *fallback;
    fail(ErrorKind::InvalidInput, where(ctx, field) + " is missing");
  }
  const auto& v = j.at(field);
  if (!v.is_number()) fail(ErrorKind::InvalidInput, where(ctx, field) + " must be a number, got " + v.dump());
  return v.get<double>();
}

inline std::vector<double> array_field(const json& j, const std::string& ctx, const std::string& field) {
  if (!j.contains(field)) fail(ErrorKind::InvalidInput, where(ctx, field) + " is missing");
  const auto& v = j.at(field);
  if (!v.is_array()) fail(ErrorKind::InvalidInput, where(ctx, field) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail(ErrorKind::InvalidInput, where(ctx, field) + "[" + std::to_string(i) + "] must be a number, got " + v[i].dump());
    out.push_back(v[i].get<double>());
  }
  return out;
}

/// Re-raise with a location prefix, keeping the kind.
template <class F>
auto with_context(const std::string& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    fail(e.kind(), ctx + ": " + msg);
  }
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidInput, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

inline EigenvalueFunction parse_mu(const json& j, const std::string& ctx = "");

inline FunctionInput parse_function(const json& j, const std::string& ctx = "") {
  if (!j.is_object()) fail(ErrorKind::InvalidInput, (ctx.empty() ? "" : ctx + ": ") + "specification must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string())
    fail(ErrorKind::InvalidInput, detail::where(ctx, "kind") + " must be a string");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "step" && j.value("domain", "x") == "g") {
    // values[i] on [breakpoints[i], breakpoints[i+1]), known up to breakpoints.back()
    auto t = detail::array_field(j, ctx, "breakpoints");
    auto v = detail::array_field(j, ctx, "values");
    if (t.size() != v.size() + 1 || v.empty())
      fail(ErrorKind::InvalidInput, detail::where(ctx, "breakpoints") + " must hold one entry more than 'values'");
    const double horizon = t.back();
    std::vector<double> knots(t.begin() + 1, t.end() - 1);
    auto g = detail::with_context(ctx.empty() ? "g-domain step" : ctx,
                                  [&] { return GFunction::step(std::move(knots), std::move(v), horizon); });
    return {"", kind, std::nullopt, std::move(g), j};
  }
  if (kind == "linear") {
    auto g = detail::with_context(ctx.empty() ? "linear" : ctx, [&] {
      return GFunction::linear({detail::number_field(j, ctx, "slope", 1.0), detail::number_field(j, ctx, "intercept", 0.0)});
    });
    return {"", kind, g_inverse(g), g, j};
  }
  auto mu = parse_mu(j, ctx);
  auto g = g_transform(mu);
  return {"", kind, std::move(mu), std::move(g), j};
}

inline EigenvalueFunction parse_mu(const json& j, const std::string& ctx) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    fail(ErrorKind::InvalidInput, detail::where(ctx, "kind") + " must be a string");
  const auto kind = j.at("kind").get<std::string>();
  const std::string here = ctx.empty() ? kind : ctx;
  if (kind == "power_log") {
    PowerLogParams p;
    p.scale = detail::number_field(j, ctx, "scale", 1.0);
    p.p = detail::number_field(j, ctx, "p");
    p.q = detail::number_field(j, ctx, "q", 0.0);
    p.offset = detail::number_field(j, ctx, "offset", std::numbers::e);
    return detail::with_context(here, [&] { return EigenvalueFunction::power_log(p); });
  }
  if (kind == "exponential") {
    ExponentialParams p;
    p.scale = detail::number_field(j, ctx, "scale", 1.0);
    p.alpha = detail::number_field(j, ctx, "alpha", 1.0);
    return detail::with_context(here, [&] { return EigenvalueFunction::exponential(p); });
  }
  if (kind == "step") {
    auto t = detail::array_field(j, ctx, "breakpoints");
    auto v = detail::array_field(j, ctx, "values");
    return detail::with_context(here, [&] { return EigenvalueFunction::step(std::move(t), std::move(v)); });
  }
  if (kind == "sampled") {
    auto grid = detail::array_field(j, ctx, "grid");
    auto v = detail::array_field(j, ctx, "values");
    std::optional<EigenvalueFunction> tail;
    if (j.contains("tail") && !j.at("tail").is_null()) tail = parse_mu(j.at("tail"), detail::where(ctx, "tail"));
    return detail::with_context(here, [&] { return EigenvalueFunction::sampled(std::move(grid), std::move(v), tail); });
  }
  if (kind == "spectrum") {
    if (!j.contains("pairs") || !j.at("pairs").is_array())
      fail(ErrorKind::InvalidInput, detail::where(ctx, "pairs") + " must be an array of [value, weight]");
    SpectralData d;
    const auto& pairs = j.at("pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const std::string at = detail::where(ctx, "pairs") + "[" + std::to_string(i) + "]";
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail(ErrorKind::InvalidInput, at + " must be [value, weight], got " + p.dump());
      const double v = p[0].get<double>(), w = p[1].get<double>();
      if (!(v >= 0.0)) fail(ErrorKind::NegativeValue, at + ": value must be >= 0, got " + p[0].dump());
      if (!(w > 0.0)) fail(ErrorKind::NonpositiveWeight, at + ": weight must be > 0, got " + p[1].dump());
      d.pairs.push_back({v, w});
    }
    if (j.contains("total_weight")) d.total_weight = detail::number_field(j, ctx, "total_weight");
    return detail::with_context(here, [&] { return rearrange(d); });
  }
  fail(ErrorKind::InvalidInput, detail::where(ctx, "kind") + ": unknown kind '" + kind + "'");
}

/// JSON text with parse errors reported as line:column.
inline json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    fail(ErrorKind::InvalidInput, name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

/// Two columns value,weight; a first line that does not parse as numbers is a header.
inline SpectralData parse_spectrum_csv(const std::string& text, const std::string& name) {
  SpectralData d;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    const std::string at = name + ":" + std::to_string(lineno);
    if (fields.size() != 2) {
      if (lineno == 1) continue;
      fail(ErrorKind::InvalidInput, at + ": expected 2 fields (value,weight), got " + std::to_string(fields.size()));
    }
    const auto v = detail::parse_double(fields[0]), w = detail::parse_double(fields[1]);
    if (!v || !w) {
      if (lineno == 1 && !v && !w) continue;  // header
      fail(ErrorKind::InvalidInput, at + ": field " + std::string(!v ? "1 (value)" : "2 (weight)") + " is not a number");
    }
    if (!(*v >= 0.0)) fail(ErrorKind::NegativeValue, at + ": field 1 (value) must be >= 0");
    if (!(*w > 0.0)) fail(ErrorKind::NonpositiveWeight, at + ": field 2 (weight) must be > 0");
    d.pairs.push_back({*v, *w});
  }
  return d;
}

inline FunctionInput load_function(const std::string& path) {
  const auto text = detail::read_file(path);
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".csv") {
    const auto data = parse_spectrum_csv(text, path);
    auto mu = detail::with_context(path, [&] { return rearrange(data); });
    json pairs = json::array();
    for (const auto& p : data.pairs) pairs.push_back({p.value, p.weight});
    auto g = g_transform(mu);
    return {path, "spectrum", std::move(mu), std::move(g), {{"kind", "spectrum"}, {"pairs", pairs}}};
  }
  auto in = parse_function(parse_json_text(text, path), path);
  in.source = path;
  return in;
}

/// Non-finite doubles become "inf", "-inf", "nan"; JSON numbers cannot hold them.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double from_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::InvalidInput, "expected a number, got " + j.dump());
}

inline json to_json(const EstimatorConfig& c) {
  json h = json::array();
  for (double x : c.h_grid) h.push_back(x);
  return {{"h_grid", h},         {"horizon", num(c.horizon)},
          {"omega", c.omega},    {"t_step", c.t_step},
          {"force_estimate", c.force_estimate},
          {"criteria_horizon", c.criteria_horizon},
          {"theta", c.theta},    {"lambda", c.lambda},
          {"band", c.band},      {"a_max", c.a_max}};
}

/// Reads a config object, or the "config" member of a report. Missing keys keep defaults.
inline EstimatorConfig config_from_json(const json& j0, EstimatorConfig c = {}) {
  const json& j = j0.contains("config") ? j0.at("config") : j0;
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "config must be a JSON object");
  auto get = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = detail::with_context(std::string("config field '") + k + "'", [&] { return from_num(j.at(k)); });
  };
  if (j.contains("h_grid")) c.h_grid = detail::array_field(j, "config", "h_grid");
  get("horizon", c.horizon);
  get("omega", c.omega);
  get("t_step", c.t_step);
  get("criteria_horizon", c.criteria_horizon);
  get("theta", c.theta);
  get("lambda", c.lambda);
  get("band", c.band);
  get("a_max", c.a_max);
  if (j.contains("force_estimate")) {
    if (!j.at("force_estimate").is_boolean()) fail(ErrorKind::InvalidInput, "config field 'force_estimate' must be a boolean");
    c.force_estimate = j.at("force_estimate").get<bool>();
  }
  c.validate();
  return c;
}

/// A construction as a g-domain step specification, readable by parse_function.
inline json staircase_spec(const StaircaseConstruction& s) {
  json t = json::array(), v = json::array();
  for (double x : s.breakpoints) t.push_back(x);
  for (double x : s.step_values) v.push_back(x);
  return {{"kind", "step"}, {"domain", "g"}, {"breakpoints", t}, {"values", v}};
}

/// The x-domain step of a rearranged spectrum.
inline json step_spec(const EigenvalueFunction& mu) {
  const auto* s = std::get_if<Step>(&mu.repr());
  if (!s) fail(ErrorKind::InvalidInput, "not a step function");
  json t = json::array(), v = json::array();
  for (double x : s->breakpoints) t.push_back(x);
  for (double x : s->values) v.push_back(x);
  return {{"kind", "step"}, {"breakpoints", t}, {"values", v}};
}

}  // namespace singtrace
