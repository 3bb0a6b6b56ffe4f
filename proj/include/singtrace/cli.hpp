#pragma once

// Command-line front end. Exit codes: 0 decided, 2 undecided, 1 input or
// precondition error. Several inputs to a one-input command form a batch
// that runs in parallel; each job writes only its own output.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "singtrace/report.hpp"

namespace singtrace::cli {

inline constexpr int kDecided = 0;
inline constexpr int kError = 1;
inline constexpr int kUndecided = 2;

struct JobSpec {
  std::string command;  ///< classify | indices | ideal-check | kernel-check | construct | rearrange | dichotomy
  std::string variant;  ///< construct only: vanisher | dominator
  std::vector<std::string> inputs;
  std::optional<json> inline_spec;  ///< from --kind and friends
  EstimatorConfig config;
  bool horizon_given = false;  ///< --horizon, --h-grid or a config file set the index window
  int n_steps = 40;
  double t1 = 1.0;
  std::string format = "text";
  std::string output;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

struct Outcome {
  int code = kDecided;
  json report;
};

inline bool two_inputs(const std::string& command) {
  return command == "ideal-check" || command == "kernel-check" || command == "dichotomy";
}

namespace detail {

inline int tri_code(Tri t) { return t == Tri::Undecided ? kUndecided : kDecided; }
inline int membership_code(Membership m) { return m == Membership::Undecided ? kUndecided : kDecided; }

/// Staircases are finite prefixes with O(n) flats: without an explicit index
/// window they get the small-h window ending at their own horizon.
inline EstimatorConfig config_for(const JobSpec& job, const FunctionInput& in) {
  EstimatorConfig cfg = job.config;
  if (in.g_domain() && in.g.horizon_limited() && !job.horizon_given) {
    const auto sc = staircase_config(in.g.horizon());
    cfg.horizon = sc.horizon;
    cfg.h_grid = sc.h_grid;
  }
  return cfg;
}

inline Outcome run_one(const JobSpec& job, const std::vector<FunctionInput>& in) {
  Outcome out;
  json inputs = json::array();
  for (const auto& f : in) inputs.push_back({{"source", f.source}, {"spec", f.spec}});
  const EstimatorConfig cfg = two_inputs(job.command) ? job.config : config_for(job, in.front());
  cfg.validate();
  json result;
  const auto& c = job.command;
  if (c == "classify") {
    const auto r = classify(in[0].g, cfg);
    result = to_json(r);
    out.code = tri_code(r.traceable());
  } else if (c == "indices") {
    result = to_json(matuszewska(in[0].g, cfg));
  } else if (c == "ideal-check") {
    const auto d = in_principal_ideal(in[0].g, in[1].g, cfg);
    result = to_json(d);
    out.code = membership_code(d.verdict);
  } else if (c == "kernel-check") {
    const auto d = in_kernel(in[0].g, in[1].g, cfg);
    result = to_json(d);
    out.code = membership_code(d.verdict);
  } else if (c == "dichotomy") {
    result = to_json(trace_dichotomy(in[0].g, in[1].g, cfg));
  } else if (c == "construct") {
    const auto s = job.variant == "vanisher" ? construct_vanisher(in[0].g, job.n_steps, job.t1)
                                             : construct_dominator(in[0].g, job.n_steps, job.t1);
    result = to_json(s, verify_construction(s));
  } else if (c == "rearrange") {
    if (!in[0].mu || in[0].mu->representation() != Representation::Step)
      fail(ErrorKind::InvalidInput, in[0].source + ": rearrange needs a spectrum or step input");
    const auto& mu = *in[0].mu;
    const auto& s = std::get<Step>(mu.repr());
    double mass = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) mass += s.values[i] * (s.breakpoints[i + 1] - s.breakpoints[i]);
    result = {{"step", step_spec(mu)}, {"finite_rank", mu.finite_rank()}, {"mass", mass}};
  } else {
    fail(ErrorKind::InvalidInput, "unknown command '" + c + "'");
  }
  out.report = {{"command", c}, {"inputs", inputs}, {"config", to_json(cfg)}, {"result", result}};
  if (c == "construct") {
    out.report["n_steps"] = job.n_steps;
    out.report["t1"] = job.t1;
  }
  return out;
}

inline Outcome error_outcome(const std::string& source, const std::string& kind, const std::string& message) {
  return {kError, {{"source", source}, {"error", {{"kind", kind}, {"message", message}}}}};
}

inline Outcome guarded(const std::string& source, const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_outcome(source, std::string(to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    return error_outcome(source, "InvalidInput", e.what());
  }
}

inline FunctionInput inline_input(const json& spec) {
  auto in = parse_function(spec, "<flags>");
  in.source = "<flags>";
  return in;
}

inline std::string render(const JobSpec& job, const Outcome& o) {
  if (job.format == "json") return o.report.dump(2) + "\n";
  if (o.report.contains("error"))
    return "error: " + o.report["error"]["message"].get<std::string>() + "\n";
  std::string head;
  const auto& r = o.report["result"];
  for (const char* k : {"traceable", "verdict"})
    if (r.contains(k)) head = o.report["command"].get<std::string>() + ": " + r[k].get<std::string>() + "\n\n";
  return head + to_text(o.report);
}

}  // namespace detail

/// Runs the job. Reports go to `out` (or --output), diagnostics to `err`.
inline int run(const JobSpec& job, std::ostream& out, std::ostream& err) {
  std::vector<std::string> sources;
  if (job.inline_spec) sources.push_back("<flags>");
  for (const auto& f : job.inputs) sources.push_back(f);
  if (sources.empty()) {
    err << "error: no input (give a file or --kind)\n";
    return kError;
  }
  auto load = [&](const std::string& s) {
    return s == "<flags>" ? detail::inline_input(*job.inline_spec) : load_function(s);
  };

  std::vector<Outcome> outcomes;
  if (two_inputs(job.command)) {
    if (sources.size() != 2) {
      err << "error: " << job.command << " takes exactly two inputs (A then B), got " << sources.size() << "\n";
      return kError;
    }
    outcomes.push_back(detail::guarded(sources[0] + ", " + sources[1], [&] {
      return detail::run_one(job, {load(sources[0]), load(sources[1])});
    }));
  } else {
    outcomes.resize(sources.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next++) < sources.size();)
        outcomes[i] = detail::guarded(sources[i], [&] { return detail::run_one(job, {load(sources[i])}); });
    };
    const unsigned hw = job.threads ? job.threads : std::max(1u, std::thread::hardware_concurrency());
    const auto n = std::min<std::size_t>(hw, sources.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  int code = kDecided;
  for (const auto& o : outcomes) {
    if (o.code == kError) code = kError;
    else if (o.code == kUndecided && code != kError) code = kUndecided;
    if (o.report.contains("error")) err << "error: " << o.report["error"]["message"].get<std::string>() << "\n";
  }

  const bool batch = outcomes.size() > 1;
  if (!job.output.empty() && batch) {
    std::filesystem::create_directories(job.output);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto stem = sources[i] == "<flags>" ? std::string("flags") : std::filesystem::path(sources[i]).stem().string();
      std::ofstream f(std::filesystem::path(job.output) / (stem + (job.format == "json" ? ".json" : ".txt")));
      f << detail::render(job, outcomes[i]);
    }
    return code;
  }
  std::ofstream file;
  if (!job.output.empty()) {
    file.open(job.output);
    if (!file) {
      err << "error: cannot write " << job.output << "\n";
      return kError;
    }
  }
  std::ostream& dst = job.output.empty() ? out : file;
  if (batch && job.format == "json") {
    json all = json::array();
    for (const auto& o : outcomes) all.push_back(o.report);
    dst << all.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (batch) dst << "== " << sources[i] << " ==\n";
      if (!outcomes[i].report.contains("error") || job.format == "json") dst << detail::render(job, outcomes[i]);
    }
  }
  return code;
}

/// Parses argv into a JobSpec; returns an exit code when parsing ends the run (help, errors).
inline std::optional<int> parse(int argc, const char* const* argv, JobSpec& job, std::ostream& err) {
  CLI::App app{"Singular traceability of eigenvalue asymptotics", "singtrace"};
  app.require_subcommand(1);

  // flag values; copied into the job after parsing
  std::optional<std::string> kind;
  std::optional<double> p, q, scale, offset, alpha, slope, intercept;
  std::optional<double> horizon, tail_window, lambda, tol, theta, crit_h, a_max, t_step;
  std::vector<double> h_grid;
  std::string config_file;
  bool force = false;

  auto common = [&](CLI::App* sub, std::size_t max_inputs) {
    auto* files = sub->add_option("inputs", job.inputs, "specification files (.json, or .csv spectra)");
    if (max_inputs) files->expected(0, static_cast<int>(max_inputs));
    sub->add_option("--kind", kind, "inline family: power_log | exponential | linear")
        ->check(CLI::IsMember({"power_log", "exponential", "linear"}));
    sub->add_option("--p", p, "power_log exponent");
    sub->add_option("--q", q, "power_log log exponent");
    sub->add_option("--scale", scale, "multiplicative constant");
    sub->add_option("--offset", offset, "power_log offset a in (x + a)");
    sub->add_option("--alpha", alpha, "exponential rate");
    sub->add_option("--slope", slope, "linear g slope");
    sub->add_option("--intercept", intercept, "linear g intercept");
    sub->add_option("--horizon", horizon, "index horizon T in t = log x");
    sub->add_option("--h-grid", h_grid, "index increments h")->delimiter(',');
    sub->add_option("--tail-window", tail_window, "tail window start as a fraction omega of T");
    sub->add_option("--criteria-horizon", crit_h, "horizon of the liminf and ratio criteria");
    sub->add_option("--lambda", lambda, "ratio criterion lambda > 1");
    sub->add_option("--tol", tol, "indecision band around 1 for estimated indices");
    sub->add_option("--theta", theta, "near-zero / near-one threshold of the criteria");
    sub->add_option("--a-max", a_max, "largest shift tried in horizon-limited ideal searches");
    sub->add_option("--t-step", t_step, "grid step of witness checks");
    sub->add_flag("--force-estimate", force, "estimate indices even for closed forms");
    sub->add_option("--config", config_file, "config JSON, or a previous report to reproduce");
    sub->add_option("--format", job.format, "text | json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--output", job.output, "output file (directory in batch mode)");
    sub->add_option("--threads", job.threads, "batch worker threads (0: all cores)");
  };

  auto* c_classify = app.add_subcommand("classify", "trace class, regularity and the three traceability criteria");
  common(c_classify, 0);
  auto* c_indices = app.add_subcommand("indices", "Matuszewska indices");
  common(c_indices, 0);
  auto* c_ideal = app.add_subcommand("ideal-check", "is A in the principal ideal of B");
  common(c_ideal, 2);
  auto* c_kernel = app.add_subcommand("kernel-check", "is A in the kernel of the principal ideal of B");
  common(c_kernel, 2);
  auto* c_dich = app.add_subcommand("dichotomy", "zero/infinite dichotomy of A against a delta = 1 operator B");
  common(c_dich, 2);
  auto* c_rearrange = app.add_subcommand("rearrange", "non-increasing rearrangement of a spectrum");
  common(c_rearrange, 0);
  auto* c_construct = app.add_subcommand("construct", "staircase over g_A");
  c_construct->add_option("variant", job.variant, "vanisher | dominator")
      ->required()
      ->check(CLI::IsMember({"vanisher", "dominator"}));
  c_construct->add_option("--n-steps", job.n_steps, "number of steps")->check(CLI::PositiveNumber);
  c_construct->add_option("--t1", job.t1, "first breakpoint");
  common(c_construct, 0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, err);
    return code == 0 ? kDecided : kError;
  }
  job.command = app.get_subcommands().front()->get_name();

  try {
    if (!config_file.empty()) {
      const auto text = singtrace::detail::read_file(config_file);
      job.config = config_from_json(parse_json_text(text, config_file));
      job.horizon_given = true;
    }
    if (horizon) job.config.horizon = *horizon;
    if (!h_grid.empty()) job.config.h_grid = h_grid;
    if (horizon || !h_grid.empty()) job.horizon_given = true;
    if (tail_window) job.config.omega = *tail_window;
    if (crit_h) job.config.criteria_horizon = *crit_h;
    if (lambda) job.config.lambda = *lambda;
    if (tol) job.config.band = *tol;
    if (theta) job.config.theta = *theta;
    if (a_max) job.config.a_max = *a_max;
    if (t_step) job.config.t_step = *t_step;
    if (force) job.config.force_estimate = true;
    job.config.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }

  if (kind) {
    json s{{"kind", *kind}};
    auto put = [&](const char* k, const std::optional<double>& v) {
      if (v) s[k] = *v;
    };
    put("p", p);
    put("q", q);
    put("scale", scale);
    put("offset", offset);
    put("alpha", alpha);
    put("slope", slope);
    put("intercept", intercept);
    job.inline_spec = s;
  } else if (p || q || scale || offset || alpha || slope || intercept) {
    err << "error: family parameters need --kind\n";
    return kError;
  }
  return std::nullopt;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  JobSpec job;
  if (auto code = parse(argc, argv, job, err)) return *code;
  return run(job, out, err);
}

}  // namespace singtrace::cli
