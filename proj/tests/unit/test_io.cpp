#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "singtrace/cli.hpp"

using namespace singtrace;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidInput;
}

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("singtrace_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "singtrace");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("function specifications", "[io]") {
  auto in = parse_function(json::parse(R"({"kind":"power_log","scale":2,"p":1,"q":0})"));
  REQUIRE(in.mu);
  CHECK((*in.mu)(1.0) == Catch::Approx(2.0 / (1.0 + std::numbers::e)));
  in = parse_function(json::parse(R"({"kind":"exponential","alpha":0.5})"));
  CHECK((*in.mu)(2.0) == Catch::Approx(std::exp(-1.0)));
  in = parse_function(json::parse(R"({"kind":"step","breakpoints":[0,1,2,3],"values":[3,2,1]})"));
  CHECK((*in.mu)(1.5) == 2.0);
  CHECK(in.g.finite_rank());
  in = parse_function(json::parse(R"({"kind":"spectrum","pairs":[[1,1],[3,1],[2,1]]})"));
  CHECK((*in.mu)(0.5) == 3.0);
  CHECK((*in.mu)(2.5) == 1.0);
  in = parse_function(json::parse(R"({"kind":"sampled","grid":[0,1,2],"values":[1,0.5,0.25],
                                      "tail":{"kind":"power_log","p":2,"scale":4}})"));
  CHECK((*in.mu)(1.5) == 0.5);
  CHECK(!in.g.horizon_limited());
  in = parse_function(json::parse(R"({"kind":"linear","slope":2,"intercept":-5})"));
  CHECK(in.g(3.0) == 1.0);
  in = parse_function(json::parse(R"({"kind":"step","domain":"g","breakpoints":[1,9,36],"values":[1,3]})"));
  CHECK(in.g_domain());
  CHECK(in.g(5.0) == 1.0);
  CHECK(in.g(9.0) == 3.0);
  CHECK(in.g.horizon() == 36.0);
}

TEST_CASE("specification diagnostics name the field", "[io]") {
  CHECK(message_of([] { parse_function(json::parse(R"({"kind":"power_log"})")); }).find("field 'p' is missing") !=
        std::string::npos);
  CHECK(message_of([] { parse_function(json::parse(R"({"kind":"power_log","p":"x"})")); }).find("field 'p'") !=
        std::string::npos);
  CHECK(message_of([] { parse_function(json::parse(R"({"kind":"step","breakpoints":[0,1],"values":[true]})")); })
            .find("'values'[0]") != std::string::npos);
  CHECK(kind_of([] { parse_function(json::parse(R"({"kind":"spectrum","pairs":[[1,1],[-2,1]]})")); }) ==
        ErrorKind::NegativeValue);
  CHECK(kind_of([] { parse_function(json::parse(R"({"kind":"spectrum","pairs":[[1,0]]})")); }) ==
        ErrorKind::NonpositiveWeight);
  CHECK(kind_of([] { parse_function(json::parse(R"({"kind":"nope"})")); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { parse_function(json::parse(R"({"kind":"step","breakpoints":[0,1,2],"values":[1,2]})")); }) ==
        ErrorKind::InvalidInput);
  const auto m = message_of([] { parse_json_text("{\n  \"kind\": \"power_log\",\n  \"p\": ,\n}", "f.json"); });
  CHECK(m.find("f.json:3:") != std::string::npos);
}

TEST_CASE("CSV spectra", "[io]") {
  auto d = parse_spectrum_csv("value,weight\n2,1\n1,0.5\n", "s.csv");
  REQUIRE(d.pairs.size() == 2);
  CHECK(d.pairs[1].weight == 0.5);
  d = parse_spectrum_csv("2,1\n\n1,3\n", "s.csv");
  CHECK(d.pairs.size() == 2);
  auto m = message_of([] { parse_spectrum_csv("value,weight\n2,1\n1,abc\n", "s.csv"); });
  CHECK(m.find("s.csv:3: field 2 (weight)") != std::string::npos);
  m = message_of([] { parse_spectrum_csv("2,1,3\n1,1\n", "s.csv"); });
  CHECK(m.empty());  // a 3-field first line is taken as a header
  m = message_of([] { parse_spectrum_csv("2,1\n1,1,3\n", "s.csv"); });
  CHECK(m.find("s.csv:2: expected 2 fields") != std::string::npos);
  CHECK(kind_of([] { parse_spectrum_csv("-1,1\n", "s.csv"); }) == ErrorKind::NegativeValue);
  CHECK(kind_of([] { parse_spectrum_csv("1,-1\n", "s.csv"); }) == ErrorKind::NonpositiveWeight);
}

TEST_CASE("config and staircase round trips", "[io]") {
  EstimatorConfig c;
  c.h_grid = {0.5, 3};
  c.horizon = 77.25;
  c.theta = 0.125;
  c.force_estimate = true;
  const auto back = config_from_json(json::parse(to_json(c).dump()));
  CHECK(back.h_grid == c.h_grid);
  CHECK(back.horizon == c.horizon);
  CHECK(back.theta == c.theta);
  CHECK(back.force_estimate);
  CHECK(kind_of([] { config_from_json(json::parse(R"({"lambda":0.5})")); }) == ErrorKind::InvalidInput);

  const auto s = construct_vanisher(GFunction::linear({1.0, 0.0}));
  const auto in = parse_function(json::parse(staircase_spec(s).dump()));
  const auto g = s.staircase();
  for (double t = 0.5; t < s.horizon(); t *= 1.7) CHECK(in.g(t) == g(t));
  CHECK(in.g.horizon() == g.horizon());

  CHECK(num(kInf) == "inf");
  CHECK(from_num(num(-kInf)) == -kInf);
  CHECK(from_num(num(0.1)) == 0.1);
}

TEST_CASE("cli verdicts and exit codes", "[io][cli]") {
  TempDir dir;
  auto r = cli_run({"classify", "--kind", "power_log", "--p", "1", "--format", "json"});
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["result"]["by_indices"]["traceable"] == "true");
  CHECK(j["result"]["by_liminf"]["traceable"] == "true");
  CHECK(j["result"]["by_ratio"]["traceable"] == "true");
  CHECK(j["config"]["horizon"] == 40.0);

  const auto A = dir.write("A.json", R"({"kind":"power_log","p":2})");
  const auto B = dir.write("B.json", R"({"kind":"power_log","p":1})");
  r = cli_run({"dichotomy", A, B});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("dichotomy: Zero", 0) == 0);

  const auto bad = dir.write("bad.json", R"({"kind":"spectrum","pairs":[[1,1],[2,-1]]})");
  r = cli_run({"classify", bad});
  CHECK(r.code == 1);
  CHECK(r.err.find("NonpositiveWeight") != std::string::npos);
  CHECK(r.err.find("pairs'[1]") != std::string::npos);

  r = cli_run({"ideal-check", A});
  CHECK(r.code == 1);
  r = cli_run({"dichotomy", B, B});
  CHECK(r.code == 1);
  CHECK(r.err.find("NotApplicable") != std::string::npos);
  r = cli_run({"classify", "--kind", "power_log"});
  CHECK(r.code == 1);
  r = cli_run({"classify", "--kind", "power_log", "--p", "1", "--lambda", "1"});
  CHECK(r.code == 1);

  // sampled delta = 1 data with no tail: nothing decides on the horizon
  json grid = json::array(), vals = json::array();
  for (int k = 0; k <= 410; ++k) {
    const double x = k == 0 ? 0.0 : std::exp(k / 10.0 - 1.0);
    grid.push_back(x);
    vals.push_back(1.0 / (std::numbers::e + x));
  }
  const auto sampled = dir.write("sampled.json", json{{"kind", "sampled"}, {"grid", grid}, {"values", vals}}.dump());
  r = cli_run({"classify", sampled});
  CHECK(r.code == 2);
  r = cli_run({"ideal-check", sampled, sampled, "--format", "json"});
  CHECK(json::parse(r.out)["result"]["verdict"] != "non_member");
}

TEST_CASE("cli reports reproduce and agree across formats", "[io][cli]") {
  TempDir dir;
  const auto A = dir.write("A.json", R"({"kind":"power_log","p":0.5,"q":1})");
  const auto first = cli_run({"classify", A, "--format", "json", "--force-estimate", "--h-grid", "1,2,3", "--horizon", "30"});
  REQUIRE(first.code != 1);
  const auto rep = dir.write("report.json", first.out);
  const auto again = cli_run({"classify", A, "--format", "json", "--config", rep});
  CHECK(json::parse(again.out)["result"] == json::parse(first.out)["result"]);
  CHECK(json::parse(again.out)["config"] == json::parse(first.out)["config"]);

  const auto text = cli_run({"classify", A, "--force-estimate", "--h-grid", "1,2,3", "--horizon", "30"});
  const auto j = json::parse(first.out)["result"];
  for (const char* c : {"by_indices", "by_liminf", "by_ratio"}) {
    const std::string line = "traceable: " + j[c]["traceable"].get<std::string>();
    CHECK(text.out.find(line) != std::string::npos);
  }
  CHECK(text.out.rfind("classify: " + j["traceable"].get<std::string>(), 0) == 0);
}

TEST_CASE("cli construct, rearrange and batch mode", "[io][cli]") {
  TempDir dir;
  const auto lin = dir.write("lin.json", R"({"kind":"linear","slope":1})");
  auto r = cli_run({"construct", "vanisher", lin, "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["result"]["staircase"]["breakpoints"][1] == 9.0);
  CHECK(j["result"]["verification"]["gaps_checked"] == 40);
  const auto st = dir.write("stair.json", j["result"]["staircase"].dump());
  r = cli_run({"classify", st, "--format", "json"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["result"]["by_indices"]["traceable"] == "true");
  CHECK(json::parse(r.out)["config"]["h_grid"] == json::parse("[0.5,1.0,2.0]"));
  r = cli_run({"kernel-check", lin, st});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("kernel-check: member", 0) == 0);

  const auto csv = dir.write("spec.csv", "value,weight\n1,1\n3,1\n2,1\n3,0.5\n");
  r = cli_run({"rearrange", csv, "--format", "json"});
  CHECK(r.code == 0);
  const auto rr = json::parse(r.out)["result"];
  CHECK(rr["step"]["values"] == json::parse("[3.0,2.0,1.0]"));
  CHECK(rr["step"]["breakpoints"] == json::parse("[0.0,1.5,2.5,3.5]"));
  CHECK(rr["mass"] == 7.5);

  std::vector<std::string> args{"classify", "--format", "json", "--threads", "4"};
  for (double p : {0.5, 1.0, 2.0, 4.0})
    args.push_back(dir.write("p" + std::to_string(p) + ".json", json{{"kind", "power_log"}, {"p", p}}.dump()));
  args.push_back(dir.write("broken.json", "{\"kind\": 3}"));
  r = cli_run(args);
  CHECK(r.code == 1);
  const auto all = json::parse(r.out);
  REQUIRE(all.size() == 5);
  CHECK(all[0]["result"]["traceable"] == "false");
  CHECK(all[1]["result"]["traceable"] == "true");
  CHECK(all[2]["result"]["traceable"] == "false");
  CHECK(all[4].contains("error"));

  const auto outdir = (dir.path / "out").string();
  args.pop_back();
  args.push_back("--output");
  args.push_back(outdir);
  r = cli_run(args);
  CHECK(r.code == 0);
  CHECK(std::distance(fs::directory_iterator(outdir), fs::directory_iterator{}) == 4);
}
