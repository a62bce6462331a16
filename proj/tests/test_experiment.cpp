#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "drw/experiment.hpp"

using namespace drw::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_prefix(const std::string& text, std::string_view prefix) {
  std::size_t n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "drw-tests";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("naive baseline rounds equal ell") {
  ExperimentSpec s;
  s.protocol = Protocol::naive;
  s.graph = "cycle:8";
  s.ell = {100, 37};
  s.trials = 3;
  const auto t = run_experiment(s);
  REQUIRE(t.rows.size() == 6);
  for (const auto& r : t.rows) CHECK(r.rounds_total == r.ell);
  CHECK(t.n == 8);
  CHECK(t.diameter == 4);
}

TEST_CASE("csv layout") {
  ResultTable empty;
  empty.protocol = "single";
  const auto csv = to_csv(empty);
  CHECK(csv.rfind(std::string(kCsvVersion) + "\n", 0) == 0);
  CHECK(count_prefix(csv, "kind,") == 1);
  CHECK(count_prefix(csv, "trial,") == 0);
  CHECK(count_prefix(csv, "summary,") == 0);

  ExperimentSpec s;
  s.protocol = Protocol::single;
  s.ell = {20};
  const auto one = to_csv(run_experiment(s));
  CHECK(count_prefix(one, "trial,") == 1);
  CHECK(count_prefix(one, "summary,") == 1);

  const auto j = to_json(run_experiment(s));
  CHECK(j.at("rows").size() == 1);
  CHECK(j.at("protocol") == "single");
}

TEST_CASE("same spec reproduces identical files") {
  for (auto proto : {Protocol::single, Protocol::many, Protocol::sod, Protocol::pos, Protocol::mh, Protocol::rst,
                     Protocol::naive}) {
    ExperimentSpec s;
    s.protocol = proto;
    s.graph = "grid:3x3";
    s.ell = {6, 18};
    s.lambda_scale = 1.0;
    s.k = 3;
    s.pi = "linear";
    s.trials = 4;
    s.seed = 42;
    const auto a = scratch(std::string(to_string(proto)) + "-a.csv");
    const auto b = scratch(std::string(to_string(proto)) + "-b.csv");
    const auto c = scratch(std::string(to_string(proto)) + "-c.json");
    const auto d = scratch(std::string(to_string(proto)) + "-d.json");
    emit(run_experiment(s), Format::csv, a);
    s.threads = 3;
    emit(run_experiment(s), Format::csv, b);
    emit(run_experiment(s), Format::json, c);
    s.threads = 1;
    emit(run_experiment(s), Format::json, d);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(c) == slurp(d));
    CHECK(!slurp(a).empty());

    s.seed = 43;
    const auto e = scratch(std::string(to_string(proto)) + "-e.csv");
    emit(run_experiment(s), Format::csv, e);
    if (proto != Protocol::naive) CHECK(slurp(a) != slurp(e));
  }
}

TEST_CASE("spec validation and config merge") {
  ExperimentSpec s;
  s.trials = 0;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s = {};
  s.ell = {4};
  s.lambda = 8;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s = {};
  s.protocol = Protocol::mh;
  s.alpha = 1.0;
  CHECK_THROWS_AS(s.validate(), SpecError);
  CHECK_THROWS_AS(protocol_from_string("teleport"), SpecError);

  auto base = spec_from_json(nlohmann::json::parse(R"({"graph":"star:5","ell":[8,16],"trials":3})"));
  CHECK(base.graph == "star:5");
  CHECK(base.ell == std::vector<std::uint64_t>{8, 16});
  merge_json(base, nlohmann::json::parse(R"({"ell":32,"format":"json"})"));
  CHECK(base.ell == std::vector<std::uint64_t>{32});
  CHECK(base.trials == 3);
  CHECK(base.format == Format::json);
  CHECK_THROWS_AS(merge_json(base, nlohmann::json::parse(R"({"colour":1})")), SpecError);
  CHECK_THROWS_AS(merge_json(base, nlohmann::json::parse(R"({"trials":"many"})")), SpecError);
}

TEST_CASE("loglog slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 6, 12, 24}) == doctest::Approx(1.0));
  CHECK(loglog_slope({16, 64, 256}, {4, 8, 16}) == doctest::Approx(0.5));
  CHECK_THROWS(loglog_slope({1}, {1}));
}

TEST_CASE("stitched grid scales like sqrt(ell)") {
  ExperimentSpec s;
  s.protocol = Protocol::single;
  s.graph = "cycle:64";
  s.ell = {256, 1024, 4096};
  s.lambda_scale = 1.0;
  s.trials = 20;
  s.seed = 3;
  const auto t = run_experiment(s);
  REQUIRE(t.summary);
  REQUIRE(t.summary->exponent);
  CHECK(*t.summary->exponent >= 0.4);
  CHECK(*t.summary->exponent <= 0.7);
}

TEST_CASE("rst experiment yields tree frequencies") {
  ExperimentSpec s;
  s.protocol = Protocol::rst;
  s.graph = "complete:4";
  s.trials = 400;
  const auto t = run_experiment(s);
  std::map<std::string, int> freq;
  for (const auto& r : t.rows) ++freq[r.digest];
  CHECK(freq.size() == 16);
}

TEST_CASE("cli exit codes and output") {
  const auto out = scratch("cli.csv");
  fs::remove(out);
  CHECK(run_cli("--graph cycle:8 --protocol naive --ell 100 --out " + out.string()) == 0);
  const auto text = slurp(out);
  CHECK(text.find(",100,100,") != std::string::npos);

  CHECK(run_cli("--protocol teleport") == 2);
  CHECK(run_cli("--trials 0") == 2);
  CHECK(run_cli("--format xml") == 2);
  CHECK(run_cli("--graph cycle:1") == 3);
  CHECK(run_cli("--graph file:/nonexistent/graph.txt") == 3);
  CHECK(run_cli("--graph cycle:8 --ell 10 --out /proc/forbidden/x.csv") == 5);

  const auto cfg = scratch("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"graph":"cycle:8","protocol":"naive","ell":[50],"out":")" << out.string() << R"("})";
  }
  CHECK(run_cli("--config " + cfg.string() + " --ell 70") == 0);
  CHECK(slurp(out).find(",70,70,") != std::string::npos);

  const auto dir = scratch("envdir");
  fs::remove_all(dir);
  const std::string env = "DRW_OUTPUT_DIR=" + dir.string() + " ";
  const std::string cmd = env + DRW_CLI_PATH + " --graph cycle:8 --protocol naive --ell 5 --seed 9 --format json";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "naive-9.json"));
}
