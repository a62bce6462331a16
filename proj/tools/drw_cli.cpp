// Experiment runner. Exit codes: 0 ok, 2 usage or spec, 3 graph, 4 engine, 5 output.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "drw/congest.hpp"
#include "drw/experiment.hpp"
#include "drw/graph.hpp"

namespace ex = drw::experiment;

namespace {

enum Exit { kOk = 0, kUsage = 2, kGraph = 3, kEngine = 4, kOutput = 5 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed random walk experiments on a simulated CONGEST network"};

  std::string config, graph, protocol, pi, out, format;
  std::vector<std::uint64_t> ell;
  std::uint64_t lambda = 0, eta = 1, k = 1, trials = 1, seed = 1;
  std::uint32_t source = 0;
  unsigned threads = 1;
  double alpha = 0.5, lambda_scale = 0.0;

  app.add_option("--config", config, "JSON file with spec fields; flags override it")->check(CLI::ExistingFile);
  auto* o_graph = app.add_option("--graph", graph, "path:5, cycle:8, star:9, complete:6, grid:4x4, er:N:p, rgg:N:r, file:PATH");
  auto* o_protocol = app.add_option("--protocol", protocol, "single|many|sod|pos|mh|rst|mixing|naive");
  auto* o_ell = app.add_option("--ell", ell, "walk length; several values sweep a grid")->delimiter(',');
  auto* o_lambda = app.add_option("--lambda", lambda, "short-walk length (0 = default formula)");
  auto* o_scale = app.add_option("--lambda-scale", lambda_scale, "lambda = ceil(c sqrt(ell D)) per grid point");
  auto* o_eta = app.add_option("--eta", eta);
  auto* o_k = app.add_option("--k", k, "number of walks");
  auto* o_alpha = app.add_option("--alpha", alpha, "Metropolis-Hastings laziness");
  auto* o_pi = app.add_option("--pi", pi, "MH target: uniform|degree|linear");
  auto* o_source = app.add_option("--source", source);
  auto* o_trials = app.add_option("--trials", trials);
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_threads = app.add_option("--threads", threads);
  auto* o_out = app.add_option("--out", out, "output file (default: $DRW_OUTPUT_DIR/<protocol>-<seed>.<ext>, else stdout)");
  auto* o_format = app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  ex::ExperimentSpec spec;
  try {
    if (!config.empty()) {
      std::ifstream in(config);
      ex::merge_json(spec, nlohmann::json::parse(in));
    }
    nlohmann::json flags = nlohmann::json::object();
    if (*o_graph) flags["graph"] = graph;
    if (*o_protocol) flags["protocol"] = protocol;
    if (*o_ell) flags["ell"] = ell;
    if (*o_lambda) flags["lambda"] = lambda;
    if (*o_scale) flags["lambda_scale"] = lambda_scale;
    if (*o_eta) flags["eta"] = eta;
    if (*o_k) flags["k"] = k;
    if (*o_alpha) flags["alpha"] = alpha;
    if (*o_pi) flags["pi"] = pi;
    if (*o_source) flags["source"] = source;
    if (*o_trials) flags["trials"] = trials;
    if (*o_seed) flags["seed"] = seed;
    if (*o_threads) flags["threads"] = threads;
    if (*o_out) flags["out"] = out;
    if (*o_format) flags["format"] = format;
    ex::merge_json(spec, flags);
    spec.validate();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kUsage;
  } catch (const ex::SpecError& e) {
    std::cerr << "spec: " << e.what() << '\n';
    return kUsage;
  }

  ex::ResultTable table;
  try {
    table = ex::run_experiment(spec);
  } catch (const ex::SpecError& e) {
    std::cerr << "spec: " << e.what() << '\n';
    return kUsage;
  } catch (const drw::graph::GraphError& e) {
    std::cerr << "graph: " << e.what() << '\n';
    return kGraph;
  } catch (const std::exception& e) {
    std::cerr << "engine: " << e.what() << '\n';
    return kEngine;
  }

  std::filesystem::path target = spec.out;
  if (target.empty()) {
    if (const char* dir = std::getenv("DRW_OUTPUT_DIR"); dir && *dir) {
      target = std::filesystem::path(dir) / (table.protocol + "-" + std::to_string(spec.seed) +
                                             (spec.format == ex::Format::csv ? ".csv" : ".json"));
    }
  }
  try {
    if (target.empty()) {
      std::cout << ex::render(table, spec.format);
    } else {
      ex::emit(table, spec.format, target);
    }
  } catch (const ex::OutputError& e) {
    std::cerr << "output: " << e.what() << '\n';
    return kOutput;
  }
  return kOk;
}
