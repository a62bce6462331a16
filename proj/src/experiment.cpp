#include "drw/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "drw/apps.hpp"
#include "drw/graph.hpp"
#include "drw/walk.hpp"

namespace drw::experiment {

namespace {

constexpr std::pair<Protocol, std::string_view> kNames[] = {
    {Protocol::single, "single"}, {Protocol::many, "many"}, {Protocol::sod, "sod"},       {Protocol::pos, "pos"},
    {Protocol::mh, "mh"},         {Protocol::rst, "rst"},   {Protocol::mixing, "mixing"}, {Protocol::naive, "naive"},
};

std::string join(const std::vector<graph::NodeId>& xs, char sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(xs[i]);
  }
  return s;
}

std::vector<double> target_weights(const graph::Graph& g, const std::string& preset) {
  const std::size_t n = g.node_count();
  std::vector<double> w(n, 1.0);
  if (preset == "degree") {
    for (graph::NodeId v = 0; v < n; ++v) w[v] = static_cast<double>(g.degree(v));
  } else if (preset == "linear") {
    for (graph::NodeId v = 0; v < n; ++v) w[v] = static_cast<double>(v + 1);
  } else if (preset != "uniform") {
    throw SpecError("unknown pi preset '" + preset + "'");
  }
  return w;
}

struct Job {
  std::size_t grid = 0;
  std::uint64_t trial = 0;
};

Row run_trial(const ExperimentSpec& spec, const graph::Graph& g, std::uint32_t diameter, std::uint64_t ell,
              std::uint64_t trial, std::uint64_t seed) {
  congest::SimConfig cfg;
  cfg.seed = seed;
  walk::WalkParams p;
  p.ell = ell;
  p.lambda = spec.lambda;
  if (!p.lambda && spec.lambda_scale > 0.0 && ell > 0) {
    const double raw = std::ceil(spec.lambda_scale * std::sqrt(static_cast<double>(ell) * diameter));
    p.lambda = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(raw), 1, ell);
  }
  p.eta = spec.eta;
  p.k = spec.k;

  Row row;
  row.trial = trial;
  row.seed = seed;
  row.ell = ell;
  auto take = [&](const congest::RoundStats& s) {
    row.rounds_total = s.rounds_total;
    row.messages_total = s.messages_total;
    row.max_edge_load = s.max_edge_load;
  };
  auto sources = [&] {
    std::mt19937_64 rng(congest::split_seed(seed, 0x5eed));
    std::uniform_int_distribution<graph::NodeId> pick(0, static_cast<graph::NodeId>(g.node_count() - 1));
    std::vector<graph::NodeId> s(spec.k);
    for (auto& v : s) v = pick(rng);
    return s;
  };

  switch (spec.protocol) {
    case Protocol::single: {
      const auto w = walk::single_random_walk(g, spec.source, p, cfg);
      row.lambda = w.lambda;
      row.digest = std::to_string(w.destination);
      take(w.stats);
      break;
    }
    case Protocol::naive: {
      const auto w = walk::naive_random_walk(g, spec.source, ell, cfg);
      row.digest = std::to_string(w.destination);
      take(w.stats);
      break;
    }
    case Protocol::mh: {
      const auto w = walk::mh_random_walk(g, spec.source, target_weights(g, spec.pi), spec.alpha, p, cfg);
      row.lambda = w.lambda;
      row.digest = std::to_string(w.destination);
      take(w.stats);
      break;
    }
    case Protocol::pos: {
      const auto w = walk::regenerate_walk(g, spec.source, p, cfg);
      row.lambda = w.lambda;
      std::vector<graph::NodeId> counts(w.visit_counts.begin(), w.visit_counts.end());
      row.digest = std::to_string(w.destination) + "|" + join(counts, ',');
      take(w.stats);
      break;
    }
    case Protocol::many: {
      const auto src = sources();
      const auto ws = walk::many_random_walks(g, src, p, cfg);
      std::vector<graph::NodeId> dest;
      for (const auto& w : ws) dest.push_back(w.destination);
      row.lambda = ws.front().lambda;
      row.digest = join(dest, ';');
      take(ws.back().stats);
      break;
    }
    case Protocol::sod: {
      const auto src = sources();
      const auto r = walk::k_rw_sod(g, src, p, cfg);
      row.lambda = r.walks.front().lambda;
      row.digest = join(r.delivered, ';');
      take(r.stats);
      break;
    }
    case Protocol::rst: {
      const auto t = apps::random_spanning_tree(g, spec.source, cfg, spec.lambda);
      std::string d;
      for (const auto& [a, b] : t.edges()) {
        if (!d.empty()) d += ';';
        d += std::to_string(a) + "-" + std::to_string(b);
      }
      row.ell = t.walk_length;
      row.digest = std::move(d);
      take(t.stats);
      break;
    }
    case Protocol::mixing: {
      const auto r = apps::estimate_mixing(g, spec.source, cfg);
      row.ell = r.tau_estimate;
      row.digest = std::to_string(r.tau_estimate);
      take(r.stats);
      break;
    }
  }
  return row;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

std::string_view to_string(Protocol p) {
  for (const auto& [k, name] : kNames) {
    if (k == p) return name;
  }
  return "unknown";
}

Protocol protocol_from_string(std::string_view name) {
  for (const auto& [k, s] : kNames) {
    if (s == name) return k;
  }
  throw SpecError("unknown protocol '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw SpecError("trials must be at least 1");
  if (eta < 1) throw SpecError("eta must be at least 1");
  if (k < 1) throw SpecError("k must be at least 1");
  if (lambda_scale < 0.0) throw SpecError("lambda_scale must be non-negative");
  if (threads < 1) throw SpecError("threads must be at least 1");
  const bool needs_ell = protocol != Protocol::rst && protocol != Protocol::mixing;
  if (needs_ell && ell.empty()) throw SpecError("protocol needs at least one ell");
  for (auto l : ell) {
    if (needs_ell && lambda && lambda > l) {
      throw SpecError("lambda " + std::to_string(lambda) + " exceeds ell " + std::to_string(l));
    }
  }
  if (protocol == Protocol::mh && !(alpha > 0.0 && alpha < 1.0)) throw SpecError("alpha must lie in (0, 1)");
  if (pi != "uniform" && pi != "degree" && pi != "linear") {
    throw SpecError("unknown pi preset '" + pi + "'");
  }
}

void merge_json(ExperimentSpec& s, const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "graph") s.graph = v.get<std::string>();
      else if (key == "protocol") s.protocol = protocol_from_string(v.get<std::string>());
      else if (key == "ell") s.ell = v.is_array() ? v.get<std::vector<std::uint64_t>>() : std::vector{v.get<std::uint64_t>()};
      else if (key == "lambda") s.lambda = v.get<std::uint64_t>();
      else if (key == "lambda_scale") s.lambda_scale = v.get<double>();
      else if (key == "eta") s.eta = v.get<std::uint64_t>();
      else if (key == "k") s.k = v.get<std::uint64_t>();
      else if (key == "alpha") s.alpha = v.get<double>();
      else if (key == "pi") s.pi = v.get<std::string>();
      else if (key == "source") s.source = v.get<std::uint32_t>();
      else if (key == "trials") s.trials = v.get<std::uint64_t>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "threads") s.threads = v.get<unsigned>();
      else if (key == "out") s.out = v.get<std::string>();
      else if (key == "format") {
        const auto f = v.get<std::string>();
        if (f == "csv") s.format = Format::csv;
        else if (f == "json") s.format = Format::json;
        else throw SpecError("unknown format '" + f + "'");
      } else {
        throw SpecError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("bad config value: ") + e.what());
  }
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  merge_json(s, j);
  return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope needs distinct x values");
  return sxy / sxx;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto g = graph::from_spec_string(spec.graph, spec.seed);
  if (spec.source >= g.node_count()) throw SpecError("source " + std::to_string(spec.source) + " out of range");

  ResultTable t;
  t.protocol = std::string(to_string(spec.protocol));
  t.n = g.node_count();
  t.m = g.edge_count();
  t.diameter = graph::diameter(g);
  t.eta = spec.eta;
  t.k = spec.k;

  const bool gridded = spec.protocol != Protocol::rst && spec.protocol != Protocol::mixing;
  const std::vector<std::uint64_t> grid = gridded ? spec.ell : std::vector<std::uint64_t>{0};
  std::vector<Job> jobs;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::uint64_t tr = 0; tr < spec.trials; ++tr) jobs.push_back({gi, tr});
  }
  t.rows.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        const auto& job = jobs[i];
        const auto seed = congest::split_seed(congest::split_seed(spec.seed, job.grid), job.trial);
        t.rows[i] = run_trial(spec, g, t.diameter, grid[job.grid], job.trial, seed);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const unsigned nthreads = std::min<std::size_t>(spec.threads, jobs.size());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  Summary s;
  for (const auto& r : t.rows) {
    s.mean_rounds += static_cast<double>(r.rounds_total);
    s.mean_messages += static_cast<double>(r.messages_total);
    s.mean_max_load += r.max_edge_load;
  }
  const double cnt = static_cast<double>(t.rows.size());
  s.mean_rounds /= cnt;
  s.mean_messages /= cnt;
  s.mean_max_load /= cnt;
  if (gridded) {
    std::vector<std::uint64_t> distinct = grid;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() >= 2 && distinct.front() > 0) {
      std::vector<double> xs, ys;
      for (auto l : distinct) {
        std::vector<double> rounds;
        for (const auto& r : t.rows) {
          if (r.ell == l) rounds.push_back(static_cast<double>(r.rounds_total));
        }
        xs.push_back(static_cast<double>(l));
        ys.push_back(std::max(1.0, median(rounds)));
      }
      s.exponent = loglog_slope(xs, ys);
    }
  }
  t.summary = s;
  return t;
}

std::string to_csv(const ResultTable& t) {
  std::ostringstream os;
  os << kCsvVersion << '\n'
     << "kind,protocol,n,m,D,ell,lambda,eta,k,trial,seed,rounds_total,messages_total,max_edge_load,digest,"
        "exponent\n";
  const std::string fixed = t.protocol + "," + std::to_string(t.n) + "," + std::to_string(t.m) + "," +
                            std::to_string(t.diameter);
  for (const auto& r : t.rows) {
    os << "trial," << fixed << ',' << r.ell << ',' << r.lambda << ',' << t.eta << ',' << t.k << ',' << r.trial
       << ',' << r.seed << ',' << r.rounds_total << ',' << r.messages_total << ',' << r.max_edge_load << ','
       << r.digest << ",\n";
  }
  if (t.summary && !t.rows.empty()) {
    const auto& s = *t.summary;
    os << "summary," << fixed << ",,," << t.eta << ',' << t.k << ",,," << fmt_double(s.mean_rounds) << ','
       << fmt_double(s.mean_messages) << ',' << fmt_double(s.mean_max_load) << ",,"
       << (s.exponent ? fmt_double(*s.exponent) : "") << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ResultTable& t) {
  nlohmann::json j;
  j["version"] = 1;
  j["protocol"] = t.protocol;
  j["n"] = t.n;
  j["m"] = t.m;
  j["D"] = t.diameter;
  j["eta"] = t.eta;
  j["k"] = t.k;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"trial", r.trial},
                         {"seed", r.seed},
                         {"ell", r.ell},
                         {"lambda", r.lambda},
                         {"rounds_total", r.rounds_total},
                         {"messages_total", r.messages_total},
                         {"max_edge_load", r.max_edge_load},
                         {"digest", r.digest}});
  }
  if (t.summary && !t.rows.empty()) {
    const auto& s = *t.summary;
    j["summary"] = {{"mean_rounds", s.mean_rounds},
                    {"mean_messages", s.mean_messages},
                    {"mean_max_load", s.mean_max_load},
                    {"exponent", s.exponent ? nlohmann::json(*s.exponent) : nlohmann::json(nullptr)}};
  }
  return j;
}

std::string render(const ResultTable& t, Format f) {
  return f == Format::csv ? to_csv(t) : to_json(t).dump(2) + "\n";
}

void emit(const ResultTable& t, Format f, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  out << render(t, f);
  if (!out.flush()) throw OutputError("write failed for " + path.string());
}

}  // namespace drw::experiment
