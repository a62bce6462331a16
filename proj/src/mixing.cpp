#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "drw/apps.hpp"
#include "drw/walk.hpp"

namespace drw::apps {

using congest::MessageKind;

double default_eps() { return 1.0 / (12.0 * std::numbers::e); }

double mixing_delta(std::size_t n) {
  return 1.0 / (6912.0 * std::numbers::e * std::sqrt(static_cast<double>(n)) * graph::log2_ceil(n));
}

std::uint32_t bucket_count(std::size_t n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  return static_cast<std::uint32_t>(std::ceil(2.0 / std::log2(1.0 + eps) * graph::log2_ceil(n)));
}

std::uint32_t bucket_of(double y, std::size_t n, double eps) {
  const double scaled = y * static_cast<double>(n) * graph::log2_ceil(n);
  if (scaled < 1.0) return 0;
  const auto i = static_cast<std::uint32_t>(std::floor(std::log(scaled) / std::log1p(eps))) + 1;
  return std::min(i, bucket_count(n, eps));
}

namespace {

Buckets empty_buckets(std::size_t n, double eps) {
  Buckets b;
  b.eps = eps;
  b.k = bucket_count(n, eps);
  b.index.assign(n, 0);
  b.y.assign(n, 0.0);
  b.mass.assign(b.k + 1, 0.0);
  b.sq_mass.assign(b.k + 1, 0.0);
  b.size.assign(b.k + 1, 0);
  return b;
}

}  // namespace

Buckets bucketize(const graph::Graph& g, double eps) {
  const std::size_t n = g.node_count();
  auto b = empty_buckets(n, eps);
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  for (NodeId v = 0; v < n; ++v) {
    const double y = static_cast<double>(g.degree(v)) / two_m;
    const auto i = bucket_of(y, n, eps);
    b.index[v] = i;
    b.y[v] = y;
    b.mass[i] += y;
    b.sq_mass[i] += y * y;
    ++b.size[i];
  }
  return b;
}

Buckets bucketize_distributed(congest::Network& net, const tree::DistTree& t, double eps) {
  const auto& g = net.graph();
  const std::size_t n = g.node_count();
  const std::uint64_t m = g.edge_count();
  // every node learns n and m, then files itself under its bucket
  tree::broadcast(net, t, {n, m, 0, 0}, MessageKind::info_broadcast, "bucket-info");
  const double two_m = 2.0 * static_cast<double>(m);
  std::vector<std::vector<tree::Record>> per_node(n);
  for (NodeId v = 0; v < n; ++v) {
    const std::uint64_t d = g.degree(v);
    per_node[v].push_back({bucket_of(static_cast<double>(d) / two_m, n, eps), 1, d, d * d});
  }
  const auto totals = tree::merged_upcast(net, t, per_node, MessageKind::bucket_summary, "bucket-up");
  auto b = empty_buckets(n, eps);
  for (const auto& [i, tot] : totals) {
    b.size[i] = tot[0];
    b.mass[i] = static_cast<double>(tot[1]) / two_m;
    b.sq_mass[i] = static_cast<double>(tot[2]) / (two_m * two_m);
  }
  const NodeId r = t.root;
  b.y[r] = static_cast<double>(g.degree(r)) / two_m;
  b.index[r] = bucket_of(b.y[r], n, eps);
  return b;
}

std::uint64_t required_samples(std::size_t n, double eps) {
  const auto root = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return root * static_cast<std::uint64_t>(std::ceil(1.0 / (eps * eps)));
}

double bucket_tally_distance(std::span<const NodeId> samples, const Buckets& b) {
  std::vector<std::uint64_t> tallies(b.mass.size(), 0);
  for (NodeId s : samples) ++tallies[b.index[s]];
  const double k = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < tallies.size(); ++i) d += std::abs(static_cast<double>(tallies[i]) / k - b.mass[i]);
  return d;
}

ClosenessResult closeness_test(std::span<const NodeId> samples, const Buckets& b, double eps, ClosenessRule rule) {
  const std::size_t n = b.index.size();
  const auto need = required_samples(n, eps);
  if (samples.size() < need) {
    throw std::invalid_argument("closeness_test needs at least " + std::to_string(need) + " samples, got " +
                                std::to_string(samples.size()));
  }
  ClosenessResult r;
  r.tallies.assign(b.mass.size(), 0);
  std::unordered_map<NodeId, std::uint64_t> hits;
  std::vector<double> y_sum(b.mass.size(), 0.0);
  for (NodeId s : samples) {
    ++r.tallies[b.index[s]];
    ++hits[s];
    y_sum[b.index[s]] += b.y[s];
  }
  const double k = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < r.tallies.size(); ++i) {
    r.tally_distance += std::abs(static_cast<double>(r.tallies[i]) / k - b.mass[i]);
  }
  r.statistic = r.tally_distance;
  if (rule == ClosenessRule::collision) {
    std::vector<double> collisions(b.mass.size(), 0.0);
    for (const auto& [v, c] : hits) collisions[b.index[v]] += 0.5 * static_cast<double>(c) * static_cast<double>(c - 1);
    for (std::size_t i = 0; i < r.tallies.size(); ++i) {
      const double li = static_cast<double>(r.tallies[i]);
      if (r.tallies[i] < 2 || b.mass[i] <= 0.0) continue;
      // unbiased estimate of ||X_i - Y_i||_2^2 for the laws conditioned on bucket i
      const double pairs = 0.5 * li * (li - 1.0);
      const double cross = 2.0 * (y_sum[i] / b.mass[i]) / li;
      const double norm = b.sq_mass[i] / (b.mass[i] * b.mass[i]);
      const double l2sq = collisions[i] / pairs - cross + norm;
      r.statistic += li / k * std::sqrt(static_cast<double>(b.size[i]) * std::max(0.0, l2sq));
    }
  }
  r.verdict = r.statistic <= 3.0 * eps ? Verdict::pass : Verdict::fail;
  return r;
}

std::uint64_t mixing_samples(std::size_t n, double eps, std::uint32_t c_k) {
  const auto root = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::uint64_t polylog = static_cast<std::uint64_t>(c_k) * graph::log2_ceil(n);
  const auto inv = static_cast<std::uint64_t>(std::ceil(1.0 / (eps * eps)));
  return root * std::max(polylog, inv);
}

MixingReport estimate_mixing(const graph::Graph& g, NodeId x, const congest::SimConfig& cfg,
                             const MixingOptions& opt) {
  if (graph::is_bipartite(g)) throw std::invalid_argument("estimate_mixing: graph is bipartite");
  const std::size_t n = g.node_count();
  if (x >= n) throw std::out_of_range("source out of range");
  const double eps = opt.eps > 0.0 ? opt.eps : default_eps();

  MixingReport rep;
  rep.source = x;
  rep.eps = eps;
  rep.delta = mixing_delta(n);
  rep.samples = mixing_samples(n, eps, opt.c_k);

  walk::WalkSession session(g, cfg);
  auto& net = session.network();
  const auto t = tree::build_bfs(net, x, "bucket-bfs");
  const auto shared = bucketize_distributed(net, t, eps);
  const std::vector<NodeId> sources(rep.samples, x);
  const double two_m = 2.0 * static_cast<double>(g.edge_count());

  std::vector<std::uint64_t> final_tallies;
  auto test = [&](std::uint64_t ell) {
    walk::WalkParams p;
    p.ell = ell;
    p.k = sources.size();
    const auto walks = session.many(sources, p);
    std::vector<std::uint64_t> degrees;
    const auto delivered = session.deliver_to_sources(walks, opt.sod_root, &degrees);
    // x places each delivered destination from its reported degree
    Buckets local = shared;
    for (std::size_t i = 0; i < delivered.size(); ++i) {
      const double y = static_cast<double>(degrees[i]) / two_m;
      local.y[delivered[i]] = y;
      local.index[delivered[i]] = bucket_of(y, n, eps);
    }
    const auto res = closeness_test(delivered, local, eps, opt.rule);
    rep.trace.push_back({ell, res.verdict, res.statistic});
    if (res.verdict == Verdict::pass) final_tallies = res.tallies;
    return res.verdict == Verdict::pass;
  };

  std::uint64_t hi = 1;
  while (!test(hi)) {
    if (hi >= opt.max_ell) throw std::runtime_error("estimate_mixing: no PASS up to ell = " + std::to_string(hi));
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;  // last FAIL, or 0 when ell = 1 passed
  std::vector<std::uint64_t> best = final_tallies;
  while (lo > 0 && hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (test(mid)) {
      hi = mid;
      best = final_tallies;
    } else {
      lo = mid;
    }
  }
  rep.tau_estimate = hi;
  rep.bucket_counts = best;
  rep.bucket_masses = shared.mass;
  rep.stats = net.stats();
  return rep;
}

SpectralBounds spectral_bounds(std::uint64_t tau, std::size_t n) {
  if (tau < 1) throw std::invalid_argument("spectral_bounds: tau must be at least 1");
  if (n < 2) throw std::invalid_argument("spectral_bounds: need n >= 2");
  const double t = static_cast<double>(tau);
  SpectralBounds b;
  b.gap_low = 1.0 / t;
  // 1 - lambda_2 never exceeds n/(n-1), the complete graph's gap
  b.gap_high = std::min(graph::log2_ceil(n) / t, static_cast<double>(n) / static_cast<double>(n - 1));
  b.gap_high = std::max(b.gap_high, b.gap_low);
  b.phi_high = std::min(1.0, std::sqrt(b.gap_high));
  b.phi_low = std::min(b.gap_low, b.phi_high);
  return b;
}

}  // namespace drw::apps
