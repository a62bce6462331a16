#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "drw/graph.hpp"

namespace testing {

/// Upper-tail p-value of Pearson's statistic for observed counts against expected probabilities.
inline double chi2_pvalue(std::span<const std::uint64_t> counts, std::span<const double> probs) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  double stat = 0;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0) continue;
    const double e = total * probs[i];
    stat += (static_cast<double>(counts[i]) - e) * (static_cast<double>(counts[i]) - e) / e;
    ++cells;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Half L1 distance between empirical frequencies and `probs`.
inline double tv_counts(std::span<const std::uint64_t> counts, std::span<const double> probs) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  double d = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) d += std::abs(static_cast<double>(counts[i]) / total - probs[i]);
  return d / 2;
}

/// Connected graph on n nodes: a random spanning tree plus extra random edges.
inline drw::graph::Graph random_connected(std::size_t n, std::size_t extra, std::mt19937_64& rng) {
  std::vector<drw::graph::Edge> edges;
  std::map<drw::graph::Edge, bool> seen;
  auto add = [&](drw::graph::NodeId a, drw::graph::NodeId b) {
    if (a == b) return;
    drw::graph::Edge e{std::min(a, b), std::max(a, b)};
    if (seen.emplace(e, true).second) edges.push_back(e);
  };
  for (drw::graph::NodeId v = 1; v < n; ++v) {
    std::uniform_int_distribution<drw::graph::NodeId> pick(0, v - 1);
    add(v, pick(rng));
  }
  std::uniform_int_distribution<drw::graph::NodeId> any(0, static_cast<drw::graph::NodeId>(n - 1));
  for (std::size_t i = 0; i < extra; ++i) add(any(rng), any(rng));
  return drw::graph::Graph::from_edges(n, edges);
}

/// Brute-force all-pairs distances by Floyd-Warshall.
inline std::vector<std::vector<std::uint32_t>> all_pairs(const drw::graph::Graph& g) {
  const std::size_t n = g.node_count();
  const std::uint32_t inf = 1u << 30;
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, inf));
  for (drw::graph::NodeId v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (auto u : g.neighbors(v)) d[v][u] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

}  // namespace testing
