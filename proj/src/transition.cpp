#include "drw/transition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drw::walk {

Transition Transition::simple(const graph::Graph& g) {
  Transition t;
  t.g_ = &g;
  t.pi_.resize(g.node_count());
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) t.pi_[v] = static_cast<double>(g.degree(v)) / two_m;
  return t;
}

Transition Transition::metropolis(const graph::Graph& g, std::span<const double> weights, double alpha) {
  if (weights.size() != g.node_count()) {
    throw std::invalid_argument("target weights: expected " + std::to_string(g.node_count()) + " entries, got " +
                                std::to_string(weights.size()));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  double total = 0.0;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    if (!(weights[v] > 0.0) || !std::isfinite(weights[v])) {
      throw std::invalid_argument("target weight of node " + std::to_string(v) + " is not positive");
    }
    total += weights[v];
  }
  Transition t;
  t.g_ = &g;
  t.simple_ = false;
  t.alpha_ = alpha;
  t.pi_.resize(weights.size());
  for (std::size_t v = 0; v < weights.size(); ++v) t.pi_[v] = weights[v] / total;
  t.cumulative_.resize(g.node_count());
  t.min_ratio_ = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const double di = static_cast<double>(g.degree(i));
    t.min_ratio_ = std::min(t.min_ratio_, t.pi_[i] / di);
    double acc = 0.0;
    for (NodeId j : g.neighbors(i)) {
      const double dj = static_cast<double>(g.degree(j));
      acc += alpha * std::min(1.0 / di, t.pi_[j] / (t.pi_[i] * dj));
      t.cumulative_[i].push_back(acc);
    }
  }
  return t;
}

NodeId Transition::step(NodeId v, std::mt19937_64& rng) const {
  const auto nbrs = g_->neighbors(v);
  if (simple_) {
    std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
    return nbrs[pick(rng)];
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto& cum = cumulative_[v];
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) return v;
  return nbrs[static_cast<std::size_t>(it - cum.begin())];
}

double Transition::probability(NodeId from, NodeId to) const {
  if (from == to) return stay_probability(from);
  const auto nbrs = g_->neighbors(from);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), to);
  if (it == nbrs.end() || *it != to) return 0.0;
  if (simple_) return 1.0 / static_cast<double>(nbrs.size());
  const auto k = static_cast<std::size_t>(it - nbrs.begin());
  const auto& cum = cumulative_[from];
  return cum[k] - (k ? cum[k - 1] : 0.0);
}

double Transition::stay_probability(NodeId v) const {
  if (simple_) return 0.0;
  return cumulative_[v].empty() ? 1.0 : 1.0 - cumulative_[v].back();
}

std::uint64_t Transition::coupon_quota(NodeId v, std::uint64_t eta) const {
  if (simple_) return eta * g_->degree(v);
  const double q = static_cast<double>(eta) * pi_[v] / (alpha_ * min_ratio_);
  return static_cast<std::uint64_t>(std::ceil(q - 1e-9));
}

}  // namespace drw::walk
