#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "drw/graph.hpp"

namespace drw::walk {

using graph::NodeId;

/// One-step law of the walk: the simple random walk, or the Metropolis-Hastings
/// chain P(i,j) = alpha * min(1/d_i, pi_j / (pi_i d_j)) whose leftover mass
/// stays at i.
class Transition {
 public:
  static Transition simple(const graph::Graph& g);
  /// `weights` must be positive; they are normalized here.
  static Transition metropolis(const graph::Graph& g, std::span<const double> weights, double alpha);

  bool is_simple() const noexcept { return simple_; }
  double alpha() const noexcept { return alpha_; }
  /// Normalized target (deg/2m for the simple walk).
  const std::vector<double>& target() const noexcept { return pi_; }

  /// Next node; equals v when an MH step stays put.
  NodeId step(NodeId v, std::mt19937_64& rng) const;

  double probability(NodeId from, NodeId to) const;
  double stay_probability(NodeId v) const;

  /// Coupons node v creates in Phase 1: eta*deg(v) for the simple walk,
  /// ceil(eta * pi(v) / (alpha * min_y pi(y)/deg(y))) for MH.
  std::uint64_t coupon_quota(NodeId v, std::uint64_t eta) const;

 private:
  const graph::Graph* g_ = nullptr;
  bool simple_ = true;
  double alpha_ = 1.0;
  std::vector<double> pi_;
  // MH only: per node, cumulative move probabilities aligned with neighbors(v).
  std::vector<std::vector<double>> cumulative_;
  double min_ratio_ = 0.0;
};

}  // namespace drw::walk
