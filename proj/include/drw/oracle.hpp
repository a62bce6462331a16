#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drw/graph.hpp"

namespace drw::oracle {

using graph::NodeId;
using Distribution = std::vector<double>;

/// A reversible chain on the graph's nodes: transition matrix, its
/// stationary vector, and c = min{pi(x) Q(x,y) : x != y, Q(x,y) > 0}.
struct ChainSpec {
  Eigen::MatrixXd transition;
  Distribution stationary;
  double c = 0.0;

  static ChainSpec simple(const graph::Graph& g);
  /// Q = (I + P) / 2.
  static ChainSpec lazy(const graph::Graph& g);
  static ChainSpec metropolis(const graph::Graph& g, std::span<const double> weights, double alpha);
};

/// Exact t-step law from s. Iterates the row for moderate t and switches to the
/// symmetrized eigen-decomposition for very long walks.
Distribution walk_distribution(const graph::Graph& g, NodeId s, std::uint64_t t, const ChainSpec& chain);
Distribution walk_distribution(const graph::Graph& g, NodeId s, std::uint64_t t);

/// Sequential token walk: [s, v1, ..., vt].
std::vector<NodeId> naive_walk(const graph::Graph& g, NodeId s, std::uint64_t t, std::uint64_t seed);

/// deg(v) / 2m.
Distribution stationary(const graph::Graph& g);

double l1_distance(std::span<const double> a, std::span<const double> b);
double tv_distance(std::span<const double> a, std::span<const double> b);

/// min t with ||pi_x(t) - pi||_1 < delta; rejects bipartite graphs.
std::uint64_t exact_mixing(const graph::Graph& g, NodeId x, double delta);

/// ||pi_x(t) - pi||_1 for t = 0..t_max.
std::vector<double> distance_profile(const graph::Graph& g, NodeId x, std::uint64_t t_max);

/// Matrix-tree count by fraction-free elimination on a Laplacian minor.
/// Throws std::overflow_error when the exact value no longer fits.
std::uint64_t spanning_tree_count(const graph::Graph& g);

/// Sum_{i=0..t} Q^i, entry (x, y) = expected visits to y within t steps from x.
Eigen::MatrixXd expected_visits(const ChainSpec& chain, std::uint64_t t);

/// Eigenvalues of the simple walk's transition matrix, descending.
std::vector<double> eigenvalues(const graph::Graph& g);
/// 1 - lambda_2 of the simple walk.
double spectral_gap(const graph::Graph& g);

/// "node,probability" rows.
std::string distribution_csv(const Distribution& d);

}  // namespace drw::oracle
