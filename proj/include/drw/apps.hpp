#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drw/congest.hpp"
#include "drw/graph.hpp"
#include "drw/tree.hpp"

namespace drw::apps {

using graph::NodeId;

// ---- random spanning trees ------------------------------------------------

struct SpanningTree {
  NodeId root = 0;
  /// Per node, the other end of its first-visit edge; kNoNode at the root.
  std::vector<NodeId> parent;
  /// Walk length at which the cover check first succeeded.
  std::uint64_t walk_length = 0;
  std::uint32_t phases = 0;
  congest::RoundStats stats;

  /// Edges (min, max), sorted.
  std::vector<graph::Edge> edges() const;
};

/// n-1 edges of g forming a connected acyclic subgraph.
bool is_spanning_tree(const graph::Graph& g, std::span<const graph::Edge> edges);

/// Aldous-Broder driven by distributed walks. Starts with a walk of length n
/// from `root`; while some node is unvisited the walk is extended from its
/// endpoint to double its total length. Every non-root node then keeps the
/// edge of its first visit.
/// `lambda` overrides the short-walk length of each extension (0 = default).
SpanningTree random_spanning_tree(const graph::Graph& g, NodeId root, const congest::SimConfig& cfg,
                                  std::uint64_t lambda = 0);

struct CoverResult {
  bool covered = false;
  congest::RoundStats stats;
};

/// AND-convergecast of "holds a position" over a BFS tree rooted at node 0.
CoverResult check_cover(const graph::Graph& g, const std::vector<std::vector<std::uint64_t>>& positions,
                        const congest::SimConfig& cfg);
/// Same check on an existing network and tree; the root then broadcasts the verdict.
bool check_cover(congest::Network& net, const tree::DistTree& t, std::span<const std::uint64_t> visited);

// ---- mixing time estimation -----------------------------------------------

/// 1/(12e), the closeness parameter of the mixing estimator.
double default_eps();
/// 1/(6912 e sqrt(n) log n).
double mixing_delta(std::size_t n);

struct Buckets {
  double eps = 0.0;
  /// Number of geometric buckets k; indices run 0..k, index 0 collects
  /// masses below 1/(n log n).
  std::uint32_t k = 0;
  std::vector<std::uint32_t> index;  // per node
  std::vector<double> y;             // per node stationary mass
  std::vector<double> mass;          // per bucket, Y(R_i)
  std::vector<double> sq_mass;       // per bucket, sum of Y(v)^2
  std::vector<std::uint64_t> size;   // per bucket, |R_i|
};

std::uint32_t bucket_count(std::size_t n, double eps);
std::uint32_t bucket_of(double y, std::size_t n, double eps);
Buckets bucketize(const graph::Graph& g, double eps);
/// Broadcast of (n, m) from `root`, then a merged upcast of per-bucket node
/// counts, degree sums and squared-degree sums. Per-node entries of the result
/// are filled only for the root.
Buckets bucketize_distributed(congest::Network& net, const tree::DistTree& t, double eps);

enum class ClosenessRule {
  /// L1 distance of bucket tallies plus a collision estimate of the distance
  /// inside each bucket.
  collision,
  /// Bucket tallies only; blind to differences inside a bucket.
  tally_only,
};

enum class Verdict { pass, fail };

struct ClosenessResult {
  Verdict verdict = Verdict::fail;
  double statistic = 0.0;
  double tally_distance = 0.0;
  std::vector<std::uint64_t> tallies;
};

/// ceil(sqrt n) * ceil(eps^-2).
std::uint64_t required_samples(std::size_t n, double eps);

/// sum_i |l_i/K - Y(R_i)|.
double bucket_tally_distance(std::span<const NodeId> samples, const Buckets& b);

/// PASS iff the statistic is at most 3 eps. Throws std::invalid_argument when
/// fewer than required_samples samples are given.
ClosenessResult closeness_test(std::span<const NodeId> samples, const Buckets& b, double eps,
                               ClosenessRule rule = ClosenessRule::collision);

struct MixingOptions {
  double eps = 0.0;  // 0 selects default_eps()
  std::uint32_t c_k = 10;
  NodeId sod_root = 0;
  ClosenessRule rule = ClosenessRule::collision;
  std::uint64_t max_ell = 1ULL << 20;
};

struct TraceEntry {
  std::uint64_t ell = 0;
  Verdict verdict = Verdict::fail;
  double statistic = 0.0;
};

struct MixingReport {
  NodeId source = 0;
  std::uint64_t tau_estimate = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t samples = 0;
  std::vector<TraceEntry> trace;
  /// Tallies l_i and exact masses Y(R_i) at the estimate.
  std::vector<std::uint64_t> bucket_counts;
  std::vector<double> bucket_masses;
  congest::RoundStats stats;
};

/// Samples per test: ceil(sqrt n) * max(c_k ceil(log2 n), ceil(eps^-2)).
std::uint64_t mixing_samples(std::size_t n, double eps, std::uint32_t c_k);

MixingReport estimate_mixing(const graph::Graph& g, NodeId x, const congest::SimConfig& cfg,
                             const MixingOptions& opt = {});

/// Order-of-magnitude bounds (unit constants) implied by a mixing time.
struct SpectralBounds {
  double gap_low = 0.0;
  double gap_high = 0.0;
  double phi_low = 0.0;
  double phi_high = 0.0;
};

SpectralBounds spectral_bounds(std::uint64_t tau, std::size_t n);

}  // namespace drw::apps
