#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "drw/congest.hpp"
#include "drw/graph.hpp"
#include "drw/transition.hpp"
#include "drw/tree.hpp"

namespace drw::walk {

using graph::NodeId;

struct WalkParams {
  std::uint64_t ell = 0;
  /// Short-walk base length; 0 selects the operation's default formula.
  std::uint64_t lambda = 0;
  std::uint64_t eta = 1;
  std::uint64_t k = 1;
  /// Keep prev-hop records so the walk can be regenerated afterwards.
  bool retain_traces = false;
  /// Reuse one BFS tree per root across Sample-Coupon calls.
  bool cache_bfs = false;
};

/// Walks longer than kFallbackBeta * m^2 are served by fallback_collect.
inline constexpr std::uint64_t kFallbackBeta = 1;

/// ceil(32 sqrt(ell D) log^3 n), clamped to [1, ell].
std::uint64_t default_lambda(std::uint64_t ell, std::size_t n, std::uint32_t diameter);
/// (32 sqrt(k ell D + 1) log n + k) log^2 n, unclamped; larger than ell means naive walks.
std::uint64_t many_walks_lambda(std::uint64_t k, std::uint64_t ell, std::size_t n, std::uint32_t diameter);

/// Throws std::invalid_argument when lambda or eta or k is out of range.
void validate(const WalkParams& p);

struct Coupon {
  NodeId owner = 0;
  std::uint64_t desired_length = 0;
  std::uint64_t counter = 0;
};

/// Resting coupons per holder node.
using Placement = std::vector<std::vector<Coupon>>;

struct Token {
  NodeId source = 0;
  std::uint64_t completed = 0;
  std::vector<NodeId> connectors;
};

enum class WalkMode { naive, stitched, fallback };
std::string_view to_string(WalkMode mode);

struct WalkOutcome {
  std::size_t walk = 0;
  NodeId source = 0;
  NodeId destination = 0;
  std::uint64_t ell = 0;
  std::uint64_t lambda = 0;
  WalkMode mode = WalkMode::naive;
  Token token;
  std::vector<std::uint64_t> stitch_lengths;
  std::uint64_t naive_steps = 0;
  /// Per node, the sorted indices at which the walk visits it; empty until regenerated.
  std::vector<std::vector<std::uint64_t>> positions;
  /// Per node, |positions(v)|; empty until regenerated.
  std::vector<std::uint64_t> visit_counts;
  /// Per node, the predecessor of its earliest position (kNoNode for the source
  /// and unvisited nodes); empty until regenerated.
  std::vector<NodeId> first_visit_parent;
  congest::RoundStats stats;
};

/// The vertex sequence of a regenerated walk.
std::vector<NodeId> trajectory(const WalkOutcome& w);

class MissingTrace : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One network plus all node-local walk state (resting coupons, prev-hop
/// records, position records). Successive operations share the round counter.
class WalkSession {
 public:
  WalkSession(const graph::Graph& g, const congest::SimConfig& cfg, bool retain_traces = false);
  WalkSession(const graph::Graph& g, const congest::SimConfig& cfg, Transition tr, bool retain_traces = false);
  ~WalkSession();
  WalkSession(const WalkSession&) = delete;
  WalkSession& operator=(const WalkSession&) = delete;

  const graph::Graph& graph() const;
  const Transition& transition() const;
  congest::Network& network();
  std::uint32_t diameter() const;

  /// Phase 1: every node launches its quota of coupons with lengths in [lambda, 2 lambda - 1].
  void phase1(std::uint64_t lambda, std::uint64_t eta);
  /// Sample-Coupon rooted at v: picks one of v's resting coupons uniformly.
  /// Returns the holder; the session remembers the winning path for routing.
  std::optional<NodeId> sample(NodeId v, bool cache_bfs = false);
  /// Length of the coupon picked by the last successful sample.
  std::uint64_t sampled_length() const;
  /// Send-More-Coupons from v; returns rounds spent in Part 1.
  std::uint64_t more_coupons(NodeId v, std::uint64_t eta, std::uint64_t lambda);
  Placement placement() const;
  void load_placement(const Placement& p);
  void clear_coupons();

  WalkOutcome single(NodeId s, const WalkParams& p);
  std::vector<WalkOutcome> many(std::span<const NodeId> sources, const WalkParams& p);
  WalkOutcome naive(NodeId s, std::uint64_t ell);
  std::vector<WalkOutcome> naive_many(std::span<const NodeId> sources, std::uint64_t ell);
  WalkOutcome fallback(NodeId s, std::uint64_t ell);

  /// Fills positions, visit counts and first-visit parents of each outcome.
  void regenerate(std::span<WalkOutcome> walks);
  /// k-RW-SoD: destinations upcast (walk, destination, source) to `root`,
  /// which downcasts every pair; returns what each source learned, by walk
  /// order. `degrees`, when given, receives each destination's degree.
  std::vector<NodeId> deliver_to_sources(std::span<const WalkOutcome> walks, NodeId root = 0,
                                         std::vector<std::uint64_t>* degrees = nullptr);

  /// Node-local state, opaque outside the implementation.
  struct State;

 private:
  std::unique_ptr<State> st_;
};

struct Phase1Result {
  Placement placement;
  congest::RoundStats stats;
};
Phase1Result phase1_distribute(const graph::Graph& g, const WalkParams& p, const congest::SimConfig& cfg);

struct SampleResult {
  std::optional<NodeId> holder;
  std::uint64_t desired_length = 0;
  congest::RoundStats stats;
};
SampleResult sample_coupon(const graph::Graph& g, NodeId root, const Placement& placement,
                           const congest::SimConfig& cfg);

struct MoreCouponsResult {
  Placement added;
  std::uint64_t part1_rounds = 0;
  congest::RoundStats stats;
};
MoreCouponsResult send_more_coupons(const graph::Graph& g, NodeId v, const WalkParams& p,
                                    const congest::SimConfig& cfg);

/// Stitched walk when 2 lambda <= ell <= m^2, naive walk when ell < 2 lambda,
/// fallback_collect beyond m^2.
WalkOutcome single_random_walk(const graph::Graph& g, NodeId s, const WalkParams& p,
                               const congest::SimConfig& cfg);

std::vector<WalkOutcome> many_random_walks(const graph::Graph& g, std::span<const NodeId> sources,
                                           const WalkParams& p, const congest::SimConfig& cfg);

/// Runs single_random_walk with traces kept and replays it.
WalkOutcome regenerate_walk(const graph::Graph& g, NodeId s, const WalkParams& p, const congest::SimConfig& cfg);
/// Replays walks already run in `session`.
void regenerate_walk(WalkSession& session, WalkOutcome& w);

struct SodResult {
  std::vector<WalkOutcome> walks;
  std::vector<NodeId> delivered;
  std::uint64_t delivery_rounds = 0;
  congest::RoundStats stats;
};
SodResult k_rw_sod(const graph::Graph& g, std::span<const NodeId> sources, const WalkParams& p,
                   const congest::SimConfig& cfg, NodeId root = 0);

WalkOutcome mh_random_walk(const graph::Graph& g, NodeId s, std::span<const double> target, double alpha,
                           const WalkParams& p, const congest::SimConfig& cfg);

WalkOutcome fallback_collect(const graph::Graph& g, NodeId s, std::uint64_t ell, const congest::SimConfig& cfg);

/// Token forwarding baseline: exactly ell rounds for the simple walk.
WalkOutcome naive_random_walk(const graph::Graph& g, NodeId s, std::uint64_t ell, const congest::SimConfig& cfg);

}  // namespace drw::walk
