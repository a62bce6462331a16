#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drw/graph.hpp"

namespace drw::congest {

using graph::NodeId;

enum class MessageKind : std::uint8_t {
  flood,
  bfs_probe,
  bfs_ack,
  coupon,
  coupon_batch,
  sample_up,
  token,
  replay,
  position_notify,
  cover_mark,
  upcast_pair,
  downcast_pair,
  edge_record,
  bucket_summary,
  info_broadcast,
  tree_edge,
  neighbor_info,
  done,
};

std::string_view to_string(MessageKind kind);

/// Number of payload fields each kind carries.
std::size_t payload_arity(MessageKind kind);

inline constexpr std::size_t kMaxFields = 4;

struct Message {
  MessageKind kind = MessageKind::flood;
  std::array<std::uint64_t, kMaxFields> fields{};
  /// Queue order on a congested edge: lowest priority first, then owner, then FIFO.
  std::uint64_t priority = 0;
  NodeId owner = 0;

  static Message make(MessageKind kind, std::initializer_list<std::uint64_t> fields,
                      std::uint64_t priority = 0, NodeId owner = 0);
  /// Takes the first payload_arity(kind) entries of `fields`.
  static Message with_fields(MessageKind kind, std::span<const std::uint64_t> fields,
                             std::uint64_t priority = 0, NodeId owner = 0);

  std::uint64_t operator[](std::size_t i) const { return fields[i]; }
};

/// Encoded size: each field costs its bit width (at least one bit). The kind
/// tag is protocol framing and is not charged.
std::uint32_t payload_bits(const Message& m);

struct Envelope {
  NodeId from;
  Message msg;
};

struct SimConfig {
  /// c in B = c * ceil(log2 n).
  std::uint32_t bandwidth_factor = 8;
  /// Explicit B in bits; 0 derives it from n and bandwidth_factor.
  std::uint32_t bits_per_edge = 0;
  /// Cap on the cumulative round counter of one network.
  std::uint64_t max_rounds = 50'000'000;
  std::uint64_t seed = 1;
  bool record_deliveries = false;
  /// Bin every delivered coupon by its hop counter (the X^j(e) loads).
  bool record_iteration_loads = false;

  std::uint32_t bandwidth_bits(std::size_t n) const;
};

struct Delivery {
  std::uint64_t round;
  NodeId from;
  NodeId to;
  MessageKind kind;
};

struct RoundStats {
  std::uint64_t rounds_total = 0;
  std::uint64_t messages_total = 0;
  /// Largest queue seen on a directed edge at delivery time.
  std::uint32_t max_edge_load = 0;
  /// Rounds charged to each phase label; sums to rounds_total.
  std::map<std::string, std::uint64_t> per_phase;
  /// Entry r-1 holds the max directed-edge queue length in round r (0 when idle).
  std::vector<std::uint32_t> round_max_load;
  /// Hop counter j -> coupons crossing each undirected edge in that hop.
  std::map<std::uint64_t, std::vector<std::uint32_t>> iteration_loads;

  std::uint64_t phase_rounds(std::string_view label) const;
};

/// Round -> max directed-edge load, for rounds that delivered anything.
std::map<std::uint64_t, std::uint32_t> edge_load_histogram(const RoundStats& stats);

class RoundLimitExceeded : public std::runtime_error {
 public:
  RoundLimitExceeded(std::string phase, std::uint64_t limit)
      : std::runtime_error("round limit " + std::to_string(limit) + " exceeded in phase '" + phase + "'"),
        phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

class PayloadTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Network;

/// What a node sees during one round.
class NodeContext {
 public:
  NodeContext(Network& net, NodeId id, std::span<const Envelope> inbox)
      : net_(net), id_(id), inbox_(inbox) {}

  NodeId id() const noexcept { return id_; }
  std::uint64_t round() const noexcept;
  /// Rounds elapsed since the current protocol run started.
  std::uint64_t local_round() const noexcept;
  std::span<const Envelope> inbox() const noexcept { return inbox_; }
  std::span<const NodeId> neighbors() const;
  std::size_t degree() const;
  std::mt19937_64& rng();
  const graph::Graph& graph() const;

  /// Queues m on the edge to neighbor `to`; delivered in a later round.
  void send(NodeId to, const Message& m);

 private:
  Network& net_;
  NodeId id_;
  std::span<const Envelope> inbox_;
};

/// Node state machine family. on_round runs for every node in every round;
/// the run ends once no message is queued and every node reports idle.
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual void on_round(NodeContext& ctx) = 0;
  virtual bool idle(NodeId) const { return true; }
};

/// Synchronous round engine. Each directed edge delivers at most one message
/// per round; the rest wait in a per-edge priority queue.
class Network {
 public:
  Network(const graph::Graph& g, const SimConfig& cfg);

  const graph::Graph& graph() const noexcept { return *graph_; }
  const SimConfig& config() const noexcept { return cfg_; }
  std::uint32_t bandwidth_bits() const noexcept { return bandwidth_; }

  std::uint64_t round() const noexcept { return round_; }
  std::uint64_t run_start() const noexcept { return run_start_; }
  std::mt19937_64& rng(NodeId v) { return rngs_[v]; }

  /// Executes `protocol` to quiescence, charging rounds to `phase`.
  void run(Protocol& protocol, std::string_view phase);

  const RoundStats& stats() const noexcept { return stats_; }
  RoundStats& stats() noexcept { return stats_; }
  const std::vector<Delivery>& deliveries() const noexcept { return log_; }

  void enqueue(NodeId from, NodeId to, const Message& m);

 private:
  struct Queued {
    Message msg;
    std::uint64_t seq;
  };

  void deliver(const std::string& phase);

  const graph::Graph* graph_;
  SimConfig cfg_;
  std::uint32_t bandwidth_;
  std::uint64_t round_ = 0;
  std::uint64_t run_start_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<std::mt19937_64> rngs_;
  std::vector<std::vector<Queued>> queues_;
  std::vector<std::size_t> active_;
  std::vector<char> is_active_;
  std::vector<std::vector<Envelope>> inbox_;
  std::vector<std::vector<Envelope>> next_inbox_;
  RoundStats stats_;
  std::vector<Delivery> log_;
};

/// Deterministic 64-bit mixer used to derive independent seeds.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// CSV with header "round,from,to,kind".
std::string deliveries_csv(const std::vector<Delivery>& log);

}  // namespace drw::congest
