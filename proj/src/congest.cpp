#include "drw/congest.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace drw::congest {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::flood: return "flood";
    case MessageKind::bfs_probe: return "bfs-probe";
    case MessageKind::bfs_ack: return "bfs-ack";
    case MessageKind::coupon: return "coupon";
    case MessageKind::coupon_batch: return "coupon-batch";
    case MessageKind::sample_up: return "sample-up";
    case MessageKind::token: return "token";
    case MessageKind::replay: return "replay";
    case MessageKind::position_notify: return "position-notify";
    case MessageKind::cover_mark: return "cover-mark";
    case MessageKind::upcast_pair: return "upcast-pair";
    case MessageKind::downcast_pair: return "downcast-pair";
    case MessageKind::edge_record: return "edge-record";
    case MessageKind::bucket_summary: return "bucket-summary";
    case MessageKind::info_broadcast: return "info-broadcast";
    case MessageKind::tree_edge: return "tree-edge";
    case MessageKind::neighbor_info: return "neighbor-info";
    case MessageKind::done: return "done";
  }
  return "unknown";
}

std::size_t payload_arity(MessageKind kind) {
  switch (kind) {
    case MessageKind::flood: return 1;           // origin
    case MessageKind::bfs_probe: return 2;       // root, level
    case MessageKind::bfs_ack: return 1;         // adopted?
    case MessageKind::coupon: return 3;          // owner, hop counter, desired length
    case MessageKind::coupon_batch: return 3;    // owner, count, step
    case MessageKind::sample_up: return 3;       // holder, slot, subtree count
    case MessageKind::token: return 4;           // walk, source, completed or position, slot
    case MessageKind::replay: return 4;          // walk, owner, hop counter, position
    case MessageKind::position_notify: return 2; // walk, position
    case MessageKind::cover_mark: return 1;      // bitmask of covering walks
    case MessageKind::upcast_pair: return 4;     // walk, destination, source, destination degree
    case MessageKind::downcast_pair: return 4;   // walk, destination, source, destination degree
    case MessageKind::edge_record: return 2;     // u, v
    case MessageKind::bucket_summary: return 4;  // bucket, nodes, degree sum, squared-degree sum
    case MessageKind::info_broadcast: return 3;  // three scalars
    case MessageKind::tree_edge: return 1;       // walk
    case MessageKind::neighbor_info: return 1;   // degree
    case MessageKind::done: return 0;
  }
  return 0;
}

Message Message::make(MessageKind kind, std::initializer_list<std::uint64_t> fields,
                      std::uint64_t priority, NodeId owner) {
  if (fields.size() != payload_arity(kind)) {
    throw ProtocolError("message '" + std::string(to_string(kind)) + "' expects " +
                        std::to_string(payload_arity(kind)) + " fields, got " +
                        std::to_string(fields.size()));
  }
  Message m;
  m.kind = kind;
  std::copy(fields.begin(), fields.end(), m.fields.begin());
  m.priority = priority;
  m.owner = owner;
  return m;
}

Message Message::with_fields(MessageKind kind, std::span<const std::uint64_t> fields,
                             std::uint64_t priority, NodeId owner) {
  if (fields.size() < payload_arity(kind)) {
    throw ProtocolError("message '" + std::string(to_string(kind)) + "' expects " +
                        std::to_string(payload_arity(kind)) + " fields, got " +
                        std::to_string(fields.size()));
  }
  Message m;
  m.kind = kind;
  std::copy_n(fields.begin(), payload_arity(kind), m.fields.begin());
  m.priority = priority;
  m.owner = owner;
  return m;
}

std::uint32_t payload_bits(const Message& m) {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < payload_arity(m.kind); ++i) {
    bits += std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::bit_width(m.fields[i])));
  }
  return bits;
}

std::uint32_t SimConfig::bandwidth_bits(std::size_t n) const {
  if (bits_per_edge) return bits_per_edge;
  return bandwidth_factor * graph::log2_ceil(n);
}

std::uint64_t RoundStats::phase_rounds(std::string_view label) const {
  auto it = per_phase.find(std::string(label));
  return it == per_phase.end() ? 0 : it->second;
}

std::map<std::uint64_t, std::uint32_t> edge_load_histogram(const RoundStats& stats) {
  std::map<std::uint64_t, std::uint32_t> out;
  for (std::size_t i = 0; i < stats.round_max_load.size(); ++i) {
    if (stats.round_max_load[i]) out.emplace(i + 1, stats.round_max_load[i]);
  }
  return out;
}

std::uint64_t NodeContext::round() const noexcept { return net_.round(); }
std::uint64_t NodeContext::local_round() const noexcept { return net_.round() - net_.run_start(); }
std::span<const NodeId> NodeContext::neighbors() const { return net_.graph().neighbors(id_); }
std::size_t NodeContext::degree() const { return net_.graph().degree(id_); }
std::mt19937_64& NodeContext::rng() { return net_.rng(id_); }
const graph::Graph& NodeContext::graph() const { return net_.graph(); }
void NodeContext::send(NodeId to, const Message& m) { net_.enqueue(id_, to, m); }

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a stream-offset state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Network::Network(const graph::Graph& g, const SimConfig& cfg)
    : graph_(&g), cfg_(cfg), bandwidth_(cfg.bandwidth_bits(g.node_count())) {
  if (cfg_.max_rounds == 0) throw std::invalid_argument("SimConfig.max_rounds must be positive");
  // one node id plus two counters of the same width
  if (bandwidth_ < 3 * graph::log2_ceil(g.node_count())) {
    throw std::invalid_argument("SimConfig bandwidth of " + std::to_string(bandwidth_) +
                                " bits cannot carry one id and two counters");
  }
  const std::size_t n = g.node_count();
  rngs_.reserve(n);
  for (std::size_t v = 0; v < n; ++v) rngs_.emplace_back(split_seed(cfg_.seed, v));
  queues_.resize(g.directed_edge_count());
  is_active_.assign(g.directed_edge_count(), 0);
  inbox_.resize(n);
  next_inbox_.resize(n);
}

void Network::enqueue(NodeId from, NodeId to, const Message& m) {
  const std::size_t slot = graph_->edge_slot(from, to);
  if (slot == graph::Graph::npos) {
    throw ProtocolError("node " + std::to_string(from) + " sent to non-neighbor " + std::to_string(to));
  }
  const auto bits = payload_bits(m);
  if (bits > bandwidth_) {
    throw PayloadTooLarge("message '" + std::string(to_string(m.kind)) + "' needs " +
                          std::to_string(bits) + " bits, budget is " + std::to_string(bandwidth_));
  }
  auto& q = queues_[slot];
  q.push_back({m, seq_++});
  std::push_heap(q.begin(), q.end(), [](const Queued& a, const Queued& b) {
    if (a.msg.priority != b.msg.priority) return a.msg.priority > b.msg.priority;
    if (a.msg.owner != b.msg.owner) return a.msg.owner > b.msg.owner;
    return a.seq > b.seq;
  });
  if (!is_active_[slot]) {
    is_active_[slot] = 1;
    active_.push_back(slot);
  }
}

void Network::deliver(const std::string& phase) {
  (void)phase;
  std::sort(active_.begin(), active_.end());
  std::uint32_t round_max = 0;
  const std::uint64_t this_round = round_ + 1;
  std::size_t keep = 0;
  for (std::size_t i = 0; i < active_.size(); ++i) {
    const std::size_t slot = active_[i];
    auto& q = queues_[slot];
    round_max = std::max<std::uint32_t>(round_max, static_cast<std::uint32_t>(q.size()));
    std::pop_heap(q.begin(), q.end(), [](const Queued& a, const Queued& b) {
      if (a.msg.priority != b.msg.priority) return a.msg.priority > b.msg.priority;
      if (a.msg.owner != b.msg.owner) return a.msg.owner > b.msg.owner;
      return a.seq > b.seq;
    });
    const Message msg = q.back().msg;
    q.pop_back();
    const NodeId from = graph_->slot_tail(slot), to = graph_->slot_head(slot);
    next_inbox_[to].push_back({from, msg});
    ++stats_.messages_total;
    if (cfg_.record_deliveries) log_.push_back({this_round, from, to, msg.kind});
    if (cfg_.record_iteration_loads && msg.kind == MessageKind::coupon) {
      auto& loads = stats_.iteration_loads[msg.fields[1]];
      if (loads.empty()) loads.assign(graph_->edge_count(), 0);
      ++loads[graph_->undirected_id(slot)];
    }
    if (q.empty()) {
      is_active_[slot] = 0;
    } else {
      active_[keep++] = slot;
    }
  }
  active_.resize(keep);
  stats_.max_edge_load = std::max(stats_.max_edge_load, round_max);
  stats_.round_max_load.push_back(round_max);
}

void Network::run(Protocol& protocol, std::string_view phase) {
  const std::string label(phase);
  run_start_ = round_;
  const std::size_t n = graph_->node_count();
  for (;;) {
    for (NodeId v = 0; v < n; ++v) {
      NodeContext ctx(*this, v, inbox_[v]);
      protocol.on_round(ctx);
    }
    for (auto& box : inbox_) box.clear();
    if (active_.empty()) {
      bool all_idle = true;
      for (NodeId v = 0; v < n && all_idle; ++v) all_idle = protocol.idle(v);
      if (all_idle) break;
    }
    if (round_ >= cfg_.max_rounds) throw RoundLimitExceeded(label, cfg_.max_rounds);
    deliver(label);
    std::swap(inbox_, next_inbox_);
    ++round_;
    ++stats_.rounds_total;
    ++stats_.per_phase[label];
  }
}

std::string deliveries_csv(const std::vector<Delivery>& log) {
  std::ostringstream out;
  out << "round,from,to,kind\n";
  for (const auto& d : log) out << d.round << ',' << d.from << ',' << d.to << ',' << to_string(d.kind) << '\n';
  return out.str();
}

}  // namespace drw::congest
