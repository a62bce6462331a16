#include "drw/tree.hpp"

#include <algorithm>
#include <limits>

namespace drw::tree {

using congest::Message;
using congest::MessageKind;
using congest::NodeContext;

namespace {

constexpr std::uint64_t kLast = std::numeric_limits<std::uint64_t>::max();

class BfsBuild final : public congest::Protocol {
 public:
  BfsBuild(std::size_t n, NodeId root) : root_(root), joined_(n, 0), awaiting_(n, 0) {
    tree_.root = root;
    tree_.parent.assign(n, graph::kNoNode);
    tree_.children.resize(n);
    tree_.level.assign(n, 0);
  }

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0 && u == root_) {
      joined_[u] = 1;
      for (NodeId w : ctx.neighbors()) ctx.send(w, Message::make(MessageKind::bfs_probe, {root_, 0}));
      awaiting_[u] = ctx.degree();
      return;
    }
    std::vector<NodeId> probers;
    std::uint32_t probe_level = 0;
    for (const auto& env : ctx.inbox()) {
      if (env.msg.kind == MessageKind::bfs_probe) {
        probers.push_back(env.from);
        probe_level = static_cast<std::uint32_t>(env.msg[1]);
      } else if (env.msg.kind == MessageKind::bfs_ack) {
        --awaiting_[u];
        if (env.msg[0]) tree_.children[u].push_back(env.from);
      }
    }
    if (probers.empty()) return;
    if (joined_[u]) {
      for (NodeId w : probers) ctx.send(w, Message::make(MessageKind::bfs_ack, {0}));
      return;
    }
    joined_[u] = 1;
    const NodeId parent = *std::min_element(probers.begin(), probers.end());
    tree_.parent[u] = parent;
    tree_.level[u] = probe_level + 1;
    for (NodeId w : probers) ctx.send(w, Message::make(MessageKind::bfs_ack, {w == parent ? 1u : 0u}));
    for (NodeId w : ctx.neighbors()) {
      if (std::find(probers.begin(), probers.end(), w) != probers.end()) continue;
      ctx.send(w, Message::make(MessageKind::bfs_probe, {root_, tree_.level[u]}));
      ++awaiting_[u];
    }
  }

  bool idle(NodeId v) const override { return awaiting_[v] == 0; }

  DistTree take() {
    for (auto& c : tree_.children) std::sort(c.begin(), c.end());
    tree_.depth = *std::max_element(tree_.level.begin(), tree_.level.end());
    return std::move(tree_);
  }

 private:
  NodeId root_;
  DistTree tree_;
  std::vector<char> joined_;
  std::vector<std::size_t> awaiting_;
};

std::uint64_t combine(Combine op, std::uint64_t a, std::uint64_t b) {
  switch (op) {
    case Combine::sum: return a + b;
    case Combine::min: return std::min(a, b);
    case Combine::max: return std::max(a, b);
  }
  return a;
}

class Convergecast final : public congest::Protocol {
 public:
  Convergecast(const DistTree& t, std::span<const std::uint64_t> values, Combine op)
      : t_(t), op_(op), acc_(values.begin(), values.end()), waiting_(t.children.size()) {
    for (std::size_t v = 0; v < waiting_.size(); ++v) waiting_[v] = t.children[v].size();
  }

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    for (const auto& env : ctx.inbox()) {
      acc_[u] = combine(op_, acc_[u], env.msg[0]);
      --waiting_[u];
    }
    if (waiting_[u] == 0 && !sent_[u]) {
      sent_[u] = 1;
      if (u != t_.root) ctx.send(t_.parent[u], Message::make(MessageKind::cover_mark, {acc_[u]}));
    }
  }

  bool idle(NodeId v) const override { return sent_[v]; }
  std::uint64_t result() const { return acc_[t_.root]; }

  void start() { sent_.assign(acc_.size(), 0); }

 private:
  const DistTree& t_;
  Combine op_;
  std::vector<std::uint64_t> acc_;
  std::vector<std::size_t> waiting_;
  std::vector<char> sent_;
};

/// Forwards every received record to all children; the root injects.
class Flood final : public congest::Protocol {
 public:
  Flood(const DistTree& t, std::span<const Record> records, MessageKind kind, const RecordSink& sink)
      : t_(t), records_(records), kind_(kind), sink_(sink) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0 && u == t_.root) {
      for (const auto& r : records_) {
        if (sink_) sink_(u, r);
        for (NodeId c : t_.children[u]) ctx.send(c, Message::with_fields(kind_, r));
      }
      return;
    }
    for (const auto& env : ctx.inbox()) {
      Record r{env.msg[0], env.msg[1], env.msg[2], env.msg[3]};
      if (sink_) sink_(u, r);
      for (NodeId c : t_.children[u]) ctx.send(c, env.msg);
    }
  }

 private:
  const DistTree& t_;
  std::span<const Record> records_;
  MessageKind kind_;
  const RecordSink& sink_;
};

class Upcast final : public congest::Protocol {
 public:
  Upcast(const DistTree& t, const std::vector<std::vector<Record>>& per_node, MessageKind kind)
      : t_(t), per_node_(per_node), kind_(kind), waiting_(t.children.size()), done_(t.children.size(), 0) {
    for (std::size_t v = 0; v < waiting_.size(); ++v) waiting_[v] = t.children[v].size();
  }

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    const bool root = u == t_.root;
    if (ctx.local_round() == 0) {
      for (const auto& r : per_node_[u]) emit(ctx, root, r);
    }
    for (const auto& env : ctx.inbox()) {
      if (env.msg.kind == MessageKind::done) {
        --waiting_[u];
      } else {
        emit(ctx, root, Record{env.msg[0], env.msg[1], env.msg[2], env.msg[3]});
      }
    }
    if (waiting_[u] == 0 && !done_[u]) {
      done_[u] = 1;
      if (!root) ctx.send(t_.parent[u], Message::make(MessageKind::done, {}, kLast));
    }
  }

  bool idle(NodeId v) const override { return done_[v]; }
  std::vector<Record>& collected() { return at_root_; }

 private:
  void emit(NodeContext& ctx, bool root, const Record& r) {
    if (root) {
      at_root_.push_back(r);
    } else {
      ctx.send(t_.parent[ctx.id()], Message::with_fields(kind_, r));
    }
  }

  const DistTree& t_;
  const std::vector<std::vector<Record>>& per_node_;
  MessageKind kind_;
  std::vector<std::size_t> waiting_;
  std::vector<char> done_;
  std::vector<Record> at_root_;
};

class MergedUpcast final : public congest::Protocol {
 public:
  MergedUpcast(const DistTree& t, const std::vector<std::vector<Record>>& per_node, MessageKind kind)
      : t_(t), kind_(kind), state_(t.children.size()) {
    for (std::size_t v = 0; v < state_.size(); ++v) {
      for (const auto& r : per_node[v]) {
        auto& slot = state_[v].acc[r[0]];
        for (int i = 0; i < 3; ++i) slot[i] += r[i + 1];
      }
      for (NodeId c : t.children[v]) state_[v].frontier[c] = -1;
    }
  }

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    auto& st = state_[u];
    for (const auto& env : ctx.inbox()) {
      if (env.msg.kind == MessageKind::done) {
        st.frontier[env.from] = std::numeric_limits<std::int64_t>::max();
      } else {
        auto& slot = st.acc[env.msg[0]];
        for (int i = 0; i < 3; ++i) slot[i] += env.msg[i + 1];
        st.frontier[env.from] = static_cast<std::int64_t>(env.msg[0]);
      }
    }
    if (st.finished) return;
    std::int64_t bound = std::numeric_limits<std::int64_t>::max();
    for (const auto& [child, f] : st.frontier) bound = std::min(bound, f);
    const bool all_done = bound == std::numeric_limits<std::int64_t>::max();
    if (u == t_.root) {
      st.finished = all_done;
      return;
    }
    auto it = st.emitted < 0 ? st.acc.begin() : st.acc.upper_bound(static_cast<std::uint64_t>(st.emitted));
    for (; it != st.acc.end() && (all_done || static_cast<std::int64_t>(it->first) <= bound); ++it) {
      const Record r{it->first, it->second[0], it->second[1], it->second[2]};
      ctx.send(t_.parent[u], Message::with_fields(kind_, r));
      st.emitted = static_cast<std::int64_t>(it->first);
    }
    if (all_done) {
      st.finished = true;
      ctx.send(t_.parent[u], Message::make(MessageKind::done, {}, kLast));
    }
  }

  bool idle(NodeId v) const override { return state_[v].finished; }
  const std::map<std::uint64_t, Totals>& result() const {
    return state_[t_.root].acc;
  }

 private:
  struct NodeState {
    std::map<std::uint64_t, Totals> acc;
    std::map<NodeId, std::int64_t> frontier;
    std::int64_t emitted = -1;
    bool finished = false;
  };

  const DistTree& t_;
  MessageKind kind_;
  std::vector<NodeState> state_;
};

}  // namespace

DistTree build_bfs(congest::Network& net, NodeId root, std::string_view phase) {
  BfsBuild p(net.graph().node_count(), root);
  net.run(p, phase);
  return p.take();
}

std::uint64_t convergecast(congest::Network& net, const DistTree& t, std::span<const std::uint64_t> values,
                           Combine op, std::string_view phase) {
  Convergecast p(t, values, op);
  p.start();
  net.run(p, phase);
  return p.result();
}

void broadcast(congest::Network& net, const DistTree& t, const Record& rec, MessageKind kind,
               std::string_view phase, const RecordSink& sink) {
  const Record one[1] = {rec};
  Flood p(t, one, kind, sink);
  net.run(p, phase);
}

std::vector<Record> upcast(congest::Network& net, const DistTree& t,
                           const std::vector<std::vector<Record>>& per_node, MessageKind kind,
                           std::string_view phase) {
  Upcast p(t, per_node, kind);
  net.run(p, phase);
  return std::move(p.collected());
}

void downcast(congest::Network& net, const DistTree& t, std::span<const Record> records, MessageKind kind,
              std::string_view phase, const RecordSink& sink) {
  Flood p(t, records, kind, sink);
  net.run(p, phase);
}

std::map<std::uint64_t, Totals> merged_upcast(
    congest::Network& net, const DistTree& t, const std::vector<std::vector<Record>>& per_node,
    MessageKind kind, std::string_view phase) {
  MergedUpcast p(t, per_node, kind);
  net.run(p, phase);
  return p.result();
}

}  // namespace drw::tree
