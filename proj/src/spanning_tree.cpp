#include <algorithm>
#include <numeric>

#include "drw/apps.hpp"
#include "drw/walk.hpp"

namespace drw::apps {

using congest::Message;
using congest::MessageKind;

std::vector<graph::Edge> SpanningTree::edges() const {
  std::vector<graph::Edge> out;
  for (NodeId v = 0; v < parent.size(); ++v) {
    if (parent[v] != graph::kNoNode) out.emplace_back(std::min(v, parent[v]), std::max(v, parent[v]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_spanning_tree(const graph::Graph& g, std::span<const graph::Edge> edges) {
  const std::size_t n = g.node_count();
  if (edges.size() + 1 != n) return false;
  std::vector<NodeId> up(n);
  std::iota(up.begin(), up.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  };
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n || !g.has_edge(a, b)) return false;
    const NodeId ra = find(a), rb = find(b);
    if (ra == rb) return false;
    up[ra] = rb;
  }
  return true;
}

bool check_cover(congest::Network& net, const tree::DistTree& t, std::span<const std::uint64_t> visited) {
  const auto all = tree::convergecast(net, t, visited, tree::Combine::min, "cover");
  tree::broadcast(net, t, {all, 0, 0, 0}, MessageKind::info_broadcast, "cover-verdict");
  return all == 1;
}

CoverResult check_cover(const graph::Graph& g, const std::vector<std::vector<std::uint64_t>>& positions,
                        const congest::SimConfig& cfg) {
  congest::Network net(g, cfg);
  const auto t = tree::build_bfs(net, 0, "cover-bfs");
  std::vector<std::uint64_t> visited(g.node_count(), 0);
  for (NodeId v = 0; v < g.node_count() && v < positions.size(); ++v) visited[v] = positions[v].empty() ? 0 : 1;
  CoverResult r;
  r.covered = check_cover(net, t, visited);
  r.stats = net.stats();
  return r;
}

namespace {

/// Each non-root node tells the predecessor of its first visit that the edge
/// between them is in the tree.
class TreeSelect final : public congest::Protocol {
 public:
  explicit TreeSelect(const std::vector<NodeId>& parent) : parent_(parent), children_(parent.size()) {}

  void on_round(congest::NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0 && parent_[u] != graph::kNoNode) {
      ctx.send(parent_[u], Message::make(MessageKind::tree_edge, {0}));
    }
    for (const auto& env : ctx.inbox()) children_[u].push_back(env.from);
  }

  const std::vector<std::vector<NodeId>>& children() const { return children_; }

 private:
  const std::vector<NodeId>& parent_;
  std::vector<std::vector<NodeId>> children_;
};

}  // namespace

SpanningTree random_spanning_tree(const graph::Graph& g, NodeId root, const congest::SimConfig& cfg,
                                  std::uint64_t lambda) {
  const std::size_t n = g.node_count();
  if (root >= n) throw std::out_of_range("root out of range");
  walk::WalkSession session(g, cfg, true);
  auto& net = session.network();
  const auto t = tree::build_bfs(net, root, "cover-bfs");
  const auto m = static_cast<std::uint64_t>(g.edge_count());
  const std::uint64_t chunk_cap = walk::kFallbackBeta * m * m;

  SpanningTree out;
  out.root = root;
  out.parent.assign(n, graph::kNoNode);
  std::vector<std::uint64_t> visited(n, 0);
  visited[root] = 1;
  std::uint64_t total = 0;
  std::uint64_t extend = n;
  NodeId cur = root;
  for (;;) {
    ++out.phases;
    for (std::uint64_t left = extend; left > 0;) {
      const std::uint64_t len = std::min(left, chunk_cap);
      walk::WalkParams p;
      p.ell = len;
      p.retain_traces = true;
      if (lambda) p.lambda = std::min(lambda, len);
      auto w = session.single(cur, p);
      walk::regenerate_walk(session, w);
      for (NodeId v = 0; v < n; ++v) {
        if (!visited[v] && !w.positions[v].empty()) {
          visited[v] = 1;
          out.parent[v] = w.first_visit_parent[v];
        }
      }
      cur = w.destination;
      total += len;
      left -= len;
    }
    if (check_cover(net, t, visited)) break;
    extend = total;
  }
  out.walk_length = total;
  TreeSelect select(out.parent);
  net.run(select, "tree-select");
  out.stats = net.stats();
  return out;
}

}  // namespace drw::apps
