#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "drw/congest.hpp"

namespace drw::tree {

using graph::NodeId;

/// BFS tree as known to the nodes after the distributed construction:
/// every node knows its parent, its children and its level.
struct DistTree {
  NodeId root = 0;
  std::vector<NodeId> parent;
  std::vector<std::vector<NodeId>> children;
  std::vector<std::uint32_t> level;
  std::uint32_t depth = 0;
};

/// Probe/ack flooding from `root`. A node adopts the lowest-ID neighbor among
/// the first wave of probes it hears, so the tree equals graph::bfs_tree.
DistTree build_bfs(congest::Network& net, NodeId root, std::string_view phase = "bfs");

enum class Combine { sum, min, max };

/// Leaf-to-root aggregation of one value per node; returns the root's result.
std::uint64_t convergecast(congest::Network& net, const DistTree& t, std::span<const std::uint64_t> values,
                           Combine op, std::string_view phase);

using Record = std::array<std::uint64_t, 4>;
using RecordSink = std::function<void(NodeId, const Record&)>;

/// Root-to-leaves flood of one record; `sink` sees it at every node.
void broadcast(congest::Network& net, const DistTree& t, const Record& rec, congest::MessageKind kind,
               std::string_view phase, const RecordSink& sink = {});

/// Pipelined upcast: every record travels to the root, one per edge per
/// round, and a done marker closes each subtree. Returns records in arrival
/// order at the root (the root's own first).
std::vector<Record> upcast(congest::Network& net, const DistTree& t,
                           const std::vector<std::vector<Record>>& per_node, congest::MessageKind kind,
                           std::string_view phase);

/// Pipelined downcast of all records from the root to every node.
void downcast(congest::Network& net, const DistTree& t, std::span<const Record> records,
              congest::MessageKind kind, std::string_view phase, const RecordSink& sink);

using Totals = std::array<std::uint64_t, 3>;

/// Upcast of (key, a, b, c) summaries merged on the way: each node emits keys
/// in increasing order as soon as every child has moved past them, summing the
/// three values per key. Returns key -> totals at the root.
std::map<std::uint64_t, Totals> merged_upcast(
    congest::Network& net, const DistTree& t, const std::vector<std::vector<Record>>& per_node,
    congest::MessageKind kind, std::string_view phase);

}  // namespace drw::tree
