#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drw::graph {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

using Edge = std::pair<NodeId, NodeId>;

class GraphError : public std::runtime_error {
 public:
  enum class Kind { parse, validation, connectivity, generation };

  GraphError(Kind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based input line for parse/validation errors, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Undirected simple connected graph in CSR form. Neighbor lists are sorted,
/// so the position of u inside adj(v) doubles as a directed-edge slot.
class Graph {
 public:
  Graph() = default;

  /// Validates simplicity and connectivity. `lines`, when given, maps each
  /// edge to its source line so errors can point at it.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          std::span<const std::size_t> lines = {});

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }
  std::size_t directed_edge_count() const noexcept { return adjacency_.size(); }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const;

  bool has_edge(NodeId u, NodeId v) const;

  /// Directed edge id of v->u in [0, 2m), or npos when u is not adjacent.
  std::size_t edge_slot(NodeId v, NodeId u) const;
  /// Directed edge id of the reverse direction.
  std::size_t reverse_slot(std::size_t slot) const { return reverse_[slot]; }
  /// Tail and head of a directed edge id.
  NodeId slot_tail(std::size_t slot) const { return tails_[slot]; }
  NodeId slot_head(std::size_t slot) const { return adjacency_[slot]; }
  /// Undirected edge id in [0, m) shared by both directions.
  std::size_t undirected_id(std::size_t slot) const { return undirected_[slot]; }

  /// All edges as (u, v) with u < v, sorted.
  std::vector<Edge> edges() const;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<NodeId> tails_;
  std::vector<std::size_t> reverse_;
  std::vector<std::size_t> undirected_;
};

/// Parses one undirected edge per line ("u v"); blank lines and lines starting
/// with '#' are skipped. n is one past the largest ID seen.
Graph load_graph(std::string_view text);
Graph load_graph_file(const std::filesystem::path& path);

/// Edge-list text accepted by load_graph.
std::string to_edge_list(const Graph& g);

enum class GraphKind { path, cycle, star, complete, grid, erdos_renyi, random_geometric };

struct GeneratorSpec {
  GraphKind kind = GraphKind::path;
  std::size_t n = 2;
  /// grid only; 0 means a square grid of side sqrt(n).
  std::size_t rows = 0;
  std::size_t cols = 0;
  double p = 0.5;  // erdos_renyi
  double r = 0.3;  // random_geometric
};

inline constexpr int kConnectivityRetries = 100;

Graph generate(const GeneratorSpec& spec, std::uint64_t seed);

/// "path:5", "cycle:8", "star:9", "complete:6", "grid:4x4", "er:10:0.5",
/// "rgg:20:0.4"; "file:<path>" loads an edge list.
Graph from_spec_string(std::string_view spec, std::uint64_t seed);

struct BfsTree {
  NodeId root = 0;
  std::vector<NodeId> parent;  // kNoNode at the root
  std::vector<std::uint32_t> level;
  std::uint32_t depth = 0;
};

/// BFS tree where each node's parent is its lowest-ID neighbor one level up.
BfsTree bfs_tree(const Graph& g, NodeId root);

std::vector<std::uint32_t> distances_from(const Graph& g, NodeId source);
std::uint32_t eccentricity(const Graph& g, NodeId v);
std::uint32_t diameter(const Graph& g);
bool is_bipartite(const Graph& g);

/// ceil(log2(n)) with a floor of 1, the logarithm used by all parameter formulas.
std::uint32_t log2_ceil(std::size_t n);

}  // namespace drw::graph
