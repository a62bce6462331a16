#include "drw/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>

namespace drw::graph {

namespace {

std::string edge_str(NodeId u, NodeId v) {
  return "(" + std::to_string(u) + ", " + std::to_string(v) + ")";
}

std::size_t line_of(std::span<const std::size_t> lines, std::size_t i) {
  return i < lines.size() ? lines[i] : 0;
}

std::string at_line(std::size_t line) {
  return line ? "line " + std::to_string(line) + ": " : std::string{};
}

}  // namespace

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        std::span<const std::size_t> lines) {
  if (n == 0) throw GraphError(GraphError::Kind::validation, "graph has no nodes");
  if (edges.empty()) throw GraphError(GraphError::Kind::validation, "graph has no edges");

  std::vector<std::vector<NodeId>> adj(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    const auto line = line_of(lines, i);
    if (u >= n || v >= n) {
      throw GraphError(GraphError::Kind::validation,
                       at_line(line) + "node id out of range in edge " + edge_str(u, v), line);
    }
    if (u == v) {
      throw GraphError(GraphError::Kind::validation,
                       at_line(line) + "self-loop " + edge_str(u, v), line);
    }
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    auto dup = std::adjacent_find(list.begin(), list.end());
    if (dup != list.end()) {
      // Report the second occurrence in input order.
      const NodeId a = static_cast<NodeId>(v), b = *dup;
      std::size_t seen = 0, line = 0;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [x, y] = edges[i];
        if ((x == a && y == b) || (x == b && y == a)) {
          if (++seen == 2) {
            line = line_of(lines, i);
            break;
          }
        }
      }
      throw GraphError(GraphError::Kind::validation,
                       at_line(line) + "duplicate edge " + edge_str(std::min(a, b), std::max(a, b)),
                       line);
    }
    g.offsets_[v + 1] = g.offsets_[v] + list.size();
  }
  g.adjacency_.reserve(g.offsets_[n]);
  g.tails_.reserve(g.offsets_[n]);
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : adj[v]) {
      g.adjacency_.push_back(u);
      g.tails_.push_back(static_cast<NodeId>(v));
    }
  }

  g.reverse_.resize(g.adjacency_.size());
  g.undirected_.resize(g.adjacency_.size());
  std::size_t next_id = 0;
  for (std::size_t slot = 0; slot < g.adjacency_.size(); ++slot) {
    const NodeId v = g.tails_[slot], u = g.adjacency_[slot];
    g.reverse_[slot] = g.edge_slot(u, v);
    if (v < u) g.undirected_[slot] = next_id++;
  }
  for (std::size_t slot = 0; slot < g.adjacency_.size(); ++slot) {
    if (g.tails_[slot] > g.adjacency_[slot]) g.undirected_[slot] = g.undirected_[g.reverse_[slot]];
  }

  auto dist = distances_from(g, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (dist[v] == std::numeric_limits<std::uint32_t>::max()) {
      throw GraphError(GraphError::Kind::connectivity,
                       "graph is disconnected: node " + std::to_string(v) +
                           " is unreachable from node 0");
    }
  }
  return g;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < node_count(); ++v) best = std::max(best, degree(static_cast<NodeId>(v)));
  return best;
}

bool Graph::has_edge(NodeId u, NodeId v) const { return edge_slot(u, v) != npos; }

std::size_t Graph::edge_slot(NodeId v, NodeId u) const {
  auto nb = neighbors(v);
  auto it = std::lower_bound(nb.begin(), nb.end(), u);
  if (it == nb.end() || *it != u) return npos;
  return offsets_[v] + static_cast<std::size_t>(it - nb.begin());
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t slot = 0; slot < adjacency_.size(); ++slot) {
    if (tails_[slot] < adjacency_[slot]) out.emplace_back(tails_[slot], adjacency_[slot]);
  }
  return out;
}

Graph load_graph(std::string_view text) {
  std::vector<Edge> edges;
  std::vector<std::size_t> lines;
  NodeId max_id = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') {
      if (end == text.size()) break;
      continue;
    }

    NodeId ids[2];
    std::size_t cursor = first;
    for (int k = 0; k < 2; ++k) {
      cursor = line.find_first_not_of(" \t\r", cursor);
      if (cursor == std::string_view::npos) {
        throw GraphError(GraphError::Kind::parse,
                         "line " + std::to_string(line_no) + ": expected two node ids", line_no);
      }
      auto [ptr, ec] = std::from_chars(line.data() + cursor, line.data() + line.size(), ids[k]);
      if (ec != std::errc{} || (ptr != line.data() + line.size() && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        throw GraphError(GraphError::Kind::parse,
                         "line " + std::to_string(line_no) + ": invalid node id", line_no);
      }
      cursor = static_cast<std::size_t>(ptr - line.data());
    }
    if (line.find_first_not_of(" \t\r", cursor) != std::string_view::npos) {
      throw GraphError(GraphError::Kind::parse,
                       "line " + std::to_string(line_no) + ": trailing tokens after edge", line_no);
    }
    edges.emplace_back(ids[0], ids[1]);
    lines.push_back(line_no);
    max_id = std::max({max_id, ids[0], ids[1]});
    if (end == text.size()) break;
  }
  if (edges.empty()) throw GraphError(GraphError::Kind::parse, "edge list contains no edges");
  return Graph::from_edges(static_cast<std::size_t>(max_id) + 1, edges, lines);
}

Graph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphError::Kind::parse, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_graph(buf.str());
}

std::string to_edge_list(const Graph& g) {
  std::string out;
  for (auto [u, v] : g.edges()) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

namespace {

Graph build_deterministic(const GeneratorSpec& spec) {
  const std::size_t n = spec.n;
  std::vector<Edge> edges;
  auto id = [](std::size_t x) { return static_cast<NodeId>(x); };
  switch (spec.kind) {
    case GraphKind::path:
      for (std::size_t v = 0; v + 1 < n; ++v) edges.emplace_back(id(v), id(v + 1));
      break;
    case GraphKind::cycle:
      if (n < 3) throw GraphError(GraphError::Kind::generation, "cycle needs n >= 3");
      for (std::size_t v = 0; v < n; ++v) edges.emplace_back(id(v), id((v + 1) % n));
      break;
    case GraphKind::star:
      for (std::size_t v = 1; v < n; ++v) edges.emplace_back(0, id(v));
      break;
    case GraphKind::complete:
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(id(u), id(v));
      break;
    case GraphKind::grid: {
      std::size_t rows = spec.rows, cols = spec.cols;
      if (rows == 0 || cols == 0) {
        auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != n) {
          throw GraphError(GraphError::Kind::generation, "grid needs a square n or explicit rows x cols");
        }
        rows = cols = side;
      }
      if (rows * cols < 2) throw GraphError(GraphError::Kind::generation, "grid needs at least 2 nodes");
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t v = r * cols + c;
          if (c + 1 < cols) edges.emplace_back(id(v), id(v + 1));
          if (r + 1 < rows) edges.emplace_back(id(v), id(v + cols));
        }
      }
      return Graph::from_edges(rows * cols, edges);
    }
    default:
      break;
  }
  return Graph::from_edges(n, edges);
}

}  // namespace

Graph generate(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.kind == GraphKind::grid && spec.rows && spec.cols) return build_deterministic(spec);
  if (spec.n < 2) throw GraphError(GraphError::Kind::generation, "generators need n >= 2");
  if (spec.kind != GraphKind::erdos_renyi && spec.kind != GraphKind::random_geometric) {
    return build_deterministic(spec);
  }
  if (spec.kind == GraphKind::erdos_renyi && !(spec.p > 0.0 && spec.p <= 1.0)) {
    throw GraphError(GraphError::Kind::generation, "erdos_renyi needs 0 < p <= 1");
  }
  if (spec.kind == GraphKind::random_geometric && !(spec.r > 0.0)) {
    throw GraphError(GraphError::Kind::generation, "random_geometric needs r > 0");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = spec.n;
  for (int attempt = 0; attempt < kConnectivityRetries; ++attempt) {
    std::vector<Edge> edges;
    if (spec.kind == GraphKind::erdos_renyi) {
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
          if (unit(rng) < spec.p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    } else {
      std::vector<std::pair<double, double>> pts(n);
      for (auto& pt : pts) pt = {unit(rng), unit(rng)};
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
          const double dx = pts[u].first - pts[v].first, dy = pts[u].second - pts[v].second;
          if (dx * dx + dy * dy <= spec.r * spec.r) {
            edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
          }
        }
      }
    }
    try {
      return Graph::from_edges(n, edges);
    } catch (const GraphError& e) {
      if (e.kind() != GraphError::Kind::connectivity && e.kind() != GraphError::Kind::validation) throw;
    }
  }
  throw GraphError(GraphError::Kind::generation,
                   "no connected sample after " + std::to_string(kConnectivityRetries) + " attempts");
}

Graph from_spec_string(std::string_view spec, std::uint64_t seed) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw GraphError(GraphError::Kind::parse, "graph spec must look like kind:args, got '" +
                                                  std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon);
  const auto rest = std::string(spec.substr(colon + 1));
  if (kind == "file") return load_graph_file(rest);

  std::vector<std::string> args;
  std::stringstream ss(rest);
  for (std::string part; std::getline(ss, part, ':');) args.push_back(part);
  auto bad = [&] { return GraphError(GraphError::Kind::parse, "malformed graph spec '" + std::string(spec) + "'"); };
  if (args.empty()) throw bad();

  GeneratorSpec g;
  try {
    if (kind == "grid") {
      g.kind = GraphKind::grid;
      auto x = args[0].find('x');
      if (x != std::string::npos) {
        g.rows = std::stoul(args[0].substr(0, x));
        g.cols = std::stoul(args[0].substr(x + 1));
        g.n = g.rows * g.cols;
      } else {
        g.n = std::stoul(args[0]);
      }
      return generate(g, seed);
    }
    g.n = std::stoul(args[0]);
    if (kind == "path") g.kind = GraphKind::path;
    else if (kind == "cycle") g.kind = GraphKind::cycle;
    else if (kind == "star") g.kind = GraphKind::star;
    else if (kind == "complete") g.kind = GraphKind::complete;
    else if (kind == "er" || kind == "erdos_renyi") {
      g.kind = GraphKind::erdos_renyi;
      if (args.size() < 2) throw bad();
      g.p = std::stod(args[1]);
    } else if (kind == "rgg" || kind == "random_geometric") {
      g.kind = GraphKind::random_geometric;
      if (args.size() < 2) throw bad();
      g.r = std::stod(args[1]);
    } else {
      throw bad();
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  return generate(g, seed);
}

std::vector<std::uint32_t> distances_from(const Graph& g, NodeId source) {
  std::vector<std::uint32_t> dist(g.node_count(), std::numeric_limits<std::uint32_t>::max());
  std::queue<NodeId> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId u : g.neighbors(v)) {
      if (dist[u] == std::numeric_limits<std::uint32_t>::max()) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return dist;
}

BfsTree bfs_tree(const Graph& g, NodeId root) {
  if (root >= g.node_count()) throw std::out_of_range("bfs_tree: root out of range");
  BfsTree t;
  t.root = root;
  t.level = distances_from(g, root);
  t.parent.assign(g.node_count(), kNoNode);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    t.depth = std::max(t.depth, t.level[v]);
    if (v == root) continue;
    for (NodeId u : g.neighbors(v)) {  // sorted, so the first hit is the lowest id
      if (t.level[u] + 1 == t.level[v]) {
        t.parent[v] = u;
        break;
      }
    }
  }
  return t;
}

std::uint32_t eccentricity(const Graph& g, NodeId v) {
  auto dist = distances_from(g, v);
  return *std::max_element(dist.begin(), dist.end());
}

std::uint32_t diameter(const Graph& g) {
  std::uint32_t best = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) best = std::max(best, eccentricity(g, v));
  return best;
}

bool is_bipartite(const Graph& g) {
  auto dist = distances_from(g, 0);
  for (auto [u, v] : g.edges()) {
    if (dist[u] % 2 == dist[v] % 2) return false;
  }
  return true;
}

std::uint32_t log2_ceil(std::size_t n) {
  std::uint32_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return std::max<std::uint32_t>(k, 1);
}

}  // namespace drw::graph
