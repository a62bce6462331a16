#include "drw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace drw::oracle {

namespace {

constexpr std::uint64_t kIterateLimit = 200'000;

Eigen::MatrixXd simple_matrix(const graph::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const double share = 1.0 / static_cast<double>(g.degree(v));
    for (NodeId w : g.neighbors(v)) p(v, w) = share;
  }
  return p;
}

double min_flow(const Eigen::MatrixXd& q, const Distribution& pi) {
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < q.rows(); ++x) {
    for (Eigen::Index y = 0; y < q.cols(); ++y) {
      if (x != y && q(x, y) > 0.0) c = std::min(c, pi[static_cast<std::size_t>(x)] * q(x, y));
    }
  }
  return c;
}

}  // namespace

ChainSpec ChainSpec::simple(const graph::Graph& g) {
  ChainSpec c;
  c.transition = simple_matrix(g);
  c.stationary = oracle::stationary(g);
  c.c = min_flow(c.transition, c.stationary);
  return c;
}

ChainSpec ChainSpec::lazy(const graph::Graph& g) {
  ChainSpec c;
  const auto n = static_cast<Eigen::Index>(g.node_count());
  c.transition = 0.5 * (Eigen::MatrixXd::Identity(n, n) + simple_matrix(g));
  c.stationary = oracle::stationary(g);
  c.c = min_flow(c.transition, c.stationary);
  return c;
}

ChainSpec ChainSpec::metropolis(const graph::Graph& g, std::span<const double> weights, double alpha) {
  if (weights.size() != g.node_count()) throw std::invalid_argument("weights must have one entry per node");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
    total += w;
  }
  ChainSpec c;
  const auto n = static_cast<Eigen::Index>(g.node_count());
  c.stationary.resize(g.node_count());
  for (std::size_t v = 0; v < weights.size(); ++v) c.stationary[v] = weights[v] / total;
  c.transition = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const double di = static_cast<double>(g.degree(i));
    double out = 0.0;
    for (NodeId j : g.neighbors(i)) {
      const double dj = static_cast<double>(g.degree(j));
      const double pij = alpha * std::min(1.0 / di, c.stationary[j] / (c.stationary[i] * dj));
      c.transition(i, j) = pij;
      out += pij;
    }
    c.transition(i, i) = 1.0 - out;
  }
  c.c = min_flow(c.transition, c.stationary);
  return c;
}

Distribution walk_distribution(const graph::Graph& g, NodeId s, std::uint64_t t, const ChainSpec& chain) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  if (s >= g.node_count()) throw std::out_of_range("source node out of range");
  Distribution out(static_cast<std::size_t>(n));
  if (t <= kIterateLimit) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(s) = 1.0;
    for (std::uint64_t i = 0; i < t; ++i) row = row * chain.transition;
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = row(i);
    return out;
  }
  // Reversible chain: S = Pi^{1/2} P Pi^{-1/2} is symmetric, P^t = Pi^{-1/2} U L^t U' Pi^{1/2}.
  Eigen::VectorXd root(n);
  for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(chain.stationary[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd sym = root.asDiagonal() * chain.transition * root.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd powered =
      es.eigenvalues().unaryExpr([t](double l) { return std::pow(l, static_cast<double>(t)); });
  const Eigen::MatrixXd& u = es.eigenvectors();
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += u(s, k) * powered(k) * u(j, k);
    const double v = std::max(0.0, acc * root(j) / root(s));
    out[static_cast<std::size_t>(j)] = v;
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

Distribution walk_distribution(const graph::Graph& g, NodeId s, std::uint64_t t) {
  return walk_distribution(g, s, t, ChainSpec::simple(g));
}

std::vector<NodeId> naive_walk(const graph::Graph& g, NodeId s, std::uint64_t t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> path{s};
  path.reserve(t + 1);
  NodeId cur = s;
  for (std::uint64_t i = 0; i < t; ++i) {
    const auto nbrs = g.neighbors(cur);
    cur = nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(rng)];
    path.push_back(cur);
  }
  return path;
}

Distribution stationary(const graph::Graph& g) {
  Distribution pi(g.node_count());
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  for (NodeId v = 0; v < g.node_count(); ++v) pi[v] = static_cast<double>(g.degree(v)) / two_m;
  return pi;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distributions differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

double tv_distance(std::span<const double> a, std::span<const double> b) { return 0.5 * l1_distance(a, b); }

std::vector<double> distance_profile(const graph::Graph& g, NodeId x, std::uint64_t t_max) {
  const auto chain = ChainSpec::simple(g);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row(x) = 1.0;
  std::vector<double> out;
  out.reserve(t_max + 1);
  for (std::uint64_t t = 0;; ++t) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) d += std::abs(row(i) - chain.stationary[static_cast<std::size_t>(i)]);
    out.push_back(d);
    if (t == t_max) break;
    row = row * chain.transition;
  }
  return out;
}

std::uint64_t exact_mixing(const graph::Graph& g, NodeId x, double delta) {
  if (graph::is_bipartite(g)) throw std::invalid_argument("exact_mixing: graph is bipartite, the walk never mixes");
  if (!(delta > 0.0)) throw std::invalid_argument("exact_mixing: delta must be positive");
  const auto chain = ChainSpec::simple(g);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row(x) = 1.0;
  constexpr std::uint64_t kLimit = 50'000'000;
  for (std::uint64_t t = 0; t < kLimit; ++t) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) d += std::abs(row(i) - chain.stationary[static_cast<std::size_t>(i)]);
    if (d < delta) return t;
    row = row * chain.transition;
  }
  throw std::runtime_error("exact_mixing: no convergence within the step limit");
}

std::uint64_t spanning_tree_count(const graph::Graph& g) {
  const std::size_t n = g.node_count();
  if (n <= 1) return 1;
  const std::size_t k = n - 1;
  // Laplacian with row/column 0 removed
  std::vector<std::vector<__int128>> a(k, std::vector<__int128>(k, 0));
  for (NodeId v = 1; v < n; ++v) {
    a[v - 1][v - 1] = static_cast<__int128>(g.degree(v));
    for (NodeId w : g.neighbors(v)) {
      if (w != 0) a[v - 1][w - 1] = -1;
    }
  }
  auto mul = [](__int128 x, __int128 y) {
    __int128 r;
    if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("spanning_tree_count overflow");
    return r;
  };
  __int128 prev = 1;
  int sign = 1;
  for (std::size_t p = 0; p < k; ++p) {
    if (a[p][p] == 0) {
      std::size_t swap = p + 1;
      while (swap < k && a[swap][p] == 0) ++swap;
      if (swap == k) return 0;
      std::swap(a[p], a[swap]);
      sign = -sign;
    }
    for (std::size_t i = p + 1; i < k; ++i) {
      for (std::size_t j = p + 1; j < k; ++j) {
        __int128 num;
        if (__builtin_sub_overflow(mul(a[i][j], a[p][p]), mul(a[i][p], a[p][j]), &num)) {
          throw std::overflow_error("spanning_tree_count overflow");
        }
        a[i][j] = num / prev;
      }
      a[i][p] = 0;
    }
    prev = a[p][p];
  }
  const __int128 det = sign * a[k - 1][k - 1];
  if (det < 0 || det > static_cast<__int128>(std::numeric_limits<std::uint64_t>::max())) {
    throw std::overflow_error("spanning_tree_count overflow");
  }
  return static_cast<std::uint64_t>(det);
}

Eigen::MatrixXd expected_visits(const ChainSpec& chain, std::uint64_t t) {
  const auto n = chain.transition.rows();
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = power;
  for (std::uint64_t i = 1; i <= t; ++i) {
    power = power * chain.transition;
    acc += power;
  }
  return acc;
}

std::vector<double> eigenvalues(const graph::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(n, n);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (NodeId w : g.neighbors(v)) {
      sym(v, w) = 1.0 / std::sqrt(static_cast<double>(g.degree(v)) * static_cast<double>(g.degree(w)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double spectral_gap(const graph::Graph& g) {
  const auto ev = eigenvalues(g);
  return ev.size() < 2 ? 1.0 : 1.0 - ev[1];
}

std::string distribution_csv(const Distribution& d) {
  std::ostringstream out;
  out.precision(17);
  out << "node,probability\n";
  for (std::size_t v = 0; v < d.size(); ++v) out << v << ',' << d[v] << '\n';
  return out.str();
}

}  // namespace drw::oracle
