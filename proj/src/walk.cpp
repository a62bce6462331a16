#include <algorithm>
#include <cmath>

#include "drw/walk.hpp"

namespace drw::walk {

std::uint64_t default_lambda(std::uint64_t ell, std::size_t n, std::uint32_t diameter) {
  if (ell == 0) return 1;
  const double lg = graph::log2_ceil(n);
  const double raw = std::ceil(32.0 * std::sqrt(static_cast<double>(ell) * diameter) * lg * lg * lg);
  return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(raw), 1, ell);
}

std::uint64_t many_walks_lambda(std::uint64_t k, std::uint64_t ell, std::size_t n, std::uint32_t diameter) {
  const double lg = graph::log2_ceil(n);
  const double root = std::sqrt(static_cast<double>(k) * static_cast<double>(ell) * diameter + 1.0);
  const double raw = std::ceil((32.0 * root * lg + static_cast<double>(k)) * lg * lg);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(raw));
}

void validate(const WalkParams& p) {
  if (p.eta < 1) throw std::invalid_argument("eta must be at least 1");
  if (p.k < 1) throw std::invalid_argument("k must be at least 1");
  if (p.lambda && p.ell && p.lambda > p.ell) {
    throw std::invalid_argument("lambda " + std::to_string(p.lambda) + " exceeds ell " + std::to_string(p.ell));
  }
}

std::string_view to_string(WalkMode mode) {
  switch (mode) {
    case WalkMode::naive: return "naive";
    case WalkMode::stitched: return "stitched";
    case WalkMode::fallback: return "fallback";
  }
  return "unknown";
}

std::vector<NodeId> trajectory(const WalkOutcome& w) {
  if (w.positions.empty()) throw MissingTrace("walk " + std::to_string(w.walk) + " has not been regenerated");
  std::vector<NodeId> seq(w.ell + 1, graph::kNoNode);
  for (NodeId v = 0; v < w.positions.size(); ++v) {
    for (auto pos : w.positions[v]) seq[pos] = v;
  }
  return seq;
}

Phase1Result phase1_distribute(const graph::Graph& g, const WalkParams& p, const congest::SimConfig& cfg) {
  validate(p);
  WalkSession s(g, cfg, p.retain_traces);
  const std::uint64_t lambda = p.lambda ? p.lambda : default_lambda(p.ell, g.node_count(), s.diameter());
  s.phase1(lambda, p.eta);
  return {s.placement(), s.network().stats()};
}

SampleResult sample_coupon(const graph::Graph& g, NodeId root, const Placement& placement,
                           const congest::SimConfig& cfg) {
  WalkSession s(g, cfg);
  s.load_placement(placement);
  SampleResult r;
  r.holder = s.sample(root);
  if (r.holder) r.desired_length = s.sampled_length();
  r.stats = s.network().stats();
  return r;
}

MoreCouponsResult send_more_coupons(const graph::Graph& g, NodeId v, const WalkParams& p,
                                    const congest::SimConfig& cfg) {
  validate(p);
  if (p.lambda == 0) throw std::invalid_argument("send_more_coupons needs an explicit lambda");
  WalkSession s(g, cfg, p.retain_traces);
  MoreCouponsResult r;
  r.part1_rounds = s.more_coupons(v, p.eta, p.lambda);
  r.added = s.placement();
  r.stats = s.network().stats();
  return r;
}

WalkOutcome single_random_walk(const graph::Graph& g, NodeId s, const WalkParams& p,
                               const congest::SimConfig& cfg) {
  WalkSession session(g, cfg, p.retain_traces);
  return session.single(s, p);
}

std::vector<WalkOutcome> many_random_walks(const graph::Graph& g, std::span<const NodeId> sources,
                                           const WalkParams& p, const congest::SimConfig& cfg) {
  WalkSession session(g, cfg, p.retain_traces);
  return session.many(sources, p);
}

WalkOutcome regenerate_walk(const graph::Graph& g, NodeId s, const WalkParams& p, const congest::SimConfig& cfg) {
  WalkParams traced = p;
  traced.retain_traces = true;
  WalkSession session(g, cfg, true);
  auto w = session.single(s, traced);
  regenerate_walk(session, w);
  return w;
}

void regenerate_walk(WalkSession& session, WalkOutcome& w) { session.regenerate({&w, 1}); }

SodResult k_rw_sod(const graph::Graph& g, std::span<const NodeId> sources, const WalkParams& p,
                   const congest::SimConfig& cfg, NodeId root) {
  WalkSession session(g, cfg, p.retain_traces);
  SodResult r;
  r.walks = session.many(sources, p);
  const auto before = session.network().round();
  r.delivered = session.deliver_to_sources(r.walks, root);
  r.delivery_rounds = session.network().round() - before;
  r.stats = session.network().stats();
  return r;
}

WalkOutcome mh_random_walk(const graph::Graph& g, NodeId s, std::span<const double> target, double alpha,
                           const WalkParams& p, const congest::SimConfig& cfg) {
  WalkSession session(g, cfg, Transition::metropolis(g, target, alpha), p.retain_traces);
  return session.single(s, p);
}

WalkOutcome fallback_collect(const graph::Graph& g, NodeId s, std::uint64_t ell, const congest::SimConfig& cfg) {
  WalkSession session(g, cfg);
  return session.fallback(s, ell);
}

WalkOutcome naive_random_walk(const graph::Graph& g, NodeId s, std::uint64_t ell, const congest::SimConfig& cfg) {
  WalkSession session(g, cfg);
  auto w = session.naive(s, ell);
  return w;
}

}  // namespace drw::walk
