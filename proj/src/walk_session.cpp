#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "drw/walk.hpp"

namespace drw::walk {

using congest::Message;
using congest::MessageKind;
using congest::NodeContext;

namespace {

struct Visit {
  std::size_t walk;
  std::uint64_t pos;
  NodeId pred;
};

struct Segment {
  std::size_t walk;
  NodeId owner;
  std::uint64_t start;
  std::uint64_t length;
  NodeId holder;
};

struct TokenStart {
  std::size_t walk;
  NodeId source;
  NodeId at;
  std::uint64_t pos;
};

using BagKey = std::pair<NodeId, std::uint64_t>;

}  // namespace

struct WalkSession::State {
  State(const graph::Graph& graph, const congest::SimConfig& cfg, Transition transition, bool keep)
      : g(&graph), net(graph, cfg), tr(std::move(transition)), trace(keep), diam(graph::diameter(graph)) {
    const std::size_t n = graph.node_count();
    store.resize(n);
    bags.resize(n);
    winner.assign(n, graph::kNoNode);
    sample_owner.assign(n, graph::kNoNode);
    visits.resize(n);
    ends.resize(n);
    hold.assign(n, 0);
  }

  const graph::Graph* g;
  congest::Network net;
  Transition tr;
  bool trace;
  std::uint32_t diam;

  // Node-local state; each node only touches its own entry.
  std::vector<std::map<NodeId, std::vector<std::uint64_t>>> store;  // owner -> resting lengths
  std::vector<std::map<BagKey, std::vector<NodeId>>> bags;          // (owner, hop) -> prev hops
  std::vector<NodeId> winner;
  std::vector<NodeId> sample_owner;
  std::vector<std::vector<Visit>> visits;
  std::vector<std::vector<std::pair<std::size_t, NodeId>>> ends;  // (walk, source) ending here
  std::vector<std::uint64_t> hold;                                // batch counts during Send-More-Coupons

  // Driver-side bookkeeping.
  std::map<NodeId, tree::DistTree> bfs_cache;
  std::map<std::size_t, std::vector<Segment>> segments;
  std::set<std::size_t> untraced;
  std::map<std::size_t, NodeId> finished;
  std::size_t next_walk = 0;
  NodeId picked_holder = graph::kNoNode;
  std::uint64_t picked_slot = 0;
  std::uint64_t picked_length = 0;

  std::mt19937_64& rng(NodeId v) { return net.rng(v); }

  void bag_push(NodeId at, NodeId owner, std::uint64_t hop, NodeId prev, std::uint64_t copies = 1) {
    if (!trace) return;
    auto& b = bags[at][{owner, hop}];
    b.insert(b.end(), copies, prev);
  }

  NodeId bag_pop(NodeId at, NodeId owner, std::uint64_t hop) {
    auto it = bags[at].find({owner, hop});
    if (it == bags[at].end() || it->second.empty()) {
      throw std::logic_error("replay found no prev-hop record at node " + std::to_string(at));
    }
    auto& b = it->second;
    std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
    const std::size_t i = pick(rng(at));
    const NodeId prev = b[i];
    b[i] = b.back();
    b.pop_back();
    return prev;
  }

  void visit(NodeId at, std::size_t walk, std::uint64_t pos, NodeId pred) {
    if (trace) visits[at].push_back({walk, pos, pred});
  }
};

namespace {

using State = WalkSession::State;

class Phase1Protocol final : public congest::Protocol {
 public:
  Phase1Protocol(State& st, std::uint64_t lambda, std::uint64_t eta) : st_(st), lambda_(lambda), eta_(eta) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0) {
      const std::uint64_t quota = st_.tr.coupon_quota(u, eta_);
      std::uniform_int_distribution<std::uint64_t> extra(0, lambda_ - 1);
      for (std::uint64_t i = 0; i < quota; ++i) advance(ctx, u, 0, lambda_ + extra(ctx.rng()));
    }
    for (const auto& env : ctx.inbox()) {
      const auto owner = static_cast<NodeId>(env.msg[0]);
      st_.bag_push(u, owner, env.msg[1], env.from);
      advance(ctx, owner, env.msg[1], env.msg[2]);
    }
  }

 private:
  void advance(NodeContext& ctx, NodeId owner, std::uint64_t hop, std::uint64_t desired) {
    const NodeId u = ctx.id();
    while (hop < desired) {
      const NodeId next = st_.tr.step(u, ctx.rng());
      ++hop;
      if (next == u) {
        st_.bag_push(u, owner, hop, u);
        continue;
      }
      ctx.send(next, Message::make(MessageKind::coupon, {owner, hop, desired}, hop, owner));
      return;
    }
    st_.store[u][owner].push_back(desired);
  }

  State& st_;
  std::uint64_t lambda_;
  std::uint64_t eta_;
};

class SampleProtocol final : public congest::Protocol {
 public:
  SampleProtocol(State& st, const tree::DistTree& t) : st_(st), t_(t), n_(t.parent.size()) {
    waiting_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) waiting_[v] = t.children[v].size();
    sent_.assign(n_, 0);
    ups_.resize(n_);
  }

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    for (const auto& env : ctx.inbox()) {
      ups_[u].push_back({env.from, env.msg[0], env.msg[1], env.msg[2]});
      --waiting_[u];
    }
    if (sent_[u] || waiting_[u]) return;
    sent_[u] = 1;
    // local pick, weighted by subtree counts
    st_.sample_owner[u] = t_.root;
    const auto it = st_.store[u].find(t_.root);
    const std::uint64_t own = it == st_.store[u].end() ? 0 : it->second.size();
    std::uint64_t total = own;
    for (const auto& up : ups_[u]) total += up.count;
    NodeId holder = 0;
    std::uint64_t slot = 0;
    if (total) {
      std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, total - 1)(ctx.rng());
      if (r < own) {
        holder = u;
        slot = r;
        st_.winner[u] = u;
      } else {
        r -= own;
        for (const auto& up : ups_[u]) {
          if (r < up.count) {
            holder = static_cast<NodeId>(up.holder);
            slot = up.slot;
            st_.winner[u] = up.child;
            break;
          }
          r -= up.count;
        }
      }
    }
    if (u == t_.root) {
      found_ = total > 0;
      holder_ = holder;
      slot_ = slot;
    } else {
      ctx.send(t_.parent[u], Message::make(MessageKind::sample_up, {holder, slot, total}));
    }
  }

  bool idle(NodeId v) const override { return sent_[v]; }

  bool found_ = false;
  NodeId holder_ = 0;
  std::uint64_t slot_ = 0;

 private:
  struct Up {
    NodeId child;
    std::uint64_t holder;
    std::uint64_t slot;
    std::uint64_t count;
  };

  State& st_;
  const tree::DistTree& t_;
  std::size_t n_;
  std::vector<std::size_t> waiting_;
  std::vector<char> sent_;
  std::vector<std::vector<Up>> ups_;
};

/// Carries the token from the sampling root down the winning path.
class RouteProtocol final : public congest::Protocol {
 public:
  RouteProtocol(State& st, NodeId root, std::size_t walk, NodeId source, std::uint64_t completed)
      : st_(st), root_(root), walk_(walk), source_(source), completed_(completed) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0 && u == root_) {
      forward(ctx, Message::make(MessageKind::token, {walk_, source_, completed_, st_.picked_slot}));
    }
    for (const auto& env : ctx.inbox()) forward(ctx, env.msg);
  }

 private:
  void forward(NodeContext& ctx, const Message& m) {
    const NodeId u = ctx.id();
    if (st_.winner[u] != u) {
      ctx.send(st_.winner[u], m);
      return;
    }
    // holder: delete the sampled coupon and become the next connector
    auto& lengths = st_.store[u][st_.sample_owner[u]];
    const auto slot = static_cast<std::size_t>(m[3]);
    st_.picked_length = lengths[slot];
    lengths[slot] = lengths.back();
    lengths.pop_back();
    st_.picked_holder = u;
  }

  State& st_;
  NodeId root_;
  std::size_t walk_;
  NodeId source_;
  std::uint64_t completed_;
};

/// Send-More-Coupons Part 1: all coupons of `owner` advance in lockstep for
/// lambda steps; per edge and step one (owner, count, step) message.
class SpreadProtocol final : public congest::Protocol {
 public:
  SpreadProtocol(State& st, NodeId owner, std::uint64_t eta, std::uint64_t lambda)
      : st_(st), owner_(owner), eta_(eta), lambda_(lambda) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    const std::uint64_t step = ctx.local_round();
    step_ = step;
    if (step == 0 && u == owner_) st_.hold[u] = eta_;
    for (const auto& env : ctx.inbox()) {
      st_.hold[u] += env.msg[1];
      st_.bag_push(u, owner_, env.msg[2], env.from, env.msg[1]);
    }
    if (step >= lambda_ || st_.hold[u] == 0) return;
    std::map<NodeId, std::uint64_t> out;
    std::uint64_t stay = 0;
    for (std::uint64_t i = 0; i < st_.hold[u]; ++i) {
      const NodeId next = st_.tr.step(u, ctx.rng());
      if (next == u) {
        ++stay;
      } else {
        ++out[next];
      }
    }
    st_.bag_push(u, owner_, step + 1, u, stay);
    st_.hold[u] = stay;
    for (const auto& [w, c] : out) ctx.send(w, Message::make(MessageKind::coupon_batch, {owner_, c, step + 1}));
  }

  // coupons parked by a self-loop still owe the remaining steps
  bool idle(NodeId u) const override { return st_.hold[u] == 0 || step_ + 1 >= lambda_; }

 private:
  State& st_;
  NodeId owner_;
  std::uint64_t eta_;
  std::uint64_t lambda_;
  std::uint64_t step_ = 0;
};

/// Send-More-Coupons Part 2: in step i each coupon stops with probability
/// 1/(lambda - i) and rests with length lambda + i.
class StopProtocol final : public congest::Protocol {
 public:
  StopProtocol(State& st, NodeId owner, std::uint64_t lambda) : st_(st), owner_(owner), lambda_(lambda) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    const std::uint64_t i = ctx.local_round();
    step_ = i;
    for (const auto& env : ctx.inbox()) {
      st_.hold[u] += env.msg[1];
      st_.bag_push(u, owner_, env.msg[2], env.from, env.msg[1]);
    }
    if (i >= lambda_ || st_.hold[u] == 0) return;
    std::bernoulli_distribution stop(1.0 / static_cast<double>(lambda_ - i));
    std::map<NodeId, std::uint64_t> out;
    std::uint64_t stay = 0;
    const std::uint64_t here = st_.hold[u];
    for (std::uint64_t c = 0; c < here; ++c) {
      if (stop(ctx.rng())) {
        st_.store[u][owner_].push_back(lambda_ + i);
        continue;
      }
      const NodeId next = st_.tr.step(u, ctx.rng());
      if (next == u) {
        ++stay;
      } else {
        ++out[next];
      }
    }
    st_.bag_push(u, owner_, lambda_ + i + 1, u, stay);
    st_.hold[u] = stay;
    for (const auto& [w, c] : out) {
      ctx.send(w, Message::make(MessageKind::coupon_batch, {owner_, c, lambda_ + i + 1}));
    }
  }

  bool idle(NodeId u) const override { return st_.hold[u] == 0 || step_ + 1 >= lambda_; }

 private:
  State& st_;
  NodeId owner_;
  std::uint64_t lambda_;
  std::uint64_t step_ = 0;
};

/// Token forwarding one hop per round until position ell.
class NaiveProtocol final : public congest::Protocol {
 public:
  NaiveProtocol(State& st, std::uint64_t ell, std::vector<TokenStart> starts)
      : st_(st), ell_(ell), starts_(std::move(starts)) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0) {
      for (const auto& s : starts_) {
        if (s.at == u) advance(ctx, s.walk, s.source, s.pos);
      }
    }
    for (const auto& env : ctx.inbox()) {
      const std::size_t walk = env.msg[0];
      st_.visit(u, walk, env.msg[2], env.from);
      advance(ctx, walk, static_cast<NodeId>(env.msg[1]), env.msg[2]);
    }
  }

 private:
  void advance(NodeContext& ctx, std::size_t walk, NodeId source, std::uint64_t pos) {
    const NodeId u = ctx.id();
    while (pos < ell_) {
      const NodeId next = st_.tr.step(u, ctx.rng());
      ++pos;
      if (next == u) {
        st_.visit(u, walk, pos, u);
        continue;
      }
      ctx.send(next, Message::make(MessageKind::token, {walk, source, pos, 0}, pos, source));
      return;
    }
    st_.ends[u].push_back({walk, source});
    st_.finished[walk] = u;
  }

  State& st_;
  std::uint64_t ell_;
  std::vector<TokenStart> starts_;
};

/// Walks each stitched short walk backwards from its holder, popping a
/// uniformly chosen prev-hop record at every node.
class ReplayProtocol final : public congest::Protocol {
 public:
  ReplayProtocol(State& st, std::vector<Segment> segs) : st_(st), segs_(std::move(segs)) {}

  void on_round(NodeContext& ctx) override {
    const NodeId u = ctx.id();
    if (ctx.local_round() == 0) {
      for (const auto& s : segs_) {
        if (s.holder == u) back(ctx, s.walk, s.owner, s.length, s.start + s.length);
      }
    }
    for (const auto& env : ctx.inbox()) {
      back(ctx, env.msg[0], static_cast<NodeId>(env.msg[1]), env.msg[2], env.msg[3]);
    }
  }

 private:
  void back(NodeContext& ctx, std::size_t walk, NodeId owner, std::uint64_t hop, std::uint64_t pos) {
    const NodeId u = ctx.id();
    for (;;) {
      const NodeId prev = st_.bag_pop(u, owner, hop);
      st_.visit(u, walk, pos, prev);
      if (hop == 1) {
        if (prev != owner) throw std::logic_error("replay did not end at the coupon owner");
        return;
      }
      --hop;
      --pos;
      if (prev != u) {
        ctx.send(prev, Message::make(MessageKind::replay, {walk, owner, hop, pos}, pos, owner));
        return;
      }
    }
  }

  State& st_;
  std::vector<Segment> segs_;
};

}  // namespace

WalkSession::WalkSession(const graph::Graph& g, const congest::SimConfig& cfg, bool retain_traces)
    : WalkSession(g, cfg, Transition::simple(g), retain_traces) {}

WalkSession::WalkSession(const graph::Graph& g, const congest::SimConfig& cfg, Transition tr, bool retain_traces)
    : st_(std::make_unique<State>(g, cfg, std::move(tr), retain_traces)) {}

WalkSession::~WalkSession() = default;

const graph::Graph& WalkSession::graph() const { return *st_->g; }
const Transition& WalkSession::transition() const { return st_->tr; }
congest::Network& WalkSession::network() { return st_->net; }
std::uint32_t WalkSession::diameter() const { return st_->diam; }

void WalkSession::phase1(std::uint64_t lambda, std::uint64_t eta) {
  if (lambda == 0 || eta == 0) throw std::invalid_argument("phase 1 needs lambda >= 1 and eta >= 1");
  Phase1Protocol p(*st_, lambda, eta);
  st_->net.run(p, "phase1");
}

std::optional<NodeId> WalkSession::sample(NodeId v, bool cache_bfs) {
  auto& st = *st_;
  tree::DistTree fresh;
  const tree::DistTree* t = nullptr;
  if (cache_bfs) {
    auto it = st.bfs_cache.find(v);
    if (it == st.bfs_cache.end()) it = st.bfs_cache.emplace(v, tree::build_bfs(st.net, v, "bfs")).first;
    t = &it->second;
  } else {
    fresh = tree::build_bfs(st.net, v, "bfs");
    t = &fresh;
  }
  SampleProtocol p(st, *t);
  st.net.run(p, "sample");
  if (!p.found_) return std::nullopt;
  st.picked_holder = p.holder_;
  st.picked_slot = p.slot_;
  st.picked_length = st.store[p.holder_][v][p.slot_];
  return p.holder_;
}

std::uint64_t WalkSession::sampled_length() const { return st_->picked_length; }

std::uint64_t WalkSession::more_coupons(NodeId v, std::uint64_t eta, std::uint64_t lambda) {
  auto& st = *st_;
  std::fill(st.hold.begin(), st.hold.end(), 0);
  const std::uint64_t before = st.net.round();
  SpreadProtocol spread(st, v, eta, lambda);
  st.net.run(spread, "more-coupons-1");
  const std::uint64_t part1 = st.net.round() - before;
  StopProtocol stop(st, v, lambda);
  st.net.run(stop, "more-coupons-2");
  return part1;
}

Placement WalkSession::placement() const {
  Placement out(st_->store.size());
  for (NodeId u = 0; u < st_->store.size(); ++u) {
    for (const auto& [owner, lengths] : st_->store[u]) {
      for (auto len : lengths) out[u].push_back({owner, len, len});
    }
  }
  return out;
}

void WalkSession::load_placement(const Placement& p) {
  clear_coupons();
  for (NodeId u = 0; u < p.size() && u < st_->store.size(); ++u) {
    for (const auto& c : p[u]) st_->store[u][c.owner].push_back(c.desired_length);
  }
}

void WalkSession::clear_coupons() {
  for (auto& s : st_->store) s.clear();
  for (auto& b : st_->bags) b.clear();
}

WalkOutcome WalkSession::naive(NodeId s, std::uint64_t ell) {
  const NodeId one[1] = {s};
  auto out = naive_many(one, ell);
  return std::move(out.front());
}

std::vector<WalkOutcome> WalkSession::naive_many(std::span<const NodeId> sources, std::uint64_t ell) {
  auto& st = *st_;
  std::vector<TokenStart> starts;
  std::vector<WalkOutcome> outs(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::size_t w = st.next_walk++;
    starts.push_back({w, sources[i], sources[i], 0});
    st.visit(sources[i], w, 0, graph::kNoNode);
    auto& o = outs[i];
    o.walk = w;
    o.source = sources[i];
    o.ell = ell;
    o.mode = WalkMode::naive;
    o.token.source = sources[i];
    o.token.connectors = {sources[i]};
    o.naive_steps = ell;
    if (!st.trace) st.untraced.insert(w);
  }
  NaiveProtocol p(st, ell, std::move(starts));
  st.net.run(p, "naive");
  for (auto& o : outs) {
    o.destination = st.finished.at(o.walk);
    o.token.completed = ell;
    o.stats = st.net.stats();
  }
  return outs;
}

namespace {

WalkOutcome stitch(WalkSession& session, State& st, NodeId s, std::uint64_t ell, std::uint64_t lambda,
                   std::uint64_t eta, bool cache_bfs) {
  WalkOutcome o;
  o.walk = st.next_walk++;
  o.source = s;
  o.ell = ell;
  o.lambda = lambda;
  o.mode = WalkMode::stitched;
  o.token.source = s;
  o.token.connectors = {s};
  if (!st.trace) st.untraced.insert(o.walk);
  st.visit(s, o.walk, 0, graph::kNoNode);
  std::uint64_t completed = 0;
  NodeId cur = s;
  while (completed + 2 * lambda <= ell) {
    auto holder = session.sample(cur, cache_bfs);
    if (!holder) {
      session.more_coupons(cur, eta, lambda);
      holder = session.sample(cur, cache_bfs);
      if (!holder) throw std::logic_error("Send-More-Coupons left no coupon to sample");
    }
    RouteProtocol route(st, cur, o.walk, s, completed);
    st.net.run(route, "route");
    const std::uint64_t len = st.picked_length;
    st.segments[o.walk].push_back({o.walk, cur, completed, len, st.picked_holder});
    completed += len;
    cur = st.picked_holder;
    o.token.connectors.push_back(cur);
    o.stitch_lengths.push_back(len);
  }
  o.naive_steps = ell - completed;
  NaiveProtocol tail(st, ell, {{o.walk, s, cur, completed}});
  st.net.run(tail, "naive");
  o.destination = st.finished.at(o.walk);
  o.token.completed = ell;
  return o;
}

}  // namespace

WalkOutcome WalkSession::single(NodeId s, const WalkParams& p) {
  validate(p);
  auto& st = *st_;
  const auto& g = *st.g;
  const auto m = static_cast<std::uint64_t>(g.edge_count());
  if (st.tr.is_simple() && p.ell > kFallbackBeta * m * m) return fallback(s, p.ell);
  const std::uint64_t lambda = p.lambda ? p.lambda : default_lambda(p.ell, g.node_count(), st.diam);
  if (p.ell < 2 * lambda) {
    auto o = naive(s, p.ell);
    o.lambda = lambda;
    return o;
  }
  clear_coupons();
  phase1(lambda, p.eta);
  auto o = stitch(*this, st, s, p.ell, lambda, p.eta, p.cache_bfs);
  o.stats = st.net.stats();
  return o;
}

std::vector<WalkOutcome> WalkSession::many(std::span<const NodeId> sources, const WalkParams& p) {
  validate(p);
  if (sources.empty()) throw std::invalid_argument("many_random_walks needs at least one source");
  auto& st = *st_;
  const auto& g = *st.g;
  const std::uint64_t lambda =
      p.lambda ? p.lambda : many_walks_lambda(sources.size(), p.ell, g.node_count(), st.diam);
  if (p.ell < 2 * lambda) {
    auto outs = naive_many(sources, p.ell);
    for (auto& o : outs) o.lambda = lambda;
    return outs;
  }
  clear_coupons();
  phase1(lambda, p.eta);
  std::vector<WalkOutcome> outs;
  outs.reserve(sources.size());
  for (NodeId s : sources) outs.push_back(stitch(*this, st, s, p.ell, lambda, p.eta, p.cache_bfs));
  for (auto& o : outs) o.stats = st.net.stats();
  return outs;
}

namespace {

/// Row s of P^ell by binary powering; the local computation at s.
std::vector<double> local_walk_row(const graph::Graph& g, NodeId s, std::uint64_t ell) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (NodeId w : g.neighbors(v)) p(v, w) = 1.0 / static_cast<double>(g.degree(v));
  }
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row(s) = 1.0;
  while (ell) {
    if (ell & 1) row = row * p;
    ell >>= 1;
    if (ell) p = p * p;
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += out[static_cast<std::size_t>(i)] = std::max(0.0, row(i));
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace

WalkOutcome WalkSession::fallback(NodeId s, std::uint64_t ell) {
  auto& st = *st_;
  if (!st.tr.is_simple()) throw std::invalid_argument("fallback_collect supports the simple walk only");
  const auto& g = *st.g;
  WalkOutcome o;
  o.walk = st.next_walk++;
  o.source = s;
  o.ell = ell;
  o.mode = WalkMode::fallback;
  o.token.source = s;
  o.token.connectors = {s};
  o.token.completed = ell;

  const auto t = tree::build_bfs(st.net, s, "fallback-bfs");
  std::vector<std::vector<tree::Record>> per_node(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId w : g.neighbors(u)) {
      if (u < w) per_node[u].push_back({u, w, 0, 0});
    }
  }
  const auto records = tree::upcast(st.net, t, per_node, MessageKind::edge_record, "fallback-up");
  // s rebuilds the topology and finishes the walk locally
  std::vector<graph::Edge> edges;
  edges.reserve(records.size());
  for (const auto& r : records) edges.emplace_back(static_cast<NodeId>(r[0]), static_cast<NodeId>(r[1]));
  const auto local = graph::Graph::from_edges(g.node_count(), edges);
  const std::size_t walk = o.walk;

  if (st.trace) {
    // Positions are wanted: s draws the whole trajectory and streams
    // (position, node) pairs down the tree; each node keeps its own.
    std::vector<tree::Record> steps;
    steps.reserve(ell + 1);
    NodeId cur = s;
    steps.push_back({0, cur, 0, 0});
    for (std::uint64_t i = 1; i <= ell; ++i) {
      const auto nb = local.neighbors(cur);
      cur = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(st.rng(s))];
      steps.push_back({i, cur, 0, 0});
    }
    std::vector<NodeId> last_seen(g.node_count(), graph::kNoNode);
    tree::downcast(st.net, t, steps, MessageKind::position_notify, "fallback-down",
                   [&](NodeId at, const tree::Record& r) {
                     const auto who = static_cast<NodeId>(r[1]);
                     if (who == at && r[0] > 0) st.visit(at, walk, r[0], last_seen[at]);
                     last_seen[at] = who;
                   });
    st.ends[cur].push_back({walk, s});
    st.finished[walk] = cur;
  } else {
    st.untraced.insert(walk);
    const auto row = local_walk_row(local, s, ell);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(st.rng(s));
    double acc = 0.0;
    NodeId dest = 0;
    for (NodeId v = 0; v < row.size(); ++v) {
      if (row[v] <= 0.0) continue;
      dest = v;
      acc += row[v];
      if (u < acc) break;
    }
    tree::broadcast(st.net, t, {walk, dest, 0, 0}, MessageKind::position_notify, "fallback-down",
                    [&](NodeId at, const tree::Record& r) {
                      if (at == r[1]) {
                        st.ends[at].push_back({walk, s});
                        st.finished[walk] = at;
                      }
                    });
  }
  o.destination = st.finished.at(walk);
  if (st.trace) st.visit(s, walk, 0, graph::kNoNode);
  o.stats = st.net.stats();
  return o;
}

void WalkSession::regenerate(std::span<WalkOutcome> walks) {
  auto& st = *st_;
  std::vector<Segment> segs;
  std::map<std::size_t, std::size_t> index;
  for (std::size_t i = 0; i < walks.size(); ++i) {
    const auto w = walks[i].walk;
    if (st.untraced.count(w)) {
      throw MissingTrace("walk " + std::to_string(w) + " was run without retained traces");
    }
    index[w] = i;
    auto it = st.segments.find(w);
    if (it != st.segments.end()) segs.insert(segs.end(), it->second.begin(), it->second.end());
  }
  if (!segs.empty()) {
    ReplayProtocol p(st, std::move(segs));
    st.net.run(p, "replay");
  }
  const std::size_t n = st.g->node_count();
  for (auto& o : walks) {
    o.positions.assign(n, {});
    o.visit_counts.assign(n, 0);
    o.first_visit_parent.assign(n, graph::kNoNode);
  }
  for (NodeId u = 0; u < n; ++u) {
    std::map<std::size_t, std::uint64_t> earliest;
    for (const auto& v : st.visits[u]) {
      auto it = index.find(v.walk);
      if (it == index.end()) continue;
      auto& o = walks[it->second];
      o.positions[u].push_back(v.pos);
      auto e = earliest.find(v.walk);
      if (e == earliest.end() || v.pos < e->second) {
        earliest[v.walk] = v.pos;
        o.first_visit_parent[u] = v.pred;
      }
    }
  }
  for (auto& o : walks) {
    std::uint64_t total = 0;
    for (NodeId u = 0; u < n; ++u) {
      std::sort(o.positions[u].begin(), o.positions[u].end());
      o.visit_counts[u] = o.positions[u].size();
      total += o.visit_counts[u];
    }
    if (total != o.ell + 1) {
      throw std::logic_error("regenerated walk " + std::to_string(o.walk) + " has " + std::to_string(total) +
                             " positions, expected " + std::to_string(o.ell + 1));
    }
    o.stats = st.net.stats();
  }
}

std::vector<NodeId> WalkSession::deliver_to_sources(std::span<const WalkOutcome> walks, NodeId root,
                                                    std::vector<std::uint64_t>* degrees) {
  auto& st = *st_;
  const auto& g = *st.g;
  std::map<std::size_t, std::size_t> index;
  for (std::size_t i = 0; i < walks.size(); ++i) index[walks[i].walk] = i;
  const auto t = tree::build_bfs(st.net, root, "sod-bfs");
  std::vector<std::vector<tree::Record>> per_node(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (const auto& [w, src] : st.ends[u]) {
      if (index.count(w)) per_node[u].push_back({w, u, src, g.degree(u)});
    }
  }
  const auto pairs = tree::upcast(st.net, t, per_node, MessageKind::upcast_pair, "sod-up");
  std::vector<NodeId> delivered(walks.size(), graph::kNoNode);
  if (degrees) degrees->assign(walks.size(), 0);
  tree::downcast(st.net, t, pairs, MessageKind::downcast_pair, "sod-down", [&](NodeId at, const tree::Record& r) {
    if (r[2] != at) return;
    auto it = index.find(r[0]);
    if (it == index.end() || walks[it->second].source != at) return;
    delivered[it->second] = static_cast<NodeId>(r[1]);
    if (degrees) (*degrees)[it->second] = r[3];
  });
  return delivered;
}

}  // namespace drw::walk
