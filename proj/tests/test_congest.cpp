#include <doctest.h>

#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "drw/congest.hpp"
#include "drw/tree.hpp"
#include "drw/walk.hpp"
#include "helpers.hpp"

using namespace drw;
using congest::Message;
using congest::MessageKind;

namespace {

class Flood final : public congest::Protocol {
 public:
  Flood(std::size_t n, graph::NodeId root) : seen_(n, 0), root_(root) {}

  void on_round(congest::NodeContext& ctx) override {
    const auto u = ctx.id();
    if (ctx.local_round() == 0 && u == root_) {
      seen_[u] = 1;
      for (auto v : ctx.neighbors()) ctx.send(v, Message::make(MessageKind::flood, {u}));
      return;
    }
    if (seen_[u] || ctx.inbox().empty()) return;
    seen_[u] = 1;
    std::set<graph::NodeId> from;
    for (const auto& e : ctx.inbox()) from.insert(e.from);
    for (auto v : ctx.neighbors()) {
      if (!from.count(v)) ctx.send(v, Message::make(MessageKind::flood, {u}));
    }
  }

  std::vector<char> seen_;

 private:
  graph::NodeId root_;
};

/// Node 0 queues a batch on its edge to node 1; node 1 logs arrival order.
class Burst final : public congest::Protocol {
 public:
  explicit Burst(std::vector<Message> batch) : batch_(std::move(batch)) {}

  void on_round(congest::NodeContext& ctx) override {
    if (ctx.id() == 0 && ctx.local_round() == 0) {
      for (const auto& m : batch_) ctx.send(1, m);
    }
    if (ctx.id() == 1) {
      for (const auto& e : ctx.inbox()) order.push_back(e.msg[0]);
    }
  }

  std::vector<std::uint64_t> order;

 private:
  std::vector<Message> batch_;
};

std::uint64_t sum_phases(const congest::RoundStats& s) {
  std::uint64_t t = 0;
  for (const auto& [k, v] : s.per_phase) t += v;
  return t;
}

}  // namespace

TEST_CASE("flood terminates after eccentricity rounds") {
  const auto star = graph::from_spec_string("star:5", 1);
  congest::Network a(star, {});
  Flood fa(5, 0);
  a.run(fa, "flood");
  CHECK(a.stats().rounds_total == 1);

  const auto cyc = graph::from_spec_string("cycle:8", 1);
  congest::Network b(cyc, {});
  Flood fb(8, 0);
  b.run(fb, "flood");
  CHECK(b.stats().rounds_total == 4);
  CHECK(std::accumulate(fb.seen_.begin(), fb.seen_.end(), 0) == 8);
  CHECK(b.stats().per_phase.at("flood") == 4);
}

TEST_CASE("queue order: priority, then owner, then FIFO") {
  const auto g = graph::from_spec_string("path:2", 1);
  congest::Network net(g, {});
  Burst p({Message::make(MessageKind::flood, {10}, 5, 0), Message::make(MessageKind::flood, {11}, 1, 1),
           Message::make(MessageKind::flood, {12}, 3, 0), Message::make(MessageKind::flood, {13}, 1, 0),
           Message::make(MessageKind::flood, {14}, 1, 1)});
  net.run(p, "burst");
  CHECK(p.order == std::vector<std::uint64_t>{13, 11, 14, 12, 10});
  CHECK(net.stats().rounds_total == 5);
  CHECK(net.stats().max_edge_load == 5);
  CHECK(net.stats().messages_total == 5);
}

TEST_CASE("message validation") {
  CHECK_THROWS_AS(Message::make(MessageKind::token, {1, 2}), congest::ProtocolError);
  CHECK(congest::payload_bits(Message::make(MessageKind::flood, {0})) == 1);
  CHECK(congest::payload_bits(Message::make(MessageKind::bfs_probe, {255, 1})) == 9);

  const auto g = graph::from_spec_string("path:8", 1);
  congest::SimConfig cfg;
  cfg.bits_per_edge = 2;
  CHECK_THROWS(congest::Network(g, cfg));
  cfg.bits_per_edge = 0;
  cfg.max_rounds = 0;
  CHECK_THROWS(congest::Network(g, cfg));

  congest::Network net(g, {});
  CHECK(net.bandwidth_bits() == 24);
  CHECK_THROWS_AS(net.enqueue(0, 1, Message::make(MessageKind::flood, {1ULL << 40})), congest::PayloadTooLarge);
  CHECK_THROWS_AS(net.enqueue(0, 5, Message::make(MessageKind::flood, {1})), congest::ProtocolError);
}

TEST_CASE("round cap reports the phase") {
  const auto g = graph::from_spec_string("cycle:8", 1);
  congest::SimConfig cfg;
  cfg.max_rounds = 2;
  congest::Network net(g, cfg);
  Flood f(8, 0);
  try {
    net.run(f, "capped");
    FAIL("no limit hit");
  } catch (const congest::RoundLimitExceeded& e) {
    CHECK(e.phase() == "capped");
  }
}

TEST_CASE("edge load histogram") {
  congest::RoundStats empty;
  CHECK(congest::edge_load_histogram(empty).empty());

  const auto g = graph::from_spec_string("cycle:8", 1);
  const auto w = walk::naive_random_walk(g, 0, 30, {});
  const auto h = congest::edge_load_histogram(w.stats);
  CHECK(h.size() == 30);
  for (const auto& [r, load] : h) CHECK(load == 1);
}

TEST_CASE("capacity, conservation and phase accounting on phase 1") {
  const auto g = graph::from_spec_string("grid:3x3", 1);
  congest::SimConfig cfg;
  cfg.record_deliveries = true;
  cfg.seed = 5;
  walk::WalkSession s(g, cfg);
  s.phase1(3, 2);
  const auto& net = s.network();
  std::map<std::tuple<std::uint64_t, graph::NodeId, graph::NodeId>, int> per_edge;
  for (const auto& d : net.deliveries()) CHECK(++per_edge[{d.round, d.from, d.to}] == 1);
  CHECK(net.deliveries().size() == net.stats().messages_total);
  CHECK(net.stats().rounds_total == sum_phases(net.stats()));
  CHECK(net.stats().max_edge_load >= 1);
  const auto csv = congest::deliveries_csv(net.deliveries());
  CHECK(csv.rfind("round,from,to,kind\n", 0) == 0);
}

TEST_CASE("determinism of seeded runs") {
  const auto g = graph::from_spec_string("cycle:16", 1);
  walk::WalkParams p;
  p.ell = 40;
  p.lambda = 4;
  congest::SimConfig cfg;
  cfg.seed = 99;
  const auto a = walk::phase1_distribute(g, p, cfg);
  const auto b = walk::phase1_distribute(g, p, cfg);
  REQUIRE(a.placement.size() == b.placement.size());
  for (std::size_t v = 0; v < a.placement.size(); ++v) {
    REQUIRE(a.placement[v].size() == b.placement[v].size());
    for (std::size_t i = 0; i < a.placement[v].size(); ++i) {
      CHECK(a.placement[v][i].owner == b.placement[v][i].owner);
      CHECK(a.placement[v][i].desired_length == b.placement[v][i].desired_length);
    }
  }
  CHECK(a.stats.rounds_total == b.stats.rounds_total);
  CHECK(a.stats.messages_total == b.stats.messages_total);
}

TEST_CASE("phase 1 round window on cycle n=16") {
  const auto g = graph::from_spec_string("cycle:16", 1);
  walk::WalkParams p;
  p.ell = 64;
  p.lambda = 4;
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    congest::SimConfig cfg;
    cfg.seed = seed;
    const auto r = walk::phase1_distribute(g, p, cfg);
    const auto rounds = r.stats.phase_rounds("phase1");
    if (rounds >= 4 && rounds <= 4 * 1 * 4 * 4) ++inside;
  }
  CHECK(inside >= 99);
}

TEST_CASE("tree protocols agree with centralized answers") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng() % 30;
    const auto g = testing::random_connected(n, rng() % n, rng);
    congest::SimConfig cfg;
    cfg.seed = rep;
    congest::Network net(g, cfg);
    const auto root = static_cast<graph::NodeId>(rng() % n);
    const auto t = tree::build_bfs(net, root);
    const auto ref = graph::bfs_tree(g, root);
    CHECK(t.parent == ref.parent);
    CHECK(t.depth == ref.depth);
    CHECK(net.stats().phase_rounds("bfs") <= 2 * t.depth + 2);

    std::vector<std::uint64_t> vals(n);
    for (auto& v : vals) v = rng() % (n + 1);  // CONGEST payloads stay polynomial in n
    CHECK(tree::convergecast(net, t, vals, tree::Combine::sum, "cc") ==
          std::accumulate(vals.begin(), vals.end(), std::uint64_t{0}));
    CHECK(tree::convergecast(net, t, vals, tree::Combine::min, "cc") == *std::min_element(vals.begin(), vals.end()));
    CHECK(tree::convergecast(net, t, vals, tree::Combine::max, "cc") == *std::max_element(vals.begin(), vals.end()));

    std::vector<int> got(n, 0);
    tree::broadcast(net, t, {n - 1, 1, n / 2, 0}, MessageKind::info_broadcast, "bc",
                    [&](graph::NodeId v, const tree::Record& r) { got[v] += r[0] == n - 1 && r[2] == n / 2; });
    CHECK(std::count(got.begin(), got.end(), 1) == static_cast<long>(n));

    std::vector<std::vector<tree::Record>> per(n);
    std::size_t total = 0;
    for (graph::NodeId v = 0; v < n; ++v) {
      for (std::uint64_t i = 0; i < rng() % 3; ++i) {
        per[v].push_back({v, i, 0, 0});
        ++total;
      }
    }
    const auto before = net.round();
    const auto up = tree::upcast(net, t, per, MessageKind::upcast_pair, "up");
    CHECK(up.size() == total);
    CHECK(net.round() - before <= t.depth + total + 2);
    std::vector<std::size_t> heard(n, 0);
    tree::downcast(net, t, up, MessageKind::downcast_pair, "down",
                   [&](graph::NodeId v, const tree::Record&) { ++heard[v]; });
    for (auto h : heard) CHECK(h == total);

    std::vector<std::vector<tree::Record>> keyed(n);
    std::map<std::uint64_t, tree::Totals> expect;
    for (graph::NodeId v = 0; v < n; ++v) {
      const std::uint64_t key = rng() % 4;
      keyed[v].push_back({key, 1, v, 2});
      auto& e = expect[key];
      e[0] += 1;
      e[1] += v;
      e[2] += 2;
    }
    CHECK(tree::merged_upcast(net, t, keyed, MessageKind::bucket_summary, "merge") == expect);
    CHECK(net.stats().rounds_total == sum_phases(net.stats()));
  }
}
