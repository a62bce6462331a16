#include <doctest.h>

#include <cmath>
#include <numbers>

#include "drw/oracle.hpp"
#include "helpers.hpp"

using namespace drw;
using oracle::ChainSpec;

namespace {

const char* kVerification[] = {"path:5",   "cycle:8",  "cycle:9",   "star:9",      "grid:4x4",
                               "complete:6", "complete:16", "grid:3x3", "er:12:0.4", "rgg:14:0.5"};

}  // namespace

TEST_CASE("walk_distribution on small cases") {
  const auto c4 = graph::from_spec_string("cycle:4", 1);
  const auto d0 = oracle::walk_distribution(c4, 2, 0);
  CHECK(d0 == std::vector<double>{0, 0, 1, 0});
  const auto d2 = oracle::walk_distribution(c4, 0, 2);
  CHECK(d2[0] == doctest::Approx(0.5));
  CHECK(d2[1] == doctest::Approx(0.0));
  CHECK(d2[2] == doctest::Approx(0.5));
  const auto p2 = graph::from_spec_string("path:2", 1);
  CHECK(oracle::walk_distribution(p2, 0, 1) == std::vector<double>{0, 1});

  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng() % 14;
    const auto g = testing::random_connected(n, rng() % n, rng);
    const auto s = static_cast<graph::NodeId>(rng() % n);
    const auto one = oracle::walk_distribution(g, s, 1);
    for (graph::NodeId v = 0; v < n; ++v) {
      CHECK(one[v] == doctest::Approx(g.has_edge(s, v) ? 1.0 / g.degree(s) : 0.0));
    }
    const auto d = oracle::walk_distribution(g, s, 1 + rng() % 50);
    double sum = 0;
    for (auto x : d) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
}

TEST_CASE("long walks switch to the spectral form consistently") {
  const auto g = graph::from_spec_string("cycle:9", 1);
  const auto pi = oracle::stationary(g);
  CHECK(oracle::l1_distance(oracle::walk_distribution(g, 0, 300'000), pi) <= 1e-10);
  const auto p4 = graph::from_spec_string("path:4", 1);
  const auto even = oracle::walk_distribution(p4, 0, 1'000'000);
  CHECK(even[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(even[0] == doctest::Approx(1.0 / 3));
  CHECK(even[2] == doctest::Approx(2.0 / 3));
}

TEST_CASE("naive_walk") {
  const auto star = graph::from_spec_string("star:6", 1);
  CHECK(oracle::naive_walk(star, 3, 0, 1) == std::vector<graph::NodeId>{3});
  const auto t = oracle::naive_walk(star, 0, 2, 9);
  REQUIRE(t.size() == 3);
  CHECK(t[0] == 0);
  CHECK(t[1] != 0);
  CHECK(t[2] == 0);

  const auto cyc = graph::from_spec_string("cycle:8", 1);
  std::vector<std::uint64_t> counts(8, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) ++counts[oracle::naive_walk(cyc, 0, 10000, seed).back()];
  CHECK(testing::tv_counts(counts, oracle::walk_distribution(cyc, 0, 10000)) <= 0.03);
}

TEST_CASE("stationary distribution") {
  for (auto x : oracle::stationary(graph::from_spec_string("complete:4", 1))) CHECK(x == doctest::Approx(0.25));
  const auto s5 = oracle::stationary(graph::from_spec_string("star:5", 1));
  CHECK(s5[0] == doctest::Approx(0.5));
  CHECK(s5[1] == doctest::Approx(0.125));
  const auto g3 = oracle::stationary(graph::from_spec_string("grid:3x3", 1));
  CHECK(g3[0] == doctest::Approx(2.0 / 24));
  CHECK(g3[1] == doctest::Approx(3.0 / 24));
  CHECK(g3[4] == doctest::Approx(4.0 / 24));

  for (const char* spec : kVerification) {
    const auto g = graph::from_spec_string(spec, 1);
    const auto chain = ChainSpec::simple(g);
    const auto pi = oracle::stationary(g);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
    const Eigen::VectorXd next = chain.transition.transpose() * v;
    CHECK((next - v).lpNorm<1>() <= 1e-10);
    CHECK(chain.c == doctest::Approx(1.0 / (2.0 * g.edge_count())));
    for (Eigen::Index i = 0; i < chain.transition.rows(); ++i) CHECK(std::abs(chain.transition.row(i).sum() - 1) <= 1e-10);
  }
}

TEST_CASE("metropolis chain") {
  const auto g = graph::from_spec_string("complete:4", 1);
  const std::vector<double> pi{0.4, 0.3, 0.2, 0.1};
  const auto chain = ChainSpec::metropolis(g, pi, 0.5);
  Eigen::VectorXd v(4);
  v << 0.4, 0.3, 0.2, 0.1;
  CHECK((chain.transition.transpose() * v - v).lpNorm<1>() <= 1e-12);
  CHECK(chain.transition(0, 3) == doctest::Approx(0.5 * 0.1 / (0.4 * 3)));
}

TEST_CASE("exact_mixing") {
  const auto k4 = graph::from_spec_string("complete:4", 1);
  const double mix = 1.0 / (2.0 * std::numbers::e);
  const auto t = oracle::exact_mixing(k4, 0, mix);
  CHECK(t == oracle::exact_mixing(k4, 2, mix));
  // K4 from x: ||pi_x(t) - pi||_1 = (3/2) (1/3)^t
  CHECK(t == 2);
  CHECK(oracle::exact_mixing(k4, 0, 2.0) == 0);
  CHECK_THROWS_AS(oracle::exact_mixing(graph::from_spec_string("cycle:8", 1), 0, 0.5), std::invalid_argument);

  const auto c5 = graph::from_spec_string("cycle:5", 1);
  std::uint64_t prev = oracle::exact_mixing(c5, 0, 0.01);
  for (double d = 0.02; d < 2.0; d += 0.05) {
    const auto cur = oracle::exact_mixing(c5, 0, d);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("distance profile is non-increasing") {
  for (const char* spec : kVerification) {
    const auto g = graph::from_spec_string(spec, 1);
    for (graph::NodeId x : {graph::NodeId{0}, static_cast<graph::NodeId>(g.node_count() - 1)}) {
      const auto prof = oracle::distance_profile(g, x, 200);
      REQUIRE(prof.size() == 201);
      for (std::size_t t = 0; t + 1 < prof.size(); ++t) CHECK(prof[t + 1] <= prof[t] + 1e-10);
    }
  }
}

TEST_CASE("spanning_tree_count") {
  CHECK(oracle::spanning_tree_count(graph::from_spec_string("path:7", 1)) == 1);
  CHECK(oracle::spanning_tree_count(graph::from_spec_string("star:7", 1)) == 1);
  CHECK(oracle::spanning_tree_count(graph::from_spec_string("cycle:4", 1)) == 4);
  for (std::uint64_t n = 2; n <= 12; ++n) {
    std::uint64_t cayley = 1;
    for (std::uint64_t i = 0; i + 2 < n; ++i) cayley *= n;
    CHECK(oracle::spanning_tree_count(graph::from_spec_string("complete:" + std::to_string(n), 1)) == cayley);
  }
  // 4-cycle plus chord: 8 trees
  CHECK(oracle::spanning_tree_count(graph::load_graph("0 1\n1 2\n2 3\n3 0\n0 2\n")) == 8);
  CHECK_THROWS_AS(oracle::spanning_tree_count(graph::from_spec_string("complete:40", 1)), std::overflow_error);
}

TEST_CASE("expected visits on the lazy chain") {
  const auto g = graph::from_spec_string("cycle:6", 1);
  const auto chain = ChainSpec::lazy(g);
  CHECK(chain.transition(0, 0) == doctest::Approx(0.5));
  const auto ev = oracle::expected_visits(chain, 0);
  CHECK(ev.isIdentity());
  const auto ev3 = oracle::expected_visits(chain, 3);
  for (Eigen::Index i = 0; i < ev3.rows(); ++i) CHECK(ev3.row(i).sum() == doctest::Approx(4.0));
}

TEST_CASE("spectrum") {
  for (std::size_t n : {4, 9, 16}) {
    const auto g = graph::from_spec_string("complete:" + std::to_string(n), 1);
    CHECK(oracle::spectral_gap(g) == doctest::Approx(static_cast<double>(n) / (n - 1)));
  }
  const auto ev = oracle::eigenvalues(graph::from_spec_string("cycle:8", 1));
  CHECK(ev.front() == doctest::Approx(1.0));
  CHECK(ev.back() == doctest::Approx(-1.0));
  CHECK(oracle::spectral_gap(graph::from_spec_string("cycle:8", 1)) ==
        doctest::Approx(1.0 - std::cos(2 * std::numbers::pi / 8)));
}

TEST_CASE("distribution csv") {
  const auto csv = oracle::distribution_csv({0.25, 0.75});
  CHECK(csv.rfind("node,probability\n", 0) == 0);
  CHECK(csv.find("1,0.75") != std::string::npos);
}
