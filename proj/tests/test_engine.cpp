#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gge/engine.hpp"
#include "gge/fields.hpp"
#include "gge/topology.hpp"

using namespace gge;

namespace {

Graph path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return from_edges(n, e);
}

double mse(const std::vector<double>& x) {
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s;
}

EngineConfig gge_cfg(InitMode init = InitMode::ideal, int hops = 1, double p = 0.0) {
  EngineConfig c;
  c.algorithm = Algorithm::gge;
  c.init = init;
  c.hops = hops;
  c.miss_prob = p;
  return c;
}

}  // namespace

TEST_CASE("configuration and input validation") {
  Graph g = path(3);
  std::vector<double> x0 = {0.0, 1.0, 2.0};
  EngineConfig c = gge_cfg();
  CHECK_NOTHROW(init_state(g, x0, c, 1));
  c.hops = 0;
  CHECK_THROWS(init_state(g, x0, c, 1));
  c = gge_cfg();
  c.miss_prob = 1.0;
  CHECK_THROWS(init_state(g, x0, c, 1));
  c = gge_cfg();
  c.alpha = 0.0;
  CHECK_THROWS(init_state(g, x0, c, 1));
  c = gge_cfg();
  c.alpha = 1.0;
  CHECK_THROWS(init_state(g, x0, c, 1));
  c = gge_cfg();
  CHECK_THROWS(init_state(g, {0.0, 1.0}, c, 1));  // size mismatch
}

TEST_CASE("initialization modes") {
  Graph g = path(3);
  std::vector<double> x0 = {5.0, -1.0, 2.0};

  GossipState ideal = init_state(g, x0, gge_cfg(InitMode::ideal), 1);
  CHECK(ideal.tx == 0);
  CHECK(ideal.k == 0);
  for (int i = 0; i < g.n; ++i) {
    CHECK(ideal.unheard[i] == 0);
    for (int t = 0; t < g.degree(i); ++t) {
      CHECK(ideal.heard[i][t] == 1);
      CHECK(ideal.cache[i][t] == x0[g.neighbors[i][t]]);
    }
  }

  GossipState bc = init_state(g, x0, gge_cfg(InitMode::broadcast), 1);
  CHECK(bc.tx == 3);  // one announcement per node, charged up front
  for (int i = 0; i < g.n; ++i) CHECK(bc.unheard[i] == 0);

  GossipState prop = init_state(g, x0, gge_cfg(InitMode::proposed), 1);
  CHECK(prop.tx == 0);
  for (int i = 0; i < g.n; ++i) {
    CHECK(prop.unheard[i] == g.degree(i));
    for (int t = 0; t < g.degree(i); ++t) CHECK(prop.heard[i][t] == 0);
  }
}

TEST_CASE("greedy partner maximizes the cached gap") {
  Graph g = path(3);
  GossipState st = init_state(g, {0.0, 1.0, 5.0}, gge_cfg(), 2);
  CHECK(greedy_chain(g, st, 1, 1) == std::vector<int>{2});
  GossipState st2 = init_state(g, {0.0, 1.0, 1.5}, gge_cfg(), 2);
  CHECK(greedy_chain(g, st2, 1, 1) == std::vector<int>{0});
}

TEST_CASE("greedy ties split uniformly") {
  Graph g = path(3);
  GossipState st = init_state(g, {1.0, 0.0, 1.0}, gge_cfg(), 7);
  const int trials = 4000;
  int zero = 0;
  for (int t = 0; t < trials; ++t) {
    auto chain = greedy_chain(g, st, 1, 1);
    REQUIRE(chain.size() == 1);
    if (chain[0] == 0) ++zero;
  }
  // binomial(4000, 1/2): four sigma is about 126
  CHECK(std::abs(zero - trials / 2) < 150);
}

TEST_CASE("selection reads the cache, averaging reads the truth") {
  Graph g = path(3);
  GossipState st = init_state(g, {0.0, 4.0, 1.0}, gge_cfg(), 3);
  // poison node 1's view of node 2: cached gap 5 beats the true best gap 4
  st.cache[1][g.neighbor_index(1, 2)] = 9.0;
  CHECK(greedy_chain(g, st, 1, 1) == std::vector<int>{2});

  // two nodes: stale caches cannot corrupt the averaged values
  Graph g2 = from_edges(2, {{0, 1}});
  GossipState st2 = init_state(g2, {0.0, 4.0}, gge_cfg(), 5);
  st2.cache[0][0] = 99.0;
  st2.cache[1][0] = -99.0;
  StepReport rep = step_gge(g2, st2, gge_cfg());
  CHECK(std::abs(rep.gap) == 4.0);
  CHECK(st2.x[0] == 2.0);  // exact midpoint, bitwise
  CHECK(st2.x[1] == 2.0);
}

TEST_CASE("multi-hop chains extend only on strictly larger cached gaps") {
  Graph g = path(4);
  std::vector<double> x0 = {0.0, 1.0, 2.0, 9.0};
  {
    GossipState st = init_state(g, x0, gge_cfg(InitMode::ideal, 1), 2);
    CHECK(greedy_chain(g, st, 0, 1) == std::vector<int>{1});
  }
  {
    GossipState st = init_state(g, x0, gge_cfg(InitMode::ideal, 2), 2);
    CHECK(greedy_chain(g, st, 0, 2) == std::vector<int>{1, 2});
  }
  {
    GossipState st = init_state(g, x0, gge_cfg(InitMode::ideal, 3), 2);
    CHECK(greedy_chain(g, st, 0, 3) == std::vector<int>{1, 2, 3});
  }
  {
    // equal gap at the inspector stops the chain
    GossipState st = init_state(g, {0.0, 1.0, 1.0, 1.0}, gge_cfg(InitMode::ideal, 3), 2);
    CHECK(greedy_chain(g, st, 0, 3) == std::vector<int>{1});
  }
}

TEST_CASE("multi-hop step accounting and chain shape") {
  Graph g = generate_rgg(25, 31);
  EngineConfig c = gge_cfg(InitMode::ideal, 3);
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 2;
  GossipState st = init_state(g, synthesize(fs, g), c, 11);
  bool saw_long = false;
  for (int it = 0; it < 400; ++it) {
    StepReport rep = step_gge(g, st, c);
    REQUIRE(rep.chain.size() >= 2);
    CHECK(rep.chain.front() == rep.initiator);
    CHECK(rep.chain.back() == rep.partner);
    const int hops = static_cast<int>(rep.chain.size()) - 1;
    CHECK(hops <= 3);
    CHECK(rep.tx_used == (hops == 1 ? 3 : 2 * hops + 1));
    for (std::size_t i = 0; i + 1 < rep.chain.size(); ++i) {
      CHECK(g.neighbor_index(rep.chain[i], rep.chain[i + 1]) >= 0);
      for (std::size_t j = i + 1; j < rep.chain.size(); ++j)
        CHECK(rep.chain[i] != rep.chain[j]);
    }
    if (hops > 1) saw_long = true;
  }
  CHECK(saw_long);
}

TEST_CASE("reliable broadcasts keep caches exact") {
  Graph g = generate_rgg(25, 13);
  EngineConfig c = gge_cfg(InitMode::ideal, 2, 0.0);
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 6;
  GossipState st = init_state(g, synthesize(fs, g), c, 17);
  for (int it = 0; it < 300; ++it) {
    StepReport rep = step_gge(g, st, c);
    CHECK(rep.misses.empty());
  }
  for (int i = 0; i < g.n; ++i)
    for (int t = 0; t < g.degree(i); ++t) CHECK(st.cache[i][t] == st.x[g.neighbors[i][t]]);
}

TEST_CASE("misses make caches stale") {
  Graph g = generate_rgg(20, 23);
  EngineConfig c = gge_cfg(InitMode::ideal, 1, 0.6);
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 3;
  GossipState st = init_state(g, synthesize(fs, g), c, 19);
  int missed = 0;
  for (int it = 0; it < 100; ++it) missed += static_cast<int>(step_gge(g, st, c).misses.size());
  CHECK(missed > 0);
  bool stale = false;
  for (int i = 0; i < g.n && !stale; ++i)
    for (int t = 0; t < g.degree(i) && !stale; ++t)
      stale = st.cache[i][t] != st.x[g.neighbors[i][t]];
  CHECK(stale);
}

TEST_CASE("proposed initialization completes and is charged like gossip") {
  Graph g = generate_rgg(20, 3);
  EngineConfig c = gge_cfg(InitMode::proposed);
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 12;
  GossipState st = init_state(g, synthesize(fs, g), c, 29);
  int init_steps = 0;
  for (int it = 0; it < 2000; ++it) {
    bool pending = false;
    for (int i = 0; i < g.n; ++i) pending = pending || st.unheard[i] > 0;
    if (!pending) break;
    StepReport rep = step_gge(g, st, c);
    if (rep.init_step) {
      ++init_steps;
      CHECK(rep.tx_used == 3);
      CHECK(rep.chain.size() == 2);
    }
  }
  for (int i = 0; i < g.n; ++i) CHECK(st.unheard[i] == 0);
  CHECK(init_steps > 0);
}

TEST_CASE("randomized gossip steps average a uniform random edge") {
  Graph g = path(3);
  EngineConfig c;
  c.algorithm = Algorithm::rg;
  GossipState st = init_state(g, {0.0, 1.0, 5.0}, c, 37);
  for (int it = 0; it < 200; ++it) {
    double before = mse(st.x);
    StepReport rep = step_rg(g, st, c);
    CHECK(rep.tx_used == 2);
    CHECK(rep.chain.size() == 2);
    CHECK(g.neighbor_index(rep.initiator, rep.partner) >= 0);
    CHECK(before - mse(st.x) == doctest::Approx(0.5 * rep.gap * rep.gap).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("geographic routing walks the lattice to the target") {
  Graph g = generate_grid(5);
  EngineConfig c;
  c.algorithm = Algorithm::geographic;
  FieldSpec fs;
  fs.kind = FieldKind::linear;
  std::vector<double> x0 = synthesize(fs, g);
  // hunt for a round that starts at one corner and routes to the opposite one
  bool found = false;
  for (std::uint64_t seed = 0; seed < 6000 && !found; ++seed) {
    GossipState st = init_state(g, x0, c, seed);
    StepReport rep = step_geographic(g, st, c);
    if (rep.initiator == 0 && rep.partner == 24) {
      CHECK(rep.chain.size() == 9);  // eight lattice hops between corners
      CHECK(rep.tx_used == 16);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("geographic accounting holds on irregular graphs") {
  Graph g = generate_rgg(30, 41);
  EngineConfig c;
  c.algorithm = Algorithm::geographic;
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 5;
  GossipState st = init_state(g, synthesize(fs, g), c, 43);
  for (int it = 0; it < 500; ++it) {
    double before = mse(st.x);
    StepReport rep = step_geographic(g, st, c);
    REQUIRE(rep.chain.size() >= 2);
    CHECK(rep.chain.front() == rep.initiator);
    CHECK(rep.chain.back() == rep.partner);
    CHECK(rep.tx_used == 2 * (static_cast<int>(rep.chain.size()) - 1));
    for (std::size_t i = 0; i + 1 < rep.chain.size(); ++i)
      CHECK(g.neighbor_index(rep.chain[i], rep.chain[i + 1]) >= 0);
    CHECK(before - mse(st.x) ==
          doctest::Approx(0.5 * rep.gap * rep.gap).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("stuck routing settles on the dead-end relay") {
  // 0 -(only)- 1; node 1's remaining neighbor 2 is farther from node 3 than 1
  // is, so a round aimed at 3 must stop and average with 1 instead.
  Graph g = from_edges(4, {{0, 1}, {1, 2}, {2, 3}},
                       {{0.0, 0.0}, {0.4, 0.0}, {0.35, 0.5}, {1.0, 0.0}});
  EngineConfig c;
  c.algorithm = Algorithm::geographic;
  std::vector<double> x0 = {0.0, 1.0, 2.0, 3.0};
  int from0 = 0, cut_short = 0, reached2 = 0;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    GossipState st = init_state(g, x0, c, seed);
    StepReport rep = step_geographic(g, st, c);
    if (rep.initiator != 0) continue;
    ++from0;
    if (rep.chain == std::vector<int>{0, 1}) ++cut_short;       // target 1 or 3
    else if (rep.chain == std::vector<int>{0, 1, 2}) ++reached2;  // target 2
    else CHECK(false);
  }
  CHECK(from0 > 500);
  CHECK(cut_short > 0);
  CHECK(reached2 > 0);
  // targets are uniform over {1,2,3}: the dead end absorbs two of three
  double frac = static_cast<double>(cut_short) / from0;
  CHECK(frac > 0.55);
  CHECK(frac < 0.78);
}

TEST_CASE("sum conservation and the per-step error identity") {
  Graph g = generate_rgg(30, 53);
  FieldSpec fs;
  fs.seed = 30;
  std::vector<double> x0 = synthesize(fs, g);
  const double total0 = std::accumulate(x0.begin(), x0.end(), 0.0);
  for (Algorithm a : {Algorithm::gge, Algorithm::rg, Algorithm::geographic}) {
    EngineConfig c = gge_cfg(InitMode::proposed, 2, 0.2);
    c.algorithm = a;
    GossipState st = init_state(g, x0, c, 61);
    for (int it = 0; it < 400; ++it) {
      double before = mse(st.x);
      StepReport rep = step(g, st, c);
      CHECK(before - mse(st.x) ==
            doctest::Approx(0.5 * rep.gap * rep.gap).epsilon(1e-9).scale(1e-12));
    }
    double total = std::accumulate(st.x.begin(), st.x.end(), 0.0);
    CHECK(total == doctest::Approx(total0).epsilon(1e-12));
  }
}

TEST_CASE("greedy selection matches brute force when caches are exact") {
  Graph g = generate_rgg(25, 67);
  FieldSpec fs;
  fs.kind = FieldKind::iid_gaussian;
  fs.seed = 44;
  std::vector<double> x0 = synthesize(fs, g);
  GossipState st = init_state(g, x0, gge_cfg(), 71);
  for (int s = 0; s < g.n; ++s) {
    auto chain = greedy_chain(g, st, s, 1);
    REQUIRE(chain.size() == 1);
    double best = 0.0;
    for (int t : g.neighbors[s])
      best = std::max(best, (x0[s] - x0[t]) * (x0[s] - x0[t]));
    double got = (x0[s] - x0[chain[0]]) * (x0[s] - x0[chain[0]]);
    CHECK(got == doctest::Approx(best).epsilon(1e-15));
  }
}

TEST_CASE("two nodes reach exact consensus in one step") {
  Graph g = from_edges(2, {{0, 1}});
  Trace tr = run_trial(g, {0.0, 2.0}, gge_cfg(), 3, 5);
  REQUIRE(tr.rows.size() == 1);
  CHECK(tr.rows[0].rel_err == 0.0);
  CHECK(tr.rows[0].tx == 3);
  CHECK(tr.rows[0].k == 1);

  GossipState st = init_state(g, {0.0, 2.0}, gge_cfg(), 5);
  step_gge(g, st, gge_cfg());
  CHECK(st.x[0] == 1.0);
  CHECK(st.x[1] == 1.0);
}

TEST_CASE("trials are deterministic in the seed and monotone in error") {
  Graph g = generate_rgg(30, 73);
  FieldSpec fs;
  fs.seed = 9;
  std::vector<double> x0 = synthesize(fs, g);
  EngineConfig c = gge_cfg(InitMode::broadcast, 2, 0.1);
  Trace a = run_trial(g, x0, c, 5000, 101);
  Trace b = run_trial(g, x0, c, 5000, 101);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].k == b.rows[i].k);
    CHECK(a.rows[i].tx == b.rows[i].tx);
    CHECK(a.rows[i].rel_err == b.rows[i].rel_err);
  }
  Trace d = run_trial(g, x0, c, 5000, 102);
  REQUIRE(d.rows.size() > 10);
  CHECK(a.rows[10].rel_err != d.rows[10].rel_err);  // before the noise floor

  CHECK(a.rows.front().tx >= 30);  // broadcast setup charged before round one
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].rel_err <= a.rows[i - 1].rel_err + 1e-15);
    CHECK(a.rows[i].tx > a.rows[i - 1].tx);
    CHECK(a.rows[i].k == a.rows[i - 1].k + 1);
  }
  CHECK(a.rows.back().tx >= 5000);
}

TEST_CASE("trials require a connected graph") {
  Graph g = from_edges(4, {{0, 1}, {2, 3}});
  CHECK_THROWS(run_trial(g, {0.0, 1.0, 2.0, 3.0}, gge_cfg(), 100, 1));
}
