#include "gge/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gge {

namespace {

void validate_config(const EngineConfig& cfg) {
  if (cfg.hops < 1) throw std::invalid_argument("engine: hops must be >= 1");
  if (!(cfg.miss_prob >= 0.0 && cfg.miss_prob < 1.0))
    throw std::invalid_argument("engine: miss_prob must lie in [0, 1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("engine: alpha must lie in (0, 1)");
}

// Endpoint averaging. alpha == 0.5 assigns the identical midpoint to both
// endpoints so consensus between two nodes is exact.
void mix_pair(std::vector<double>& x, int s, int w, double alpha) {
  if (s == w) return;
  if (alpha == 0.5) {
    double v = 0.5 * (x[s] + x[w]);
    x[s] = v;
    x[w] = v;
  } else {
    double d = x[s] - x[w];
    x[s] -= alpha * d;
    x[w] += alpha * d;
  }
}

// j learns i's current value (reliable delivery or successful eavesdrop)
void deliver(GossipState& st, const Graph& g, int to, int from, double value) {
  int idx = g.neighbor_index(to, from);
  if (idx < 0) return;
  st.cache[to][idx] = value;
  if (!st.heard[to][idx]) {
    st.heard[to][idx] = 1;
    --st.unheard[to];
  }
}

bool on_chain(const std::vector<int>& chain, int v) {
  return std::find(chain.begin(), chain.end(), v) != chain.end();
}

}  // namespace

GossipState init_state(const Graph& g, const std::vector<double>& x0,
                       const EngineConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  if (g.n <= 0) throw std::invalid_argument("init_state: empty graph");
  if (static_cast<int>(x0.size()) != g.n)
    throw std::invalid_argument("init_state: x0 size mismatch");
  for (int i = 0; i < g.n; ++i)
    if (g.degree(i) == 0) throw std::invalid_argument("init_state: isolated node");

  GossipState st;
  st.x = x0;
  st.rng = Rng(seed);
  st.cache.resize(g.n);
  st.heard.resize(g.n);
  st.unheard.assign(g.n, 0);
  const bool filled = cfg.init != InitMode::proposed;
  for (int i = 0; i < g.n; ++i) {
    int d = g.degree(i);
    st.cache[i].assign(d, std::numeric_limits<double>::quiet_NaN());
    st.heard[i].assign(d, filled ? 1 : 0);
    if (filled) {
      for (int a = 0; a < d; ++a) st.cache[i][a] = x0[g.neighbors[i][a]];
    } else {
      st.unheard[i] = d;
    }
  }
  if (cfg.init == InitMode::broadcast) st.tx = g.n;
  return st;
}

std::vector<int> greedy_chain(const Graph& g, GossipState& st, int s, int hops) {
  if (s < 0 || s >= g.n) throw std::invalid_argument("greedy_chain: bad initiator");
  if (hops < 1) throw std::invalid_argument("greedy_chain: hops must be >= 1");
  if (st.unheard[s] > 0)
    throw std::logic_error("greedy_chain: initiator has unheard neighbors");

  const double carried = st.x[s];  // initiator value carried in the request
  std::vector<int> chain;
  chain.reserve(hops);

  // hop 1: the initiator's largest cached gap
  {
    const auto& nb = g.neighbors[s];
    double best = -1.0;
    int ties = 0;
    int choice = -1;
    for (int a = 0; a < static_cast<int>(nb.size()); ++a) {
      double d = carried - st.cache[s][a];
      double score = d * d;
      if (score > best) {
        best = score;
        ties = 1;
        choice = nb[a];
      } else if (score == best) {
        ++ties;
        if (static_cast<int>(st.rng.below(static_cast<std::uint64_t>(ties))) == 0)
          choice = nb[a];
      }
    }
    chain.push_back(choice);
  }

  // further hops: extend while an inspected cache knows a strictly larger gap
  int cur = chain.back();
  for (int h = 2; h <= hops; ++h) {
    double own = std::abs(carried - st.x[cur]);
    const auto& nb = g.neighbors[cur];
    double best = -1.0;
    int ties = 0;
    int choice = -1;
    for (int a = 0; a < static_cast<int>(nb.size()); ++a) {
      int u = nb[a];
      if (!st.heard[cur][a]) continue;          // never heard, no cached value
      if (u == s || on_chain(chain, u)) continue;
      double score = std::abs(carried - st.cache[cur][a]);
      if (score > best) {
        best = score;
        ties = 1;
        choice = u;
      } else if (score == best) {
        ++ties;
        if (static_cast<int>(st.rng.below(static_cast<std::uint64_t>(ties))) == 0)
          choice = u;
      }
    }
    if (choice < 0 || !(best > own)) break;
    chain.push_back(choice);
    cur = choice;
  }
  return chain;
}

StepReport step_gge(const Graph& g, GossipState& st, const EngineConfig& cfg) {
  validate_config(cfg);
  StepReport rep;
  int s = st.rng.pick(g.n);
  rep.initiator = s;

  std::vector<int> tail;
  if (cfg.init == InitMode::proposed && st.unheard[s] > 0) {
    // initialization: gossip with a uniformly chosen unheard neighbor
    rep.init_step = true;
    int which = st.rng.pick(st.unheard[s]);
    const auto& nb = g.neighbors[s];
    for (int a = 0, seen = 0; a < static_cast<int>(nb.size()); ++a) {
      if (st.heard[s][a]) continue;
      if (seen++ == which) {
        tail.push_back(nb[a]);
        break;
      }
    }
  } else {
    tail = greedy_chain(g, st, s, cfg.hops);
  }

  int w = tail.back();
  rep.partner = w;
  rep.chain.reserve(tail.size() + 1);
  rep.chain.push_back(s);
  rep.chain.insert(rep.chain.end(), tail.begin(), tail.end());
  rep.gap = st.x[s] - st.x[w];

  int h = static_cast<int>(tail.size());
  rep.tx_used = (h == 1) ? (cfg.tx_mode == TxMode::three ? 3 : 2) : 2 * h + 1;

  mix_pair(st.x, s, w, cfg.alpha);

  // Chain members exchange addressed traffic, so each of them reliably learns
  // the endpoints' new values where adjacency allows; everyone else next to an
  // endpoint eavesdrops on its broadcast and misses with probability p. The
  // miss coin is drawn even at p = 0 to keep seeded runs aligned across p.
  for (int r : rep.chain)
    for (int q : {s, w})
      if (q != r) deliver(st, g, r, q, st.x[q]);
  for (int b : {s, w}) {
    const auto& nb = g.neighbors[b];
    for (int j : nb) {
      if (on_chain(rep.chain, j)) continue;
      double coin = st.rng.uniform01();
      if (coin >= cfg.miss_prob)
        deliver(st, g, j, b, st.x[b]);
      else
        rep.misses.emplace_back(b, j);
    }
  }

  ++st.k;
  st.tx += rep.tx_used;
  return rep;
}

StepReport step_rg(const Graph& g, GossipState& st, const EngineConfig& cfg) {
  validate_config(cfg);
  StepReport rep;
  int s = st.rng.pick(g.n);
  int t = g.neighbors[s][st.rng.pick(g.degree(s))];
  rep.initiator = s;
  rep.partner = t;
  rep.chain = {s, t};
  rep.gap = st.x[s] - st.x[t];
  rep.tx_used = 2;
  mix_pair(st.x, s, t, cfg.alpha);
  ++st.k;
  st.tx += rep.tx_used;
  return rep;
}

StepReport step_geographic(const Graph& g, GossipState& st, const EngineConfig& cfg) {
  validate_config(cfg);
  if (!g.has_locations())
    throw std::invalid_argument("step_geographic: graph has no locations");
  StepReport rep;
  int s = st.rng.pick(g.n);
  int target = st.rng.pick(g.n - 1);
  if (target >= s) ++target;  // uniform over nodes != s

  const double tx_loc = g.locations[target][0];
  const double ty_loc = g.locations[target][1];
  auto dist2 = [&](int v) {
    double dx = g.locations[v][0] - tx_loc;
    double dy = g.locations[v][1] - ty_loc;
    return dx * dx + dy * dy;
  };

  // Greedy forwarding. The origin always forwards; a relay forwards only to a
  // strictly closer neighbor, otherwise it is stuck and becomes the partner.
  rep.chain.push_back(s);
  int cur = s;
  for (;;) {
    const auto& nb = g.neighbors[cur];
    int best = nb[0];
    double bd = dist2(nb[0]);
    for (int a = 1; a < static_cast<int>(nb.size()); ++a) {
      double d = dist2(nb[a]);
      if (d < bd) {
        bd = d;
        best = nb[a];
      }
    }
    if (rep.chain.size() > 1 && bd >= dist2(cur)) break;
    rep.chain.push_back(best);
    cur = best;
    if (cur == target) break;
  }

  int w = cur;
  rep.initiator = s;
  rep.partner = w;
  rep.gap = st.x[s] - st.x[w];
  int hops = static_cast<int>(rep.chain.size()) - 1;
  rep.tx_used = 2 * hops;  // request out, answer back
  mix_pair(st.x, s, w, cfg.alpha);
  ++st.k;
  st.tx += rep.tx_used;
  return rep;
}

StepReport step(const Graph& g, GossipState& st, const EngineConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::rg:
      return step_rg(g, st, cfg);
    case Algorithm::gge:
      return step_gge(g, st, cfg);
    case Algorithm::geographic:
      return step_geographic(g, st, cfg);
  }
  throw std::logic_error("step: unknown algorithm");
}

Trace run_trial(const Graph& g, const std::vector<double>& x0,
                const EngineConfig& cfg, long long budget, std::uint64_t seed) {
  validate_config(cfg);
  if (budget < 1) throw std::invalid_argument("run_trial: budget must be >= 1");
  if (!is_connected(g)) throw std::invalid_argument("run_trial: graph must be connected");

  GossipState st = init_state(g, x0, cfg, seed);

  double xbar = 0.0;
  for (double v : x0) xbar += v;
  xbar /= g.n;
  double e0sq = 0.0;
  for (double v : x0) e0sq += (v - xbar) * (v - xbar);
  const bool flat = (e0sq == 0.0);
  const double inv_e0 = flat ? 0.0 : 1.0 / std::sqrt(e0sq);

  auto exact_mse = [&]() {
    double m = 0.0;
    for (double v : st.x) m += (v - xbar) * (v - xbar);
    return m;
  };

  Trace trace;
  double mse = e0sq;
  while (st.tx < budget) {
    StepReport rep = step(g, st, cfg);
    // squared error drops by exactly gap^2/2 per exchange at alpha = 1/2;
    // refresh periodically to shed floating-point drift
    if (cfg.alpha == 0.5)
      mse -= 0.5 * rep.gap * rep.gap;
    else
      mse -= 2.0 * cfg.alpha * (1.0 - cfg.alpha) * rep.gap * rep.gap;
    if ((st.k & 63) == 0) mse = exact_mse();
    if (mse < 0.0) mse = 0.0;
    double rel = flat ? 0.0 : std::sqrt(mse) * inv_e0;
    trace.rows.push_back({st.k, st.tx, rel});
  }
  return trace;
}

}  // namespace gge
