#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gge/rng.hpp"
#include "gge/topology.hpp"

namespace gge {

enum class Algorithm { rg, gge, geographic };

// How a greedy node comes to know its neighborhood:
//   proposed  - start ignorant; gossip with unheard neighbors until complete
//   broadcast - every node announces once up front (n transmissions pre-charged)
//   ideal     - caches filled clairvoyantly, free of charge
enum class InitMode { proposed, broadcast, ideal };

// Transmission accounting for a one-hop exchange (request + broadcasts = 3,
// or the two-broadcast variant = 2). Information flow is identical; averaging
// always uses the endpoints' true values.
enum class TxMode { three, two };

struct EngineConfig {
  Algorithm algorithm = Algorithm::gge;
  int hops = 1;            // greedy chain limit, >= 1
  double miss_prob = 0.0;  // per-listener broadcast miss probability, [0, 1)
  InitMode init = InitMode::proposed;
  TxMode tx_mode = TxMode::three;
  double alpha = 0.5;      // pairwise mixing step; 0.5 averages exactly
};

struct StepReport {
  int initiator = -1;
  int partner = -1;
  std::vector<int> chain;  // initiator ... partner; length = hop count + 1
  int tx_used = 0;
  double gap = 0.0;        // x[initiator] - x[partner] before averaging
  std::vector<std::pair<int, int>> misses;  // (broadcaster, deaf listener)
  bool init_step = false;
};

struct GossipState {
  std::vector<double> x;
  // cache[i] and heard[i] run parallel to g.neighbors[i]; a cache entry is
  // meaningful only once the matching heard flag is set
  std::vector<std::vector<double>> cache;
  std::vector<std::vector<std::uint8_t>> heard;
  std::vector<int> unheard;  // per-node count of still-unheard neighbors
  long long k = 0;
  long long tx = 0;
  Rng rng = Rng(0);
};

// Validates the configuration and x0, builds caches per init mode.
// broadcast mode pre-charges tx = n.
GossipState init_state(const Graph& g, const std::vector<double>& x0,
                       const EngineConfig& cfg, std::uint64_t seed);

// Greedy partner chain for initiator s (excluded from the returned list).
// Hop 1 maximizes the cached gap (x_s - cache_s(t))^2, ties uniform; each
// further hop extends to the neighbor with the largest cached gap to s's
// value, provided it strictly beats the inspecting node's own gap. Requires
// s to have heard from every neighbor.
std::vector<int> greedy_chain(const Graph& g, GossipState& st, int s, int hops);

StepReport step_gge(const Graph& g, GossipState& st, const EngineConfig& cfg);
StepReport step_rg(const Graph& g, GossipState& st, const EngineConfig& cfg);
StepReport step_geographic(const Graph& g, GossipState& st, const EngineConfig& cfg);
StepReport step(const Graph& g, GossipState& st, const EngineConfig& cfg);

struct TraceRow {
  long long k;
  long long tx;
  double rel_err;  // ||x - xbar|| / ||x0 - xbar||, 0 for constant x0
};

struct Trace {
  std::vector<TraceRow> rows;
};

// Steps the configured algorithm until tx >= budget, recording one row per
// step. Requires a connected graph.
Trace run_trial(const Graph& g, const std::vector<double>& x0,
                const EngineConfig& cfg, long long budget, std::uint64_t seed);

}  // namespace gge
