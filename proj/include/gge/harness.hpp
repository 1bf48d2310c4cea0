#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gge/analysis.hpp"
#include "gge/engine.hpp"
#include "gge/fields.hpp"
#include "gge/topology.hpp"

namespace gge {

// configuration / validation problem: maps to CLI exit code 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TopologyKind { rgg, grid };

struct AlgorithmSpec {
  std::string label;
  EngineConfig engine;
};

// Flat key=value experiment file with one optional [algorithm <label>]
// section per algorithm. Unknown keys are rejected.
struct ExperimentConfig {
  TopologyKind topology = TopologyKind::rgg;
  int n = 0;     // rgg node count, 0 = unset
  int side = 0;  // grid side, 0 = unset
  int graphs = 1;
  int redraw_limit = 1000;
  FieldKind field = FieldKind::gaussian_bumps;
  std::vector<GaussianBump> bumps = {{1.0, 0.25, 0.25, 0.15},
                                     {-1.0, 0.75, 0.75, 0.15}};
  long long budget = 100000;
  int runs = 100;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
  std::string out = ".";
  long long bucket = 100;
  std::string record = "buckets";  // "buckets" keeps only bucket-defining rows
  std::vector<int> n_list;         // sweep sizes for rgg
  std::vector<int> side_list;      // sweep sizes for grid
  std::vector<double> p_list;      // miss probabilities for stale
  int restarts = 50;
  int iters = 5000;
  int tave_runs = 1000;
  long long tave_cap = 0;  // 0 = auto
  std::vector<AlgorithmSpec> algorithms;  // defaults to one gge entry
};

ExperimentConfig parse_config(std::istream& in, const std::string& name);
ExperimentConfig load_config(const std::string& path);
// canonical round-trippable form: parse(serialize(c)) reproduces c
std::string serialize_config(const ExperimentConfig& cfg);

// Seed streams, all splitmix64-derived from the base seed:
//   graph g   : mix(mix(base, H("graph")), g)
//   field g   : mix(mix(base, H("field")), g)
//   run g,r,a : mix(mix(mix(mix(base, H("run")), g), r), H(a))
// where H is FNV-1a and mix is mix_seed. Streams depend on algorithm labels,
// not on their position in the config.
std::uint64_t graph_seed(std::uint64_t base, int graph_id);
std::uint64_t field_seed(std::uint64_t base, int graph_id);
std::uint64_t derive_seed(std::uint64_t base, int graph_id, int run_id,
                          std::string_view algorithm);

struct ResultRow {
  std::string algorithm;
  int graph_id;
  int run_id;
  long long k;
  long long tx;
  double rel_err;
};

struct AggregateRow {
  std::string algorithm;
  long long tx_bucket;
  double mean_rel_err;
  double stderr_;
  int count;  // not serialized
};

struct RunResult {
  std::vector<ResultRow> rows;            // canonical (algorithm, graph, run, k)
  std::vector<AggregateRow> aggregates;   // canonical (algorithm, tx_bucket)
  std::vector<int> redraws;               // per realized graph
};

// One full experiment in memory: realize graphs, synthesize one field per
// graph (shared across algorithms and runs), run every (algorithm, graph,
// run) trial, bucket and aggregate.
RunResult run_experiment(const ExperimentConfig& cfg);

// header "algorithm,graph_id,run_id,k,tx,rel_err", LF endings, %.17g reals
void write_rows_csv(const std::vector<ResultRow>& rows, std::ostream& os);
// header "algorithm,tx_bucket,mean_rel_err,stderr"
void write_aggregates_csv(const std::vector<AggregateRow>& rows, std::ostream& os);

// CLI entry points; each validates what it needs, writes its outputs under
// cfg.out and returns a process exit code.
int cmd_topology(const ExperimentConfig& cfg);
int cmd_run(const ExperimentConfig& cfg);
int cmd_bounds(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_stale(const ExperimentConfig& cfg);
int cmd_multihop(const ExperimentConfig& cfg);

}  // namespace gge
