#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "gge/harness.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_set = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config, "experiment config file")->required();
  sub->add_option("--seed", opts.seed, "override the config seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  sub->add_option("--out", opts.out, "override the output directory")
      ->each([&opts](const std::string&) { opts.out_set = true; });
}

gge::ExperimentConfig load(const CommonOpts& opts) {
  gge::ExperimentConfig cfg = gge::load_config(opts.config);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.out_set) cfg.out = opts.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gossip averaging experiments"};
  app.require_subcommand(1);

  CommonOpts topology_o, run_o, bounds_o, sweep_o, stale_o, multihop_o;
  CLI::App* c_topology =
      app.add_subcommand("topology", "generate graphs and write edge lists");
  add_common(c_topology, topology_o);
  CLI::App* c_run =
      app.add_subcommand("run", "simulate the configured algorithms");
  add_common(c_run, run_o);
  CLI::App* c_bounds =
      app.add_subcommand("bounds", "spectral and contraction bounds per graph");
  add_common(c_bounds, bounds_o);
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "contraction and averaging time across sizes");
  add_common(c_sweep, sweep_o);
  CLI::App* c_stale =
      app.add_subcommand("stale", "greedy selection under broadcast misses");
  add_common(c_stale, stale_o);
  CLI::App* c_multihop =
      app.add_subcommand("multihop", "hop-limit comparison against baselines");
  add_common(c_multihop, multihop_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_topology->parsed()) return gge::cmd_topology(load(topology_o));
    if (c_run->parsed()) return gge::cmd_run(load(run_o));
    if (c_bounds->parsed()) return gge::cmd_bounds(load(bounds_o));
    if (c_sweep->parsed()) return gge::cmd_sweep(load(sweep_o));
    if (c_stale->parsed()) return gge::cmd_stale(load(stale_o));
    if (c_multihop->parsed()) return gge::cmd_multihop(load(multihop_o));
  } catch (const gge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
