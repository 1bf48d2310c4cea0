#include "gge/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace gge {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct ParsePos {
  const std::string& name;
  int line;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
  }
};

long long parse_int(const std::string& v, const ParsePos& at) {
  try {
    std::size_t used = 0;
    long long out = std::stoll(v, &used);
    if (used != v.size()) at.fail("invalid integer '" + v + "'");
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    at.fail("invalid integer '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const ParsePos& at) {
  try {
    std::size_t used = 0;
    unsigned long long out = std::stoull(v, &used);
    if (used != v.size() || (!v.empty() && v[0] == '-'))
      at.fail("invalid seed '" + v + "'");
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    at.fail("invalid seed '" + v + "'");
  }
}

double parse_real(const std::string& v, const ParsePos& at) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) at.fail("invalid real '" + v + "'");
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    at.fail("invalid real '" + v + "'");
  }
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' &&
        c != '-')
      return false;
  return true;
}

FieldKind parse_field_kind(const std::string& v, const ParsePos& at) {
  if (v == "gaussian_bumps") return FieldKind::gaussian_bumps;
  if (v == "linear") return FieldKind::linear;
  if (v == "spike") return FieldKind::spike;
  if (v == "iid_gaussian") return FieldKind::iid_gaussian;
  at.fail("unknown field '" + v + "'");
}

const char* field_name(FieldKind k) {
  switch (k) {
    case FieldKind::gaussian_bumps: return "gaussian_bumps";
    case FieldKind::linear: return "linear";
    case FieldKind::spike: return "spike";
    case FieldKind::iid_gaussian: return "iid_gaussian";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& v, const ParsePos& at) {
  if (v == "rg") return Algorithm::rg;
  if (v == "gge") return Algorithm::gge;
  if (v == "geographic") return Algorithm::geographic;
  at.fail("unknown algorithm type '" + v + "'");
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::rg: return "rg";
    case Algorithm::gge: return "gge";
    case Algorithm::geographic: return "geographic";
  }
  return "?";
}

const char* init_name(InitMode m) {
  switch (m) {
    case InitMode::proposed: return "proposed";
    case InitMode::broadcast: return "broadcast";
    case InitMode::ideal: return "ideal";
  }
  return "?";
}

const char* tx_name(TxMode m) { return m == TxMode::three ? "three" : "two"; }

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& name) {
  ExperimentConfig cfg;
  cfg.algorithms.clear();
  cfg.bumps.clear();

  std::vector<double> bump_amp, bump_sig;
  std::vector<std::pair<double, double>> bump_ctr;
  bool saw_bump_amp = false, saw_bump_ctr = false, saw_bump_sig = false;

  std::set<std::string> seen_global;
  std::set<std::string> seen_labels;
  int section = -1;  // -1 global, else index into cfg.algorithms
  std::vector<std::set<std::string>> seen_section_keys;
  std::vector<bool> section_has_type;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    ParsePos at{name, lineno};
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      std::string inner = trim(line.substr(1, line.size() - 2));
      auto parts = split(inner, ' ');
      if (parts.size() != 2 || parts[0] != "algorithm")
        at.fail("expected [algorithm <label>]");
      std::string label = trim(parts[1]);
      if (!valid_label(label)) at.fail("bad algorithm label '" + label + "'");
      if (!seen_labels.insert(label).second)
        at.fail("duplicate algorithm label '" + label + "'");
      AlgorithmSpec spec;
      spec.label = label;
      cfg.algorithms.push_back(spec);
      seen_section_keys.emplace_back();
      section_has_type.push_back(false);
      section = static_cast<int>(cfg.algorithms.size()) - 1;
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (value.empty()) at.fail("empty value for '" + key + "'");

    if (section < 0) {
      if (!seen_global.insert(key).second) at.fail("duplicate key '" + key + "'");
      if (key == "topology") {
        if (value == "rgg")
          cfg.topology = TopologyKind::rgg;
        else if (value == "grid")
          cfg.topology = TopologyKind::grid;
        else
          at.fail("unknown topology '" + value + "'");
      } else if (key == "n") {
        long long v = parse_int(value, at);
        if (v < 2) at.fail("n must be >= 2");
        cfg.n = static_cast<int>(v);
      } else if (key == "side") {
        long long v = parse_int(value, at);
        if (v < 2) at.fail("side must be >= 2");
        cfg.side = static_cast<int>(v);
      } else if (key == "graphs") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("graphs must be >= 1");
        cfg.graphs = static_cast<int>(v);
      } else if (key == "redraw_limit") {
        long long v = parse_int(value, at);
        if (v < 0) at.fail("redraw_limit must be >= 0");
        cfg.redraw_limit = static_cast<int>(v);
      } else if (key == "field") {
        cfg.field = parse_field_kind(value, at);
      } else if (key == "bump_amplitudes") {
        saw_bump_amp = true;
        for (const auto& tok : split(value, ','))
          bump_amp.push_back(parse_real(trim(tok), at));
      } else if (key == "bump_centers") {
        saw_bump_ctr = true;
        for (const auto& tok : split(value, ',')) {
          auto xy = split(trim(tok), ':');
          if (xy.size() != 2) at.fail("bump center must be x:y");
          bump_ctr.emplace_back(parse_real(trim(xy[0]), at),
                                parse_real(trim(xy[1]), at));
        }
      } else if (key == "bump_sigmas") {
        saw_bump_sig = true;
        for (const auto& tok : split(value, ',')) {
          double s = parse_real(trim(tok), at);
          if (!(s > 0.0)) at.fail("bump sigma must be positive");
          bump_sig.push_back(s);
        }
      } else if (key == "budget") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("budget must be >= 1");
        cfg.budget = v;
      } else if (key == "runs") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("runs must be >= 1");
        cfg.runs = static_cast<int>(v);
      } else if (key == "epsilon") {
        double v = parse_real(value, at);
        if (!(v > 0.0 && v < 1.0)) at.fail("epsilon must lie in (0, 1)");
        cfg.epsilon = v;
      } else if (key == "seed") {
        cfg.seed = parse_u64(value, at);
      } else if (key == "out") {
        cfg.out = value;
      } else if (key == "bucket") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("bucket must be >= 1");
        cfg.bucket = v;
      } else if (key == "record") {
        if (value != "buckets" && value != "all")
          at.fail("record must be 'buckets' or 'all'");
        cfg.record = value;
      } else if (key == "n_list") {
        for (const auto& tok : split(value, ',')) {
          long long v = parse_int(trim(tok), at);
          if (v < 2) at.fail("n_list entries must be >= 2");
          cfg.n_list.push_back(static_cast<int>(v));
        }
      } else if (key == "side_list") {
        for (const auto& tok : split(value, ',')) {
          long long v = parse_int(trim(tok), at);
          if (v < 2) at.fail("side_list entries must be >= 2");
          cfg.side_list.push_back(static_cast<int>(v));
        }
      } else if (key == "p_list") {
        for (const auto& tok : split(value, ',')) {
          double v = parse_real(trim(tok), at);
          if (!(v >= 0.0 && v < 1.0)) at.fail("p_list entries must lie in [0, 1)");
          cfg.p_list.push_back(v);
        }
      } else if (key == "restarts") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("restarts must be >= 1");
        cfg.restarts = static_cast<int>(v);
      } else if (key == "iters") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("iters must be >= 1");
        cfg.iters = static_cast<int>(v);
      } else if (key == "tave_runs") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("tave_runs must be >= 1");
        cfg.tave_runs = static_cast<int>(v);
      } else if (key == "tave_cap") {
        long long v = parse_int(value, at);
        if (v < 0) at.fail("tave_cap must be >= 0");
        cfg.tave_cap = v;
      } else {
        at.fail("unknown key '" + key + "'");
      }
    } else {
      AlgorithmSpec& spec = cfg.algorithms[section];
      if (!seen_section_keys[section].insert(key).second)
        at.fail("duplicate key '" + key + "' in [algorithm " + spec.label + "]");
      if (key == "type") {
        spec.engine.algorithm = parse_algorithm(value, at);
        section_has_type[section] = true;
      } else if (key == "hops") {
        long long v = parse_int(value, at);
        if (v < 1) at.fail("hops must be >= 1");
        spec.engine.hops = static_cast<int>(v);
      } else if (key == "miss_prob") {
        double v = parse_real(value, at);
        if (!(v >= 0.0 && v < 1.0)) at.fail("miss_prob must lie in [0, 1)");
        spec.engine.miss_prob = v;
      } else if (key == "init") {
        if (value == "proposed")
          spec.engine.init = InitMode::proposed;
        else if (value == "broadcast")
          spec.engine.init = InitMode::broadcast;
        else if (value == "ideal")
          spec.engine.init = InitMode::ideal;
        else
          at.fail("unknown init mode '" + value + "'");
      } else if (key == "tx_mode") {
        if (value == "three")
          spec.engine.tx_mode = TxMode::three;
        else if (value == "two")
          spec.engine.tx_mode = TxMode::two;
        else
          at.fail("unknown tx_mode '" + value + "'");
      } else if (key == "alpha") {
        double v = parse_real(value, at);
        if (!(v > 0.0 && v < 1.0)) at.fail("alpha must lie in (0, 1)");
        spec.engine.alpha = v;
      } else {
        at.fail("unknown key '" + key + "' in [algorithm " + spec.label + "]");
      }
    }
  }

  ParsePos end{name, lineno};
  // bumps: all three lists or none, equal lengths
  if (saw_bump_amp || saw_bump_ctr || saw_bump_sig) {
    if (!(saw_bump_amp && saw_bump_ctr && saw_bump_sig))
      end.fail("bump_amplitudes, bump_centers and bump_sigmas must appear together");
    if (bump_amp.size() != bump_ctr.size() || bump_amp.size() != bump_sig.size())
      end.fail("bump lists must have equal lengths");
    if (bump_amp.empty()) end.fail("bump lists must be non-empty");
    for (std::size_t i = 0; i < bump_amp.size(); ++i)
      cfg.bumps.push_back(
          {bump_amp[i], bump_ctr[i].first, bump_ctr[i].second, bump_sig[i]});
  } else {
    cfg.bumps = {{1.0, 0.25, 0.25, 0.15}, {-1.0, 0.75, 0.75, 0.15}};
  }

  // a section without an explicit type takes its label as the type
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    if (!section_has_type[i]) {
      AlgorithmSpec& spec = cfg.algorithms[i];
      if (spec.label == "rg")
        spec.engine.algorithm = Algorithm::rg;
      else if (spec.label == "gge")
        spec.engine.algorithm = Algorithm::gge;
      else if (spec.label == "geographic")
        spec.engine.algorithm = Algorithm::geographic;
      else
        end.fail("algorithm '" + spec.label + "' needs an explicit type");
    }
  }
  if (cfg.algorithms.empty()) {
    AlgorithmSpec spec;
    spec.label = "gge";
    spec.engine.algorithm = Algorithm::gge;
    cfg.algorithms.push_back(spec);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "topology = " << (cfg.topology == TopologyKind::rgg ? "rgg" : "grid") << "\n";
  if (cfg.n > 0) os << "n = " << cfg.n << "\n";
  if (cfg.side > 0) os << "side = " << cfg.side << "\n";
  os << "graphs = " << cfg.graphs << "\n";
  os << "redraw_limit = " << cfg.redraw_limit << "\n";
  os << "field = " << field_name(cfg.field) << "\n";
  if (cfg.field == FieldKind::gaussian_bumps) {
    auto join = [&](auto get) {
      std::string s;
      for (std::size_t i = 0; i < cfg.bumps.size(); ++i) {
        if (i) s += ",";
        s += get(cfg.bumps[i]);
      }
      return s;
    };
    os << "bump_amplitudes = "
       << join([](const GaussianBump& b) { return fmt17(b.amplitude); }) << "\n";
    os << "bump_centers = "
       << join([](const GaussianBump& b) {
            return fmt17(b.cx) + ":" + fmt17(b.cy);
          })
       << "\n";
    os << "bump_sigmas = "
       << join([](const GaussianBump& b) { return fmt17(b.sigma); }) << "\n";
  }
  os << "budget = " << cfg.budget << "\n";
  os << "runs = " << cfg.runs << "\n";
  os << "epsilon = " << fmt17(cfg.epsilon) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out = " << cfg.out << "\n";
  os << "bucket = " << cfg.bucket << "\n";
  os << "record = " << cfg.record << "\n";
  auto join_ints = [&os](const char* key, const std::vector<int>& v) {
    if (v.empty()) return;
    os << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "\n";
  };
  join_ints("n_list", cfg.n_list);
  join_ints("side_list", cfg.side_list);
  if (!cfg.p_list.empty()) {
    os << "p_list = ";
    for (std::size_t i = 0; i < cfg.p_list.size(); ++i)
      os << (i ? "," : "") << fmt17(cfg.p_list[i]);
    os << "\n";
  }
  os << "restarts = " << cfg.restarts << "\n";
  os << "iters = " << cfg.iters << "\n";
  os << "tave_runs = " << cfg.tave_runs << "\n";
  os << "tave_cap = " << cfg.tave_cap << "\n";
  for (const auto& spec : cfg.algorithms) {
    os << "\n[algorithm " << spec.label << "]\n";
    os << "type = " << algorithm_name(spec.engine.algorithm) << "\n";
    os << "hops = " << spec.engine.hops << "\n";
    os << "miss_prob = " << fmt17(spec.engine.miss_prob) << "\n";
    os << "init = " << init_name(spec.engine.init) << "\n";
    os << "tx_mode = " << tx_name(spec.engine.tx_mode) << "\n";
    os << "alpha = " << fmt17(spec.engine.alpha) << "\n";
  }
  return os.str();
}

std::uint64_t graph_seed(std::uint64_t base, int graph_id) {
  return mix_seed(mix_seed(base, hash_label("graph")),
                  static_cast<std::uint64_t>(graph_id));
}

std::uint64_t field_seed(std::uint64_t base, int graph_id) {
  return mix_seed(mix_seed(base, hash_label("field")),
                  static_cast<std::uint64_t>(graph_id));
}

std::uint64_t derive_seed(std::uint64_t base, int graph_id, int run_id,
                          std::string_view algorithm) {
  return mix_seed(
      mix_seed(mix_seed(mix_seed(base, hash_label("run")),
                        static_cast<std::uint64_t>(graph_id)),
               static_cast<std::uint64_t>(run_id)),
      hash_label(algorithm));
}

namespace {

struct RealizedGraphs {
  std::vector<Graph> graphs;
  std::vector<std::vector<double>> fields;
  std::vector<bool> flat;  // constant initial field
};

RealizedGraphs realize(const ExperimentConfig& cfg) {
  if (cfg.topology == TopologyKind::rgg) {
    if (cfg.n < 2) throw ConfigError("topology=rgg requires n");
  } else {
    if (cfg.side < 2) throw ConfigError("topology=grid requires side");
  }
  RealizedGraphs out;
  for (int gid = 0; gid < cfg.graphs; ++gid) {
    Graph g = cfg.topology == TopologyKind::rgg
                  ? generate_rgg(cfg.n, graph_seed(cfg.seed, gid), cfg.redraw_limit)
                  : generate_grid(cfg.side);
    FieldSpec fs;
    fs.kind = cfg.field;
    fs.bumps = cfg.bumps;
    fs.seed = field_seed(cfg.seed, gid);
    std::vector<double> x0 = synthesize(fs, g);
    double mean = 0.0;
    for (double v : x0) mean += v;
    mean /= x0.size();
    double e0 = 0.0;
    for (double v : x0) e0 += (v - mean) * (v - mean);
    out.flat.push_back(e0 == 0.0);
    out.graphs.push_back(std::move(g));
    out.fields.push_back(std::move(x0));
  }
  return out;
}

// run_experiment with the seed stream labels decoupled from the row labels
// (cmd_stale pairs every miss probability with the same base stream)
RunResult run_paired(const ExperimentConfig& cfg,
                     const std::vector<std::string>& seed_labels) {
  if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");
  if (seed_labels.size() != cfg.algorithms.size())
    throw std::logic_error("run_paired: label mismatch");

  RealizedGraphs rg = realize(cfg);
  RunResult res;
  for (const Graph& g : rg.graphs) res.redraws.push_back(g.redraws);

  const long long nbuckets = cfg.budget / cfg.bucket;
  const int na = static_cast<int>(cfg.algorithms.size());

  // canonical order: algorithm label, then graph, then run
  std::vector<int> order(na);
  for (int i = 0; i < na; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return cfg.algorithms[a].label < cfg.algorithms[b].label;
  });

  std::vector<double> bucket_vals(nbuckets);
  for (int oi = 0; oi < na; ++oi) {
    const int ai = order[oi];
    const AlgorithmSpec& spec = cfg.algorithms[ai];
    std::vector<KahanSum> sum(nbuckets), sumsq(nbuckets);
    for (int gid = 0; gid < cfg.graphs; ++gid) {
      const Graph& g = rg.graphs[gid];
      const std::vector<double>& x0 = rg.fields[gid];
      const double init_val = rg.flat[gid] ? 0.0 : 1.0;
      for (int rid = 0; rid < cfg.runs; ++rid) {
        Trace tr = run_trial(g, x0, spec.engine, cfg.budget,
                             derive_seed(cfg.seed, gid, rid, seed_labels[ai]));
        const auto& rows = tr.rows;
        // value at bucket edge b*bucket = last row at or before the edge
        std::vector<char> keep(rows.size(), 0);
        std::size_t ri = 0;
        double cur = init_val;
        long long last_kept = -1;
        for (long long b = 1; b <= nbuckets; ++b) {
          const long long edge = b * cfg.bucket;
          while (ri < rows.size() && rows[ri].tx <= edge) {
            cur = rows[ri].rel_err;
            ++ri;
          }
          bucket_vals[b - 1] = cur;
          sum[b - 1].add(cur);
          sumsq[b - 1].add(cur * cur);
          if (ri > 0 && static_cast<long long>(ri) - 1 != last_kept) {
            keep[ri - 1] = 1;
            last_kept = static_cast<long long>(ri) - 1;
          }
        }
        if (!rows.empty()) keep[rows.size() - 1] = 1;
        const bool all = cfg.record == "all";
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (!all && !keep[i]) continue;
          res.rows.push_back(
              {spec.label, gid, rid, rows[i].k, rows[i].tx, rows[i].rel_err});
        }
      }
    }
    const int count = cfg.graphs * cfg.runs;
    for (long long b = 1; b <= nbuckets; ++b) {
      double mean = sum[b - 1].value() / count;
      double se = 0.0;
      if (count > 1) {
        double var = (sumsq[b - 1].value() - count * mean * mean) / (count - 1);
        se = std::sqrt(std::max(var, 0.0) / count);
      }
      res.aggregates.push_back({spec.label, b * cfg.bucket, mean, se, count});
    }
  }
  return res;
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << content;
}

std::filesystem::path prepare_out(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string run_meta(const char* command, const ExperimentConfig& cfg,
                     const std::vector<int>& redraws) {
  std::ostringstream os;
  os << "command=" << command << "\n";
  os << "bucket=" << cfg.bucket << "\n";
  os << "graphs=" << cfg.graphs << "\n";
  for (std::size_t gid = 0; gid < redraws.size(); ++gid)
    os << "graph_" << gid << "_redraws=" << redraws[gid] << "\n";
  return os.str();
}

void write_run_outputs(const char* command, const ExperimentConfig& cfg,
                       const RunResult& res) {
  auto dir = prepare_out(cfg);
  {
    std::ofstream os(dir / "rows.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write rows.csv");
    write_rows_csv(res.rows, os);
  }
  {
    std::ofstream os(dir / "aggregate.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write aggregate.csv");
    write_aggregates_csv(res.aggregates, os);
  }
  write_text_file(dir / "meta.txt", run_meta(command, cfg, res.redraws));
  write_text_file(dir / "config.txt", serialize_config(cfg));
  std::cout << "wrote " << (dir / "rows.csv").string() << "\n";
  std::cout << "wrote " << (dir / "aggregate.csv").string() << "\n";
}

EngineConfig gge_template(const ExperimentConfig& cfg) {
  for (const auto& spec : cfg.algorithms)
    if (spec.engine.algorithm == Algorithm::gge) return spec.engine;
  EngineConfig e;
  e.algorithm = Algorithm::gge;
  return e;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> labels;
  for (const auto& spec : cfg.algorithms) labels.push_back(spec.label);
  return run_paired(cfg, labels);
}

void write_rows_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "algorithm,graph_id,run_id,k,tx,rel_err\n";
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.graph_id << ',' << r.run_id << ',' << r.k << ','
       << r.tx << ',' << fmt17(r.rel_err) << '\n';
  }
}

void write_aggregates_csv(const std::vector<AggregateRow>& rows, std::ostream& os) {
  os << "algorithm,tx_bucket,mean_rel_err,stderr\n";
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.tx_bucket << ',' << fmt17(r.mean_rel_err) << ','
       << fmt17(r.stderr_) << '\n';
  }
}

int cmd_topology(const ExperimentConfig& cfg) {
  RealizedGraphs rg = realize(cfg);
  auto dir = prepare_out(cfg);
  std::ostringstream meta;
  meta << "command=topology\n";
  meta << "graphs=" << cfg.graphs << "\n";
  for (int gid = 0; gid < cfg.graphs; ++gid) {
    char name[64];
    std::snprintf(name, sizeof(name), "graph_%03d.edges", gid);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error(std::string("cannot write ") + name);
    write_edge_list(rg.graphs[gid], os);
    meta << "graph_" << gid << "_n=" << rg.graphs[gid].n << "\n";
    meta << "graph_" << gid << "_edges=" << rg.graphs[gid].edge_count() << "\n";
    meta << "graph_" << gid << "_redraws=" << rg.graphs[gid].redraws << "\n";
    std::cout << "wrote " << (dir / name).string() << "\n";
  }
  write_text_file(dir / "meta.txt", meta.str());
  write_text_file(dir / "config.txt", serialize_config(cfg));
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  RunResult res = run_experiment(cfg);
  write_run_outputs("run", cfg, res);
  return 0;
}

int cmd_bounds(const ExperimentConfig& cfg) {
  RealizedGraphs rg = realize(cfg);
  auto dir = prepare_out(cfg);
  std::ostringstream csv, blocks;
  csv << "graph_id,n,lambda2,max_contraction,max_contraction_lower,"
         "tave_bound_gge,tave_bound_rg,epsilon,restarts,total_iters,best_objective\n";
  for (int gid = 0; gid < cfg.graphs; ++gid) {
    BoundsReport r = compute_bounds(
        rg.graphs[gid], cfg.epsilon, cfg.restarts, cfg.iters, AscentSchedule{},
        mix_seed(mix_seed(cfg.seed, hash_label("bounds")),
                 static_cast<std::uint64_t>(gid)));
    csv << gid << ',' << r.n << ',' << fmt17(r.lambda2) << ','
        << fmt17(r.max_contraction) << ',' << fmt17(r.max_contraction_lower) << ','
        << fmt17(r.tave_bound_gge) << ',' << fmt17(r.tave_bound_rg) << ','
        << fmt17(r.epsilon) << ',' << r.restarts << ',' << r.iters << ','
        << fmt17(r.best_objective) << '\n';
    blocks << "graph_id=" << gid << "\n" << serialize_bounds(r) << "\n";
  }
  write_text_file(dir / "bounds.csv", csv.str());
  write_text_file(dir / "bounds.txt", blocks.str());
  std::ostringstream meta;
  meta << "command=bounds\ngraphs=" << cfg.graphs << "\n";
  for (int gid = 0; gid < cfg.graphs; ++gid)
    meta << "graph_" << gid << "_redraws=" << rg.graphs[gid].redraws << "\n";
  write_text_file(dir / "meta.txt", meta.str());
  write_text_file(dir / "config.txt", serialize_config(cfg));
  std::cout << "wrote " << (dir / "bounds.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const bool is_rgg = cfg.topology == TopologyKind::rgg;
  const std::vector<int>& sizes = is_rgg ? cfg.n_list : cfg.side_list;
  if (sizes.empty())
    throw ConfigError(is_rgg ? "sweep over topology=rgg requires n_list"
                             : "sweep over topology=grid requires side_list");

  auto dir = prepare_out(cfg);
  std::ostringstream csv;
  csv << "topology,n,graphs,a_min,a_mean,a_max,tave_min,tave_mean,tave_max,"
         "tave_per_node_mean,tave_xstar_mean,reference\n";

  const EngineConfig engine = [] {
    EngineConfig e;
    e.algorithm = Algorithm::gge;
    e.init = InitMode::ideal;
    return e;
  }();

  for (int size : sizes) {
    const int graphs = is_rgg ? cfg.graphs : 1;
    double a_min = 1.0, a_max = -1.0;
    KahanSum a_sum, t_sum, tx_sum;
    long long t_min = 0, t_max = 0;
    bool first = true;
    for (int gid = 0; gid < graphs; ++gid) {
      std::uint64_t gseed = mix_seed(
          mix_seed(mix_seed(cfg.seed, hash_label("sweep")), size), gid);
      Graph g = is_rgg ? generate_rgg(size, mix_seed(gseed, hash_label("graph")),
                                      cfg.redraw_limit)
                       : generate_grid(size);
      ContractionEstimate ce = estimate_max_contraction(
          g, cfg.restarts, cfg.iters, AscentSchedule{},
          mix_seed(gseed, hash_label("amax")));
      FieldSpec fs;
      fs.kind = cfg.field;
      fs.bumps = cfg.bumps;
      fs.seed = mix_seed(gseed, hash_label("field"));
      std::vector<double> x0 = synthesize(fs, g);
      AveragingTime at = estimate_averaging_time(
          g, engine, x0, cfg.epsilon, cfg.tave_runs,
          mix_seed(gseed, hash_label("tave")), cfg.tave_cap);
      if (!at.converged)
        throw std::runtime_error("sweep: averaging time did not converge within cap");
      AveragingTime atx = estimate_averaging_time(
          g, engine, ce.argmax, cfg.epsilon, cfg.tave_runs,
          mix_seed(gseed, hash_label("tave_xstar")), cfg.tave_cap);
      if (!atx.converged)
        throw std::runtime_error("sweep: averaging time did not converge within cap");

      a_min = std::min(a_min, ce.value);
      a_max = std::max(a_max, ce.value);
      a_sum.add(ce.value);
      if (first || at.iterations < t_min) t_min = at.iterations;
      if (first || at.iterations > t_max) t_max = at.iterations;
      t_sum.add(static_cast<double>(at.iterations));
      tx_sum.add(static_cast<double>(atx.iterations));
      first = false;
    }
    const int n = is_rgg ? size : size * size;
    const double reference =
        is_rgg ? 1.5 * n / std::log(static_cast<double>(n)) : 2.5 * n;
    csv << (is_rgg ? "rgg" : "grid") << ',' << n << ',' << graphs << ','
        << fmt17(a_min) << ',' << fmt17(a_sum.value() / graphs) << ','
        << fmt17(a_max) << ',' << t_min << ','
        << fmt17(t_sum.value() / graphs) << ',' << t_max << ','
        << fmt17(t_sum.value() / graphs / n) << ','
        << fmt17(tx_sum.value() / graphs) << ',' << fmt17(reference) << '\n';
  }
  write_text_file(dir / "sweep.csv", csv.str());
  write_text_file(dir / "meta.txt", std::string("command=sweep\n"));
  write_text_file(dir / "config.txt", serialize_config(cfg));
  std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_stale(const ExperimentConfig& cfg) {
  std::vector<double> ps = cfg.p_list;
  if (ps.empty()) ps = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

  ExperimentConfig work = cfg;
  work.algorithms.clear();
  std::vector<std::string> seed_labels;
  const EngineConfig base = gge_template(cfg);
  for (double p : ps) {
    char pbuf[32];
    std::snprintf(pbuf, sizeof(pbuf), "%g", p);
    AlgorithmSpec spec;
    spec.label = std::string("gge_p") + pbuf;
    spec.engine = base;
    spec.engine.miss_prob = p;
    work.algorithms.push_back(spec);
    seed_labels.push_back("gge");  // identical streams: paired across p
  }
  {
    AlgorithmSpec spec;
    spec.label = "rg";
    spec.engine.algorithm = Algorithm::rg;
    work.algorithms.push_back(spec);
    seed_labels.push_back("rg");
  }
  RunResult res = run_paired(work, seed_labels);
  write_run_outputs("stale", work, res);
  return 0;
}

int cmd_multihop(const ExperimentConfig& cfg) {
  ExperimentConfig work = cfg;
  work.algorithms.clear();
  const EngineConfig base = gge_template(cfg);
  for (int hops = 1; hops <= 3; ++hops) {
    AlgorithmSpec spec;
    spec.label = "gge" + std::to_string(hops) + "hop";
    spec.engine = base;
    spec.engine.hops = hops;
    work.algorithms.push_back(spec);
  }
  {
    AlgorithmSpec spec;
    spec.label = "rg";
    spec.engine.algorithm = Algorithm::rg;
    work.algorithms.push_back(spec);
  }
  {
    AlgorithmSpec spec;
    spec.label = "geographic";
    spec.engine.algorithm = Algorithm::geographic;
    work.algorithms.push_back(spec);
  }
  RunResult res = run_experiment(work);
  write_run_outputs("multihop", work, res);
  return 0;
}

}  // namespace gge
