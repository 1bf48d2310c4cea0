#include "gge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gge {

namespace {

double mean_of(const std::vector<double>& x) {
  KahanSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

double centered_sq_norm(const std::vector<double>& x, double xbar) {
  KahanSum s;
  for (double v : x) s.add((v - xbar) * (v - xbar));
  return s.value();
}

// sum_s max_t (x_s - x_t)^2 and sum_s |N_s|^{-1} sum_t (x_s - x_t)^2
struct GapSums {
  double max_sum = 0.0;
  double avg_sum = 0.0;
};

GapSums gap_sums(const std::vector<double>& x, const Graph& g) {
  GapSums out;
  KahanSum maxs, avgs;
  for (int s = 0; s < g.n; ++s) {
    double best = 0.0;
    double acc = 0.0;
    for (int t : g.neighbors[s]) {
      double d = x[s] - x[t];
      double d2 = d * d;
      if (d2 > best) best = d2;
      acc += d2;
    }
    maxs.add(best);
    avgs.add(acc / g.degree(s));
  }
  out.max_sum = maxs.value();
  out.avg_sum = avgs.value();
  return out;
}

double max_gap_sum(const std::vector<double>& x, const Graph& g) {
  KahanSum maxs;
  for (int s = 0; s < g.n; ++s) {
    double best = 0.0;
    for (int t : g.neighbors[s]) {
      double d = x[s] - x[t];
      if (d * d > best) best = d * d;
    }
    maxs.add(best);
  }
  return maxs.value();
}

EngineConfig ideal_engine() {
  // the bound machinery is defined for plain greedy gossip: clairvoyant
  // caches, reliable broadcasts, one hop
  EngineConfig cfg;
  cfg.algorithm = Algorithm::gge;
  cfg.hops = 1;
  cfg.miss_prob = 0.0;
  cfg.init = InitMode::ideal;
  cfg.tx_mode = TxMode::three;
  cfg.alpha = 0.5;
  return cfg;
}

}  // namespace

double relative_error(const std::vector<double>& x, const std::vector<double>& x0) {
  if (x.size() != x0.size() || x.empty())
    throw std::invalid_argument("relative_error: size mismatch");
  double xbar = mean_of(x0);
  double e0 = centered_sq_norm(x0, xbar);
  if (e0 == 0.0) return 0.0;
  return std::sqrt(centered_sq_norm(x, xbar) / e0);
}

std::vector<double> subgradient(const Graph& g, const std::vector<double>& x,
                                int s, int t) {
  if (static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("subgradient: size mismatch");
  if (s < 0 || s >= g.n || t < 0 || t >= g.n)
    throw std::invalid_argument("subgradient: node out of range");
  if (g.neighbor_index(s, t) < 0)
    throw std::invalid_argument("subgradient: nodes are not neighbors");
  std::vector<double> out(g.n, 0.0);
  double d = x[s] - x[t];
  out[s] = d;
  out[t] = -d;
  return out;
}

double gge_cost(const std::vector<double>& x, const Graph& g) {
  if (static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("gge_cost: size mismatch");
  return 0.5 * max_gap_sum(x, g);
}

double rg_mse_bound(double lam2, long long k, double e0) {
  if (k < 0) throw std::invalid_argument("rg_mse_bound: negative k");
  if (e0 < 0.0) throw std::invalid_argument("rg_mse_bound: negative e0");
  return e0 * e0 * std::pow(lam2, static_cast<double>(k));
}

GainEstimate estimate_greedy_gain(const Graph& g, const std::vector<double>& x0,
                                  long long i, int trials, std::uint64_t seed) {
  if (i < 1) throw std::invalid_argument("estimate_greedy_gain: i must be >= 1");
  if (trials < 1) throw std::invalid_argument("estimate_greedy_gain: trials must be >= 1");
  const EngineConfig cfg = ideal_engine();
  const double xbar = mean_of(x0);

  KahanSum num_sum, den_sum, nn, dd, nd;
  for (int trial = 0; trial < trials; ++trial) {
    GossipState st = init_state(g, x0, cfg, mix_seed(seed, trial));
    for (long long k = 1; k < i; ++k) step_gge(g, st, cfg);
    GapSums gs = gap_sums(st.x, g);
    double num = gs.max_sum - gs.avg_sum;
    double den = centered_sq_norm(st.x, xbar);
    num_sum.add(num);
    den_sum.add(den);
    nn.add(num * num);
    dd.add(den * den);
    nd.add(num * den);
  }

  const double t = trials;
  const double nbar = num_sum.value() / t;
  const double dbar = den_sum.value() / t;
  GainEstimate out;
  out.index = i;
  out.trials = trials;
  if (dbar == 0.0) return out;  // consensus trajectory: no gain, no noise
  const double c = 2.0 * g.n;
  out.gain = nbar / (c * dbar);
  if (trials > 1) {
    // delta method for the ratio of means
    double snn = (nn.value() - t * nbar * nbar) / (t - 1.0);
    double sdd = (dd.value() - t * dbar * dbar) / (t - 1.0);
    double snd = (nd.value() - t * nbar * dbar) / (t - 1.0);
    double da = 1.0 / (c * dbar);
    double db = -nbar / (c * dbar * dbar);
    double var = (da * da * snn + db * db * sdd + 2.0 * da * db * snd) / t;
    out.stderr_ = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

MseBoundCurves mse_bound_curves(const Graph& g, const std::vector<double>& x0,
                                int kmax, int trials, std::uint64_t seed) {
  if (kmax < 0) throw std::invalid_argument("mse_bound_curves: negative kmax");
  if (trials < 1) throw std::invalid_argument("mse_bound_curves: trials must be >= 1");
  const EngineConfig cfg = ideal_engine();
  const double xbar = mean_of(x0);
  const double e0sq = centered_sq_norm(x0, xbar);
  const double lam2 = lambda2(expected_gossip_matrix(g));

  std::vector<KahanSum> num(kmax + 1), den(kmax + 1);
  for (int trial = 0; trial < trials; ++trial) {
    GossipState st = init_state(g, x0, cfg, mix_seed(seed, trial));
    for (int k = 1; k <= kmax; ++k) {
      GapSums gs = gap_sums(st.x, g);
      num[k].add(gs.max_sum - gs.avg_sum);
      den[k].add(centered_sq_norm(st.x, xbar));
      step_gge(g, st, cfg);
    }
  }

  MseBoundCurves out;
  out.gge.assign(kmax + 1, e0sq);
  out.rg.assign(kmax + 1, e0sq);
  out.gain.assign(kmax + 1, 0.0);
  const double c = 2.0 * g.n;
  for (int k = 1; k <= kmax; ++k) {
    double dbar = den[k].value() / trials;
    double gain = (dbar == 0.0) ? 0.0 : (num[k].value() / trials) / (c * dbar);
    out.gain[k] = gain;
    out.rg[k] = out.rg[k - 1] * lam2;
    out.gge[k] = out.gge[k - 1] * std::max(lam2 - gain, 0.0);
  }
  return out;
}

double contraction_factor(const std::vector<double>& x, const Graph& g) {
  if (static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("contraction_factor: size mismatch");
  double xbar = mean_of(x);
  double m = centered_sq_norm(x, xbar);
  if (m == 0.0)
    throw std::invalid_argument("contraction_factor: constant input");
  return 1.0 - max_gap_sum(x, g) / (2.0 * g.n * m);
}

ContractionEstimate estimate_max_contraction(const Graph& g, int restarts, int iters,
                                             AscentSchedule sched, std::uint64_t seed) {
  if (restarts < 1 || iters < 1)
    throw std::invalid_argument("estimate_max_contraction: bad budget");
  if (g.n < 2)
    throw std::invalid_argument("estimate_max_contraction: need n >= 2");
  if (!(sched.coarse > 0.0) || !(sched.fine > 0.0))
    throw std::invalid_argument("estimate_max_contraction: bad schedule");

  const int n = g.n;
  auto [lam2_unused, v2] = second_eigenpair(expected_gossip_matrix(g));
  (void)lam2_unused;

  auto project = [n](std::vector<double>& x) -> bool {
    double mean = mean_of(x);
    double norm2 = 0.0;
    for (double& v : x) {
      v -= mean;
      norm2 += v * v;
    }
    if (norm2 <= 0.0) return false;
    double inv = 1.0 / std::sqrt(norm2);
    for (double& v : x) v *= inv;
    return true;
  };

  ContractionEstimate best;
  best.restarts = restarts;
  best.iters = static_cast<long long>(restarts) * iters;
  best.value = -std::numeric_limits<double>::infinity();

  std::vector<double> x(n);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    if (r == 0) {
      x = v2;
    } else {
      for (double& v : x) v = rng.normal();
    }
    if (!project(x)) {
      for (double& v : x) v = rng.normal();
      project(x);
    }
    for (int it = 0; it < iters; ++it) {
      // objective at the current iterate (scale/shift invariant, and x is
      // projected, so the centered norm is 1)
      double val = 1.0 - max_gap_sum(x, g) / (2.0 * n);
      if (val > best.value) {
        best.value = val;
        best.argmax = x;
      }
      // incremental subgradient descent on sum_s max_t (x_s - x_t)^2
      int s = rng.pick(n);
      const auto& nb = g.neighbors[s];
      int tstar = nb[0];
      double bd = std::abs(x[s] - x[nb[0]]);
      for (int a = 1; a < static_cast<int>(nb.size()); ++a) {
        double d = std::abs(x[s] - x[nb[a]]);
        if (d > bd) {
          bd = d;
          tstar = nb[a];
        }
      }
      double step_size = (it * 2 < iters) ? sched.coarse : sched.fine;
      double grad = 2.0 * (x[s] - x[tstar]);
      x[s] -= step_size * grad;
      x[tstar] += step_size * grad;
      if (!project(x)) {
        for (double& v : x) v = rng.normal();
        project(x);
      }
    }
  }
  return best;
}

double max_contraction_lower_bound(const Graph& g) {
  double lam = lambda2(expected_gossip_matrix(g));
  return 1.0 - max_degree(g) * (1.0 - lam);
}

double averaging_time_bound(double contraction, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("averaging_time_bound: epsilon must lie in (0, 1)");
  if (contraction >= 1.0)
    throw std::invalid_argument("averaging_time_bound: contraction must be < 1");
  if (contraction <= 0.0) return 0.0;
  return 3.0 * std::log(1.0 / epsilon) / std::log(1.0 / contraction);
}

AveragingTime estimate_averaging_time(const Graph& g, const EngineConfig& cfg,
                                      const std::vector<double>& x0, double epsilon,
                                      int runs, std::uint64_t seed, long long cap) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("estimate_averaging_time: epsilon must lie in (0, 1)");
  if (runs < 1 || runs * epsilon < 1.0)
    throw std::invalid_argument("estimate_averaging_time: need runs * epsilon >= 1");
  if (!is_connected(g))
    throw std::invalid_argument("estimate_averaging_time: graph must be connected");
  if (cap <= 0) cap = 2000LL * g.n + 10000;

  AveragingTime out;
  out.cap = cap;

  const double xbar = mean_of(x0);
  const double e0sq = centered_sq_norm(x0, xbar);
  if (e0sq == 0.0) {
    // constant input: zero error at every iteration
    out.iterations = 0;
    out.converged = true;
    return out;
  }
  const double thresh_sq = epsilon * epsilon * e0sq;
  const long long never = std::numeric_limits<long long>::max();

  // first iteration at which each run's error drops below epsilon; errors are
  // monotone under pairwise averaging, so one crossing decides the whole run
  std::vector<long long> crossing(runs, never);
  for (int run = 0; run < runs; ++run) {
    GossipState st = init_state(g, x0, cfg, mix_seed(seed, run));
    double mse = e0sq;
    if (mse < thresh_sq) {
      crossing[run] = 0;
      continue;
    }
    const double drop = 2.0 * cfg.alpha * (1.0 - cfg.alpha);
    for (long long k = 1; k <= cap; ++k) {
      StepReport rep = step(g, st, cfg);
      mse -= drop * rep.gap * rep.gap;
      if ((k & 63) == 0) {
        KahanSum s;
        for (double v : st.x) s.add((v - xbar) * (v - xbar));
        mse = s.value();
      }
      if (mse < 0.0) mse = 0.0;
      if (mse < thresh_sq) {
        crossing[run] = k;
        break;
      }
    }
  }

  std::sort(crossing.begin(), crossing.end());
  const long long allowed = static_cast<long long>(std::floor(epsilon * runs));
  // fraction(k) <= epsilon iff at most `allowed` runs are still above at k
  long long t = crossing[runs - 1 - allowed];
  if (t == never) return out;  // some required run never crossed within cap
  auto fraction_bad = [&](long long k) {
    auto it = std::upper_bound(crossing.begin(), crossing.end(), k);
    long long crossed = it - crossing.begin();
    return static_cast<double>(runs - crossed) / runs;
  };
  for (long long k = t; k <= 2 * t; ++k)
    if (fraction_bad(k) > epsilon) return out;  // stability guard failed
  out.iterations = t;
  out.converged = true;
  return out;
}

BoundsReport compute_bounds(const Graph& g, double epsilon, int restarts, int iters,
                            AscentSchedule sched, std::uint64_t seed) {
  BoundsReport r;
  r.n = g.n;
  r.epsilon = epsilon;
  r.lambda2 = lambda2(expected_gossip_matrix(g));
  ContractionEstimate est = estimate_max_contraction(g, restarts, iters, sched, seed);
  r.max_contraction = est.value;
  r.max_contraction_lower = max_contraction_lower_bound(g);
  r.tave_bound_gge = averaging_time_bound(r.max_contraction, epsilon);
  r.tave_bound_rg = averaging_time_bound(r.lambda2, epsilon);
  r.restarts = est.restarts;
  r.iters = est.iters;
  r.best_objective = est.value;
  return r;
}

std::string serialize_bounds(const BoundsReport& r) {
  char buf[512];
  std::string out;
  auto kv = [&out, &buf](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.17g\n", key, v);
    out += buf;
  };
  out += "n=" + std::to_string(r.n) + "\n";
  kv("lambda2", r.lambda2);
  kv("max_contraction", r.max_contraction);
  kv("max_contraction_lower", r.max_contraction_lower);
  kv("tave_bound_gge", r.tave_bound_gge);
  kv("tave_bound_rg", r.tave_bound_rg);
  kv("epsilon", r.epsilon);
  out += "restarts=" + std::to_string(r.restarts) + "\n";
  out += "iters=" + std::to_string(r.iters) + "\n";
  kv("best_objective", r.best_objective);
  return out;
}

}  // namespace gge
