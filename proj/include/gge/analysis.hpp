#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gge/engine.hpp"
#include "gge/topology.hpp"

namespace gge {

// ||x - xbar|| / ||x0 - xbar|| with xbar the mean of x0; 0 for constant x0
double relative_error(const std::vector<double>& x, const std::vector<double>& x0);

// Incremental subgradient of the consensus objective for the pair (s, t):
// g_s = x_s - x_t, g_t = -(x_s - x_t), zero elsewhere. Requires t in N_s.
std::vector<double> subgradient(const Graph& g, const std::vector<double>& x,
                                int s, int t);

// sum_i max_{j in N_i} (x_i - x_j)^2 / 2
double gge_cost(const std::vector<double>& x, const Graph& g);

// Expected squared-error bound for randomized gossip: e0^2 * lambda2^k
double rg_mse_bound(double lam2, long long k, double e0);

// Per-iteration greedy gain: how much one greedy step is expected to beat the
// randomized-gossip contraction at iteration i, estimated by Monte Carlo over
// activation sequences (ideal caches, no misses):
//   gain_i = E[sum_s max_t (x_s - x_t)^2 - sum_s |N_s|^{-1} sum_t (x_s - x_t)^2]
//            / (2 n E[||x(i-1) - xbar||^2]),
// both expectations over the first i-1 greedy steps. Nonnegative by
// construction; zero when the trajectory has reached consensus or every
// node's neighbor gaps are constant.
struct GainEstimate {
  long long index = 0;
  double gain = 0.0;
  double stderr_ = 0.0;  // delta-method error of the ratio of means
  int trials = 0;
};
GainEstimate estimate_greedy_gain(const Graph& g, const std::vector<double>& x0,
                                  long long i, int trials, std::uint64_t seed);

// Squared-error upper bounds by iteration, index 0..kmax:
//   rg[k]  = e0^2 lambda2^k
//   gge[k] = e0^2 prod_{i<=k} max(lambda2 - gain_i, 0)
// gain[] holds the per-iteration estimates (gain[0] unused).
struct MseBoundCurves {
  std::vector<double> gge;
  std::vector<double> rg;
  std::vector<double> gain;
};
MseBoundCurves mse_bound_curves(const Graph& g, const std::vector<double>& x0,
                                int kmax, int trials, std::uint64_t seed);

// Expected one-step squared-error contraction of a greedy exchange at x,
// averaged over the uniform initiator:
//   1 - sum_s max_t (x_s - x_t)^2 / (2 n ||x - xbar||^2)
// Invariant under shifting and scaling of x; rejects constant x.
double contraction_factor(const std::vector<double>& x, const Graph& g);

struct AscentSchedule {
  double coarse = 0.1;  // step size for the first half of each restart
  double fine = 0.01;   // step size for the second half
};

struct ContractionEstimate {
  double value = 0.0;
  std::vector<double> argmax;  // zero-mean unit-norm witness
  int restarts = 0;
  long long iters = 0;  // total ascent iterations across restarts
};

// Worst-case contraction max_x contraction_factor(x, g) over zero-mean
// unit-norm x, by projected incremental subgradient ascent: pick a random
// component, step its subgradient, re-project (subtract mean, renormalize).
// Restart 0 starts from the second eigenvector of the expected gossip matrix
// (an analytic witness for the degree lower bound); the rest start random.
// Returns the best objective seen over all restarts and iterates, so the
// value is monotone in the restart count for a fixed seed.
ContractionEstimate estimate_max_contraction(const Graph& g, int restarts, int iters,
                                             AscentSchedule sched, std::uint64_t seed);

// 1 - d_max (1 - lambda2): degree-based lower bound on the worst-case
// contraction (can be negative; it is vacuous there)
double max_contraction_lower_bound(const Graph& g);

// Iterations until the relative error stays below epsilon with probability
// at least 1 - epsilon: 3 log(1/eps) / log(1/contraction). contraction <= 0
// means one expected step already suffices; returns 0 there.
double averaging_time_bound(double contraction, double epsilon);

struct AveragingTime {
  long long iterations = 0;
  bool converged = false;
  long long cap = 0;
};

// Empirical averaging time: smallest k such that the fraction of trials with
// rel_err >= epsilon is at most epsilon at k and stays there through 2k.
// cap = 0 picks 2000 n + 10000. Requires runs * epsilon >= 1.
AveragingTime estimate_averaging_time(const Graph& g, const EngineConfig& cfg,
                                      const std::vector<double>& x0, double epsilon,
                                      int runs, std::uint64_t seed, long long cap = 0);

struct BoundsReport {
  int n = 0;
  double lambda2 = 0.0;
  double max_contraction = 0.0;
  double max_contraction_lower = 0.0;
  double tave_bound_gge = 0.0;
  double tave_bound_rg = 0.0;
  double epsilon = 0.0;
  int restarts = 0;
  long long iters = 0;
  double best_objective = 0.0;
};
BoundsReport compute_bounds(const Graph& g, double epsilon, int restarts, int iters,
                            AscentSchedule sched, std::uint64_t seed);
std::string serialize_bounds(const BoundsReport& r);  // flat key=value block

// Kahan-compensated accumulator for Monte Carlo reductions
class KahanSum {
 public:
  void add(double v) {
    double y = v - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace gge
