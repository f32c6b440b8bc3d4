#pragma once

#include <functional>

#include "mfglab/mfg.hpp"

namespace mfglab {

struct RateRow {
  long n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double r_squared = 0.0;
};

// Unweighted least squares on (log n, log estimate).
void fit_loglog(RateTable& table);

// Lemma "removal of one player" rate: couples simulate_nplayer with
// simulate_k_modified (k = player 0) on identical noise and estimates
//   E[ ell^{p'}_{X,p'}(mu_hat^{-k}, mu_hat) + ||X^k - Y^{-k,k}||_T^{p'} ].
// The ell term is evaluated through the standard removal coupling (the same
// coupling the estimate's proof uses); it upper-bounds the exact OT value and
// carries the O(1/n) rate.
RateTable run_chaos_rate(const CoefficientBundle& bundle,
                         const std::function<StrategyProfile(int)>& profile_family,
                         const std::vector<int>& n_list, const MonteCarloSettings& mc);

// Trajectorial propagation of chaos: players' controls sampled i.i.d. from
// the solution per branch, the n-player system coupled on shared noise with
// representative agents driven by the branch flow; estimates
//   E[ ell^{p'}_{X,p'}(mu_hat, reference sample) + ||X^0 - Y^0||_T^{p'} ]
// with a branch-matched independent reference sample of size n.
RateTable run_pathwise_propagation(const CoefficientBundle& bundle,
                                   const MFGSolutionSample& solution,
                                   const std::vector<int>& n_list, const MonteCarloSettings& mc);

struct LimitStats {
  RateTable table;                       // ell_{X,p}(mu_hat, branch reference) vs n
  std::vector<double> branch_frequency;  // per branch, over replications (largest n)
  std::vector<double> terminal_means;    // per replication empirical terminal means (largest n)
};

// Distance of the empirical path measure of the profile family to an
// equal-size branch-matched sample of the solution; branches classified by
// the sign of the empirical terminal mean.
LimitStats run_limit_experiment(const CoefficientBundle& bundle,
                                const std::function<StrategyProfile(int)>& equilibria,
                                const MFGSolutionSample& solution, const std::vector<int>& n_list,
                                const MonteCarloSettings& mc);

}  // namespace mfglab
