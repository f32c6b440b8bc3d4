#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfglab/measures.hpp"
#include "mfglab/particle.hpp"

namespace mfglab {

struct ValueEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long replications = 0;
};

struct MonteCarloSettings {
  long replications = 1000;
  int steps = 200;
  std::uint64_t seed = 0;
  // replications used for path-measure distance columns (heavier than value
  // estimation); 0 means min(replications, 200)
  long distance_replications = 0;

  long distance_reps() const {
    return distance_replications > 0 ? distance_replications
                                     : std::min<long>(replications, 200);
  }
};

// Gamma(mu, q, x) = int int f(t, x_t, mu_t, a) q_t(da) dt + g(x_T, mu_T),
// left-endpoint quadrature.
double objective_gamma(const CoefficientBundle& bundle, const MeasureFlow& flow,
                       const RelaxedControlPath& q, const PathSample& x);

// Same, over pre-built per-step views. Warm the mean caches first when the
// views are shared across threads.
double objective_gamma(const CoefficientBundle& bundle, std::span<const CloudView> views,
                       const RelaxedControlPath& q, const PathSample& x);

// Views of a flow with means precomputed; safe for concurrent reads.
std::vector<CloudView> warmed_views(const MeasureFlow& flow);

// J_i = E[Gamma(flow, Lambda^i, X^i)] by Monte Carlo over simulate_nplayer.
ValueEstimate estimate_value(const CoefficientBundle& bundle, const StrategyProfile& profile,
                             int player, const MonteCarloSettings& mc);

// Policy classes for best-response search -------------------------------

struct PolicyClass {
  enum class Kind {
    constants,     // grid of constant policies over the action set
    switch_sign,   // scalar actions: constant before tau, constant or
                   // sign(cloud mean) after tau
    flow_sign,     // singleton: constant sign_eta(mean of flow at T); frozen
                   // flow contexts only
    pointwise,     // singleton: pointwise argmax of f (requires g = 0, f
                   // x-free); frozen-flow contexts only
    explicit_list  // user-provided candidates
  };

  Kind kind = Kind::constants;
  int grid_points_per_dim = 5;        // constants
  std::vector<double> switch_times;   // switch_sign
  double sign_eta = 0.1;              // dead band realizing sign(0) = 0
  std::vector<FeedbackPolicy> candidates;  // explicit_list
  std::string descriptor() const;
};

struct SearchSettings {
  enum class Method { grid, cross_entropy };
  Method method = Method::grid;
  long budget = 64;  // max candidates evaluated
  std::uint64_t seed = 0;
};

// Candidates for a class; `flow` is required for flow_sign/pointwise kinds.
std::vector<FeedbackPolicy> enumerate_candidates(const PolicyClass& cls,
                                                 const CoefficientBundle& bundle,
                                                 const MeasureFlow* flow,
                                                 const SearchSettings& search);

struct BestResponseResult {
  FeedbackPolicy policy;
  ValueEstimate value;
  int candidate_index = 0;
};

// Search the class with common random numbers (same noise across candidates).
// Returns the best candidate found: a lower bound on the supremum. Ties are
// kept by enumeration order (a strictly-better-by-tolerance rule so float
// noise cannot override ties).
BestResponseResult best_response(const CoefficientBundle& bundle, const StrategyProfile& profile,
                                 int player, const PolicyClass& cls, const SearchSettings& search,
                                 const MonteCarloSettings& mc);

// Single-agent variant against a frozen flow (the n = 1 machinery used by the
// MFG solver).
BestResponseResult best_response_vs_flow(const CoefficientBundle& bundle, const MeasureFlow& flow,
                                         const PolicyClass& cls, const SearchSettings& search,
                                         const MonteCarloSettings& mc);

struct NashGapReport {
  std::vector<int> players;
  std::vector<double> gap;       // max(0, raw)
  std::vector<double> raw;       // paired estimate, retained
  std::vector<double> stderr_;   // stderr of the paired difference
  std::vector<FeedbackPolicy> best_responses;
  std::string policy_class;
};

// eps_i = best-response value - on-profile value, per player, with paired
// noise. Gaps are class-relative: the true eps is at least the reported value
// minus search slack; no upper bound on the supremum is claimed.
NashGapReport nash_gap(const CoefficientBundle& bundle, const StrategyProfile& profile,
                       const PolicyClass& cls, const SearchSettings& search,
                       const MonteCarloSettings& mc,
                       const std::vector<int>* players = nullptr);

struct ConverseReport {
  long n = 0;
  double epsilon = 0.0;
  double epsilon_stderr = 0.0;
  double distance_to_solution = 0.0;  // ell_{X,p} of mu_hat to a reference sample
  double value_mean = 0.0;
};

class MFGSolutionSample;  // mfg module

// Build the n-player profile whose player-i control is an i.i.d. sample of
// the solution's control (conditionally on the branch), estimate eps_n via a
// player-0 nash gap (exchangeable profile), and measure the distance of the
// realized empirical path measure to a branch-matched reference sample.
std::pair<StrategyProfile, ConverseReport> converse_equilibrium(
    const CoefficientBundle& bundle, const MFGSolutionSample& solution, int n,
    const PolicyClass& cls, const SearchSettings& search, const MonteCarloSettings& mc);

}  // namespace mfglab
