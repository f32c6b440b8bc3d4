#pragma once

#include <vector>

#include "mfglab/controls.hpp"
#include "mfglab/grid.hpp"
#include "mfglab/model.hpp"

namespace mfglab {

// Realized driving noise for one n-player run: common Brownian path, n
// idiosyncratic paths, n initial states. Streams are derived by counter-based
// splitting, so the bundle is a pure function of (bundle dims, n, steps, seed).
struct NoiseBundle {
  TimeGrid grid;
  int n = 0;
  int idio_dim = 0;
  int common_dim = 0;
  PathSample common;               // (N+1) x m0
  std::vector<PathSample> idio;    // n paths, (N+1) x m
  std::vector<std::vector<double>> initials;  // n x d
  std::uint64_t seed = 0;
};

NoiseBundle sample_noise(const CoefficientBundle& bundle, int n, int steps, std::uint64_t seed);

struct ParticleTrajectories {
  std::vector<PathSample> states;            // n paths in R^d
  std::vector<RelaxedControlPath> controls;  // realized controls (strict for policy players)
  MeasureFlow flow;                          // empirical state flow, own state included
};

// Coupled n-player system, explicit Euler-Maruyama with left-endpoint
// coefficients; the relaxed drift is the exact finite-atom average of b.
ParticleTrajectories simulate_nplayer(const CoefficientBundle& bundle,
                                      const StrategyProfile& profile, const NoiseBundle& noise);

struct KModifiedTrajectories {
  std::vector<PathSample> states;            // Y^{-k,i} for all i (including i = k)
  std::vector<RelaxedControlPath> controls;
  MeasureFlow reduced_flow;                  // cloud of the n-1 states excluding player k
};

// Same scheme, but every coefficient sees the cloud of the n-1 states
// excluding player k. Pass the same NoiseBundle as the unmodified run for
// coupling experiments.
KModifiedTrajectories simulate_k_modified(const CoefficientBundle& bundle,
                                          const StrategyProfile& profile, int k,
                                          const NoiseBundle& noise);

// Open-loop variant driven by fixed realized controls (the same control
// processes as the unmodified run), the coupling used in the removal
// estimates.
KModifiedTrajectories simulate_k_modified(const CoefficientBundle& bundle,
                                          const std::vector<RelaxedControlPath>& controls, int k,
                                          const NoiseBundle& noise);

struct SingleAgentRun {
  PathSample state;
  RelaxedControlPath control;
};

// One representative agent against a frozen measure flow.
SingleAgentRun simulate_vs_flow(const CoefficientBundle& bundle, const RelaxedControlPath& control,
                                const MeasureFlow& flow, const PathSample& idio,
                                const PathSample& common, std::span<const double> initial);

SingleAgentRun simulate_vs_flow(const CoefficientBundle& bundle, const FeedbackPolicy& policy,
                                const MeasureFlow& flow, const PathSample& idio,
                                const PathSample& common, std::span<const double> initial);

// Blow-up guard: any state coordinate beyond this aborts with the offending
// step and player.
inline constexpr double blowup_threshold = 1e12;

}  // namespace mfglab
