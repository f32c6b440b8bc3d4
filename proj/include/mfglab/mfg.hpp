#pragma once

#include "mfglab/game.hpp"

namespace mfglab {

// MFG solution sample: a strong solution is a single branch (deterministic
// flow + policy); a weak solution is a finite mixture of branches with an
// explicit branch sampler.
class MFGSolutionSample {
 public:
  struct Branch {
    double label = 0.0;        // e.g. gamma in {-1, +1}
    double probability = 1.0;
    MeasureFlow flow;
    RelaxedControlPath control_template;
    FeedbackPolicy policy;
  };

  static MFGSolutionSample strong(Branch b) {
    MFGSolutionSample s;
    b.probability = 1.0;
    s.branches_.push_back(std::move(b));
    return s;
  }

  static MFGSolutionSample mixture(std::vector<Branch> branches);

  bool is_strong() const { return branches_.size() == 1; }
  const std::vector<Branch>& branches() const { return branches_; }

  // Deterministic given seed; branch frequencies follow the branch law.
  const Branch& sample_branch(std::uint64_t seed) const;

 private:
  std::vector<Branch> branches_;
};

// max over grid times of W_p between the law of M simulated representative
// agents under the policy and the flow cloud.
double consistency_residual(const CoefficientBundle& bundle, const MeasureFlow& flow,
                            const FeedbackPolicy& policy, const MonteCarloSettings& mc);

struct FixedPointTrace {
  std::vector<double> residual_history;
  double damping = 0.5;
  int iterations = 0;
  bool converged = false;
};

struct SolveSettings {
  int max_iterations = 25;
  double damping = 0.5;       // fraction of the cloud replaced each iteration
  double tolerance = 0.05;
  MonteCarloSettings mc;      // mc.replications = particle count M
};

// Damped Picard iteration on the consistency condition: best response against
// the frozen flow, re-simulate M agents, mix (1-damping) old / damping new
// clouds, stop when the residual drops below tolerance. Non-convergence is
// reported through the trace, not an exception.
std::pair<MFGSolutionSample, FixedPointTrace> solve_strong_mfg(const CoefficientBundle& bundle,
                                                               const MeasureFlow& init_flow,
                                                               const PolicyClass& cls,
                                                               const SearchSettings& search,
                                                               const SolveSettings& settings);

// a*(t, cloud) = argmax_a f(t, cloud, a) for bundles with g = 0 and f
// independent of own state (both probed). Cached per grid node when
// materialized against a flow.
FeedbackPolicy pointwise_optimal_policy(const CoefficientBundle& bundle, long budget = 64);

// Closed forms for the T = 2 example -------------------------------------

// The three strong solutions: mean paths +t, 0, -t with constant policies
// +1, 0, -1; clouds are Gaussian quantile stencils (Dirac when sigma = 0).
std::vector<std::pair<MeasureFlow, FeedbackPolicy>> example33_strong_solutions(
    double sigma = 1.0, int steps = 200, int particles = 10000);

struct Example33WeakBranch {
  double gamma = 0.0;                   // branch label, +-1
  RelaxedControlPath control_template;  // 0 on [0,1], gamma on (1,2]
  MeasureFlow flow;                     // mean (t-1) 1_{(1,2]}(t) * gamma
};

// Draw gamma = +-1 with probability 1/2 each (deterministic given seed) and
// return that branch.
Example33WeakBranch example33_weak_solution(std::uint64_t seed, double sigma = 1.0,
                                            int steps = 200, int particles = 10000);

// Both branches packaged as a two-branch mixture solution sample.
MFGSolutionSample example33_weak_solution_sample(double sigma = 1.0, int steps = 200,
                                                 int particles = 10000);

// sign policy alpha*_t = sign(E[mean_T | info at t]) with sign(0) = 0.
FeedbackPolicy example33_optimal_policy(const ActionSet& actions,
                                        std::function<double(double)> conditional_mean_T);

// Deterministic Gaussian cloud: quantile stencil, exactly mirrored so the
// sample mean is the target mean.
ParticleCloud gaussian_stencil_cloud(double mean, double stddev, int particles);

}  // namespace mfglab
