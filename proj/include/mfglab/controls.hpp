#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfglab/action.hpp"
#include "mfglab/cloud.hpp"
#include "mfglab/grid.hpp"

namespace mfglab {

// Discretized relaxed control: one finitely supported probability measure on
// the action set per grid step (steps [t_k, t_{k+1}), k = 0..N-1). A strict
// control is the one-atom-per-step special case.
struct RelaxedControlPath {
  struct StepMeasure {
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
  };

  TimeGrid grid;
  int action_dim = 0;
  std::vector<StepMeasure> steps;  // size grid.steps

  bool strict() const {
    for (const auto& s : steps)
      if (s.atoms.size() != 1) return false;
    return true;
  }

  int total_atoms() const {
    int n = 0;
    for (const auto& s : steps) n += static_cast<int>(s.atoms.size());
    return n;
  }

  // int_0^T int |a|^q q_t(da) dt
  double action_moment(double q) const;

  void validate(const ActionSet* actions = nullptr) const;

  // Exact re-representation on a grid refined by `factor`.
  RelaxedControlPath refine(int factor) const;

  static RelaxedControlPath strict_constant(TimeGrid grid, std::vector<double> action);
  static RelaxedControlPath strict_from_actions(TimeGrid grid,
                                                const std::vector<std::vector<double>>& per_step);
};

// Feedback policy on observables (t, own state, current cloud). Output is
// clamped into the action set. Evaluators must be pure.
struct FeedbackPolicy {
  std::string descriptor;
  ActionSet actions;
  std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> eval;

  void operator()(double t, std::span<const double> x, const CloudView& cloud,
                  std::span<double> out) const {
    eval(t, x, cloud, out);
    actions.clamp(out);
  }

  static FeedbackPolicy constant(const ActionSet& as, std::vector<double> a);
  // sign_eta(w0 + wt*t + wx*x[0] + wm*mean(cloud)) * e1, with sign dead band eta
  // realizing the sign(0) = 0 convention numerically.
  static FeedbackPolicy sign_threshold(const ActionSet& as, double w0, double wt, double wx,
                                       double wm, double eta = 0.0);
  // lookup over a (t, x[0]) grid, nearest node
  static FeedbackPolicy table(const ActionSet& as, TimeGrid grid, double x_lo, double x_hi,
                              int x_cells, std::vector<std::vector<double>> values);
  static FeedbackPolicy parametric(
      const ActionSet& as, std::string descriptor,
      std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> fn);
};

inline double sign_eta(double v, double eta) {
  if (v > eta) return 1.0;
  if (v < -eta) return -1.0;
  return 0.0;
}

// One entry per player: either a feedback policy or a relaxed-control sampler
// keyed by (player index, seed).
struct StrategyProfile {
  struct Entry {
    std::optional<FeedbackPolicy> policy;
    std::function<RelaxedControlPath(int, std::uint64_t)> sampler;
  };
  std::vector<Entry> players;

  int size() const { return static_cast<int>(players.size()); }

  static StrategyProfile homogeneous(const FeedbackPolicy& policy, int n) {
    StrategyProfile p;
    p.players.assign(n, Entry{policy, nullptr});
    return p;
  }
};

// Chattering approximation: refine the grid by `refinement` and draw one atom
// per substep, stratified within each original step so empirical frequencies
// match the weights to within 1/refinement. Deterministic given seed.
RelaxedControlPath chattering(const RelaxedControlPath& q, int refinement, std::uint64_t seed);

// Push atoms through the radial truncation iota_k (identity inside radius k,
// rescale to radius k outside); weights unchanged.
RelaxedControlPath truncate_actions(const RelaxedControlPath& q, double k);

// Materialize a feedback policy along a realized trajectory into a strict
// control; left-endpoint evaluation.
RelaxedControlPath policy_to_control(const FeedbackPolicy& policy, const PathSample& own_path,
                                     const MeasureFlow& flow);

}  // namespace mfglab
