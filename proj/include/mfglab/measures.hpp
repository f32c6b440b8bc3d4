#pragma once

#include <vector>

#include "mfglab/cloud.hpp"
#include "mfglab/controls.hpp"
#include "mfglab/grid.hpp"

namespace mfglab {

// Exact solvers ---------------------------------------------------------

// Exact assignment problem (square dense cost matrix), shortest augmenting
// paths, O(n^3). Instances above `assignment_budget` are rejected.
inline constexpr int assignment_budget = 4096;

// returns minimal total cost; `cost` is n x n row-major
double solve_assignment(const std::vector<double>& cost, int n);

// Exact optimal transport between two finitely supported measures with equal
// total mass (successive shortest augmenting paths on the bipartite graph).
// Intended for small instances; atom budget enforced by callers.
double solve_transport(const std::vector<double>& cost, const std::vector<double>& supply,
                       const std::vector<double>& demand);

// Distances -------------------------------------------------------------

// p-Wasserstein between equal-weight clouds. Equal counts: assignment (sorted
// matching in d = 1); unequal counts: exact transport, capped at 64 total atoms.
double wasserstein_clouds(double p, const ParticleCloud& a, const ParticleCloud& b);
double wasserstein_clouds(double p, const CloudView& a, const CloudView& b);

// Quantile-matching fast path for scalar samples of equal length. Requires
// sorted input; unsorted input is detected and sorted on a copy (O(n log n)).
double wasserstein_1d(double p, const std::vector<double>& a, const std::vector<double>& b);

// max_{grid points s <= t} |x_s - y_s|
double truncated_sup_distance(const PathSample& x, const PathSample& y, double t);

enum class ControlDistanceMode { exact, diagonal };

// Metric d_V on discretized relaxed controls,
//   d_V^p(q, q') = T * OT_cost(q/T, q'/T)  with ground cost |t-t'|^p + |a-a'|^p.
// diagonal mode keeps the time marginals matched (per-step W_p), an upper
// bound on the exact value and exact for grid-aligned Dirac controls.
// Grids may differ if one refines the other.
double control_distance(double p, const RelaxedControlPath& q1, const RelaxedControlPath& q2,
                        ControlDistanceMode mode = ControlDistanceMode::diagonal);

// Path-space metric d_X((w,q,x),(w',q',x')) = ||w-w'||_T + d_V(q,q') + ||x-x'||_T.
struct PathTriple {
  PathSample noise;  // R^m
  RelaxedControlPath control;
  PathSample state;  // R^d
};

double triple_distance(double p, const PathTriple& a, const PathTriple& b,
                       ControlDistanceMode mode = ControlDistanceMode::diagonal);

// Equal-weight empirical measure on path triples.
struct EmpiricalPathMeasure {
  std::vector<PathTriple> triples;

  void validate() const;
};

// Exact p-Wasserstein between empirical path measures under d_X (assignment
// problem; equal counts required).
double path_measure_distance(double p, const EmpiricalPathMeasure& mu1,
                             const EmpiricalPathMeasure& mu2,
                             ControlDistanceMode mode = ControlDistanceMode::diagonal);

}  // namespace mfglab
