#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfglab/action.hpp"
#include "mfglab/cloud.hpp"

namespace mfglab {

// Game data: coefficients (b, sigma, sigma0, f, g), action set, exponents
// (p, p', p_sigma), horizon, initial sampler, dimensions (d, m, m0).
//
// Coefficient callables must be pure; measure arguments are finite
// equal-weight particle clouds.
struct CoefficientBundle {
  int state_dim = 1;   // d
  int idio_dim = 1;    // m
  int common_dim = 0;  // m0 (0 = no common noise)
  double horizon = 1.0;
  double p = 2.0, p_prime = 3.0, p_sigma = 0.0;
  ActionSet actions;

  // b(t, x, mu, a) -> R^d
  std::function<void(double, std::span<const double>, const CloudView&, std::span<const double>,
                     std::span<double>)>
      drift;
  // sigma(t, x, mu) -> R^{d x m}, row-major
  std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> sigma;
  // sigma0(t, x, mu) -> R^{d x m0}, row-major
  std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> sigma0;
  // f(t, x, mu, a) -> R
  std::function<double(double, std::span<const double>, const CloudView&, std::span<const double>)>
      running_reward;
  // g(x, mu) -> R
  std::function<double(std::span<const double>, const CloudView&)> terminal_reward;
  // initial state sampler with law lambda
  std::function<void(rng_stream&, std::span<double>)> initial_sampler;

  std::string name = "custom";

  // Exponent feasibility (A.2): p' > p >= max(1, p_sigma), p' >= 2 >= p_sigma >= 0.
  void check_exponents() const {
    if (!(p_prime > p && p >= 1.0 && p >= p_sigma && p_prime >= 2.0 && p_sigma >= 0.0 &&
          p_sigma <= 2.0))
      throw std::invalid_argument("CoefficientBundle: exponents violate p' > p >= max(1,p_sigma), p' >= 2 >= p_sigma >= 0");
  }
};

struct ProbeSettings {
  long samples = 200;
  double radius = 2.0;
  std::uint64_t seed = 0;
};

struct ProbeWitness {
  std::string condition;
  double t = 0.0;
  std::vector<double> x, y, a;
  double value = 0.0;
};

// Randomized evidence for/against Assumption A. Estimates are the largest
// sampled constants; failure verdicts carry a witness point. Evidence, not
// proof: coefficients are opaque callables.
struct ValidationReport {
  double lipschitz_estimate = 0.0;     // max ratio for (A.4) at probe radius
  double lipschitz_estimate_2r = 0.0;  // same at doubled radius
  double growth_estimate = 0.0;        // max implied c1 from the growth bounds
  double growth_estimate_2r = 0.0;
  long growth_violations = 0;
  double bound_estimate = 0.0;      // max implied c2 from |g| and f upper bound
  double coercivity_margin = 0.0;   // smallest implied c3 candidate
  long samples = 0;
  bool finite_pass = true;
  bool lipschitz_pass = true;
  bool growth_pass = true;
  bool coercivity_pass = true;
  std::vector<ProbeWitness> witnesses;

  bool pass() const { return finite_pass && lipschitz_pass && growth_pass && coercivity_pass; }

  // Verdict for user-supplied constants; monotone in the weakening direction
  // (c1, c2 larger / c3 smaller never flips pass into fail).
  bool passes_with(double c1, double c2, double c3) const {
    return finite_pass && lipschitz_estimate <= c1 && growth_estimate <= c1 &&
           bound_estimate <= c2 && coercivity_margin >= c3;
  }
};

ValidationReport validate_coefficients(const CoefficientBundle& bundle, const ProbeSettings& probe);

// Scenario builders.

// Horizon T = 2, lambda = delta_0, A = [-1,1], b = a, sigma constant,
// sigma0 = 0, f = 0, g(x, nu) = x * mean(nu); exponents (2, 3, 0).
CoefficientBundle scenario_example33(double sigma = 1.0);

// Singleton action set: the game degenerates to weakly interacting diffusions.
CoefficientBundle scenario_no_control(
    std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> drift,
    std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> sigma,
    int state_dim, int idio_dim, double horizon,
    std::function<void(rng_stream&, std::span<double>)> initial_sampler);

// b = a + mean(mu), sigma constant, f = g = 0, A = [-1,1]; exponents (2, 3, 0).
CoefficientBundle scenario_mean_coupled(double sigma = 0.5);

// Action-free dynamics with f = -|a - a*|^2; used for best-response checks.
CoefficientBundle scenario_decoupled_quadratic(double a_star, double sigma = 1.0);

// Example-3.3 dynamics with f = g = 0.
CoefficientBundle scenario_zero_objective(double sigma = 1.0);

}  // namespace mfglab
