#include "mfglab/model.hpp"

#include <cmath>

#include "doctest.h"

using namespace mfglab;

TEST_SUITE("model") {

TEST_CASE("example33 bundle evaluates the paper data") {
  auto b = scenario_example33(1.0);
  CHECK(b.horizon == 2.0);
  CHECK(b.p == 2.0);
  CHECK(b.p_prime == 3.0);
  CHECK(b.p_sigma == 0.0);

  ParticleCloud cloud(1, 3);
  cloud.point(0)[0] = 1.0;
  cloud.point(1)[0] = 2.0;
  cloud.point(2)[0] = 3.0;
  std::vector<double> x{2.0}, a{0.3}, out{0.0};
  CloudView view(cloud);
  b.drift(0.5, x, view, a, out);
  CHECK(out[0] == doctest::Approx(0.3));
  CHECK(b.terminal_reward(x, view) == doctest::Approx(4.0));  // x * cloud mean = 2 * 2
  CHECK(b.running_reward(0.5, x, view, a) == 0.0);
}

TEST_CASE("example33 g is linear in x and in the cloud mean") {
  auto b = scenario_example33(1.0);
  rng_stream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ParticleCloud cloud(1, 4);
    for (int i = 0; i < 4; ++i) cloud.point(i)[0] = rng.uniform(-2.0, 2.0);
    CloudView view(cloud);
    const double x1 = rng.uniform(-2.0, 2.0);
    const double x2 = rng.uniform(-2.0, 2.0);
    std::vector<double> vx1{x1}, vx2{x2}, vsum{x1 + x2};
    CHECK(b.terminal_reward(vsum, view) ==
          doctest::Approx(b.terminal_reward(vx1, view) + b.terminal_reward(vx2, view))
              .epsilon(1e-12));
    // linearity in the cloud: shifting every particle shifts g by x * shift
    ParticleCloud shifted = cloud;
    for (int i = 0; i < 4; ++i) shifted.point(i)[0] += 1.5;
    CloudView sview(shifted);
    CHECK(b.terminal_reward(vx1, sview) ==
          doctest::Approx(b.terminal_reward(vx1, view) + x1 * 1.5).epsilon(1e-9));
  }
}

TEST_CASE("example33 passes validation, any sigma") {
  for (double sigma : {0.0, 1.0, 2.5}) {
    auto b = scenario_example33(sigma);
    auto rep = validate_coefficients(b, ProbeSettings{300, 2.0, 99});
    CHECK(rep.pass());
    CHECK(rep.lipschitz_pass);
    CHECK(rep.coercivity_pass);
  }
}

TEST_CASE("validation is deterministic given the seed") {
  auto b = scenario_example33(1.0);
  auto r1 = validate_coefficients(b, ProbeSettings{200, 2.0, 7});
  auto r2 = validate_coefficients(b, ProbeSettings{200, 2.0, 7});
  CHECK(r1.lipschitz_estimate == r2.lipschitz_estimate);
  CHECK(r1.coercivity_margin == r2.coercivity_margin);
  CHECK(r1.bound_estimate == r2.bound_estimate);
}

TEST_CASE("quadratic drift fails the Lipschitz probe with a witness") {
  auto b = scenario_example33(1.0);
  b.drift = [](double, std::span<const double> x, const CloudView&, std::span<const double>,
               std::span<double> out) { out[0] = x[0] * x[0]; };
  auto rep = validate_coefficients(b, ProbeSettings{400, 2.0, 3});
  CHECK_FALSE(rep.lipschitz_pass);
  CHECK(rep.lipschitz_estimate_2r > 1.5 * rep.lipschitz_estimate);
  CHECK_FALSE(rep.witnesses.empty());
}

TEST_CASE("coercive running reward has margin >= 1") {
  auto b = scenario_example33(1.0);
  b.running_reward = [pp = b.p_prime](double, std::span<const double>, const CloudView&,
                                      std::span<const double> a) {
    return -std::pow(std::abs(a[0]), pp);
  };
  auto rep = validate_coefficients(b, ProbeSettings{300, 2.0, 17});
  CHECK(rep.coercivity_pass);
  CHECK(rep.coercivity_margin >= 1.0);
}

TEST_CASE("non-finite coefficient produces a failing report with witness") {
  auto b = scenario_example33(1.0);
  b.drift = [](double, std::span<const double> x, const CloudView&, std::span<const double>,
               std::span<double> out) { out[0] = x[0] > 0.0 ? std::nan("") : 0.0; };
  auto rep = validate_coefficients(b, ProbeSettings{100, 2.0, 13});
  CHECK_FALSE(rep.finite_pass);
  CHECK_FALSE(rep.pass());
  CHECK_FALSE(rep.witnesses.empty());
}

TEST_CASE("verdict is monotone in the weakening direction") {
  auto b = scenario_example33(1.0);
  auto rep = validate_coefficients(b, ProbeSettings{200, 2.0, 21});
  const double c1 = rep.lipschitz_estimate + rep.growth_estimate + 1.0;
  const double c2 = rep.bound_estimate + 1.0;
  const double c3 = rep.coercivity_margin * 0.5;
  REQUIRE(rep.passes_with(c1, c2, c3));
  CHECK(rep.passes_with(c1 * 2.0, c2, c3));
  CHECK(rep.passes_with(c1, c2 * 2.0, c3));
  CHECK(rep.passes_with(c1, c2, c3 * 0.5));
  CHECK_FALSE(rep.passes_with(rep.lipschitz_estimate * 0.01, c2, c3));
}

TEST_CASE("exponent feasibility enforced") {
  auto b = scenario_example33(1.0);
  b.p_prime = 1.5;  // violates p' > p = 2
  CHECK_THROWS(b.check_exponents());
  b.p_prime = 3.0;
  b.p_sigma = 2.5;  // violates p_sigma <= 2
  CHECK_THROWS(b.check_exponents());
}

TEST_CASE("no-control scenario builds a singleton game") {
  auto b = scenario_no_control(
      [](double, std::span<const double> x, const CloudView&, std::span<double> out) {
        out[0] = -x[0];
      },
      [](double, std::span<const double>, const CloudView&, std::span<double> out) {
        out[0] = 1.0;
      },
      1, 1, 1.0, [](rng_stream&, std::span<double> out) { out[0] = 0.0; });
  CHECK(b.actions.is_singleton());
  std::vector<double> x{2.0}, a{0.0}, out{0.0};
  ParticleCloud cloud(1, 1);
  CloudView view(cloud);
  b.drift(0.0, x, view, a, out);
  CHECK(out[0] == doctest::Approx(-2.0));
  CHECK(b.running_reward(0.0, x, view, a) == 0.0);
  CHECK(b.terminal_reward(x, view) == 0.0);
}

}  // TEST_SUITE
