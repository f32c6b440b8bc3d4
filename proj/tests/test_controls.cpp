#include "mfglab/controls.hpp"

#include <cmath>

#include "doctest.h"
#include "mfglab/measures.hpp"

using namespace mfglab;

namespace {

RelaxedControlPath uniform_pm1(TimeGrid grid) {
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = 1;
  q.steps.assign(grid.steps,
                 RelaxedControlPath::StepMeasure{{{-1.0}, {1.0}}, {0.5, 0.5}});
  return q;
}

RelaxedControlPath random_relaxed(rng_stream& rng, TimeGrid grid) {
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = 1;
  q.steps.resize(grid.steps);
  for (auto& step : q.steps) {
    const int atoms = 2 + static_cast<int>(rng.uniform_index(3));
    double total = 0.0;
    for (int j = 0; j < atoms; ++j) {
      step.atoms.push_back({rng.uniform(-1.0, 1.0)});
      const double w = rng.uniform(0.1, 1.0);
      step.weights.push_back(w);
      total += w;
    }
    for (double& w : step.weights) w /= total;
  }
  return q;
}

}  // namespace

TEST_SUITE("controls") {

TEST_CASE("chattering keeps strict controls strict and identical") {
  TimeGrid grid{2.0, 10};
  auto q = RelaxedControlPath::strict_constant(grid, {0.7});
  auto c = chattering(q, 5, 123);
  CHECK(c.strict());
  CHECK(c.grid.steps == 50);
  for (const auto& step : c.steps) CHECK(step.atoms[0][0] == doctest::Approx(0.7));
}

TEST_CASE("chattering output is strict with matched frequencies") {
  TimeGrid grid{2.0, 4};
  auto q = uniform_pm1(grid);
  auto c = chattering(q, 1000, 9);
  CHECK(c.strict());
  // per original step, mean of chattered atoms within [-0.1, 0.1]
  for (int k = 0; k < grid.steps; ++k) {
    double mean = 0.0;
    for (int s = 0; s < 1000; ++s) mean += c.steps[static_cast<std::size_t>(k) * 1000 + s].atoms[0][0];
    mean /= 1000.0;
    CHECK(std::abs(mean) <= 0.1);
  }
}

TEST_CASE("chattering preserves first moments in expectation over seeds") {
  TimeGrid grid{1.0, 3};
  rng_stream rng(77);
  auto q = random_relaxed(rng, grid);
  std::vector<double> target(grid.steps, 0.0);
  for (int k = 0; k < grid.steps; ++k)
    for (std::size_t j = 0; j < q.steps[k].atoms.size(); ++j)
      target[k] += q.steps[k].weights[j] * q.steps[k].atoms[j][0];

  const int seeds = 200, refinement = 16;
  std::vector<double> mean(grid.steps, 0.0), var(grid.steps, 0.0);
  std::vector<std::vector<double>> samples(grid.steps);
  for (int s = 0; s < seeds; ++s) {
    auto c = chattering(q, refinement, 1000 + s);
    for (int k = 0; k < grid.steps; ++k) {
      double m = 0.0;
      for (int sub = 0; sub < refinement; ++sub)
        m += c.steps[static_cast<std::size_t>(k) * refinement + sub].atoms[0][0];
      samples[k].push_back(m / refinement);
    }
  }
  for (int k = 0; k < grid.steps; ++k) {
    double m = 0.0;
    for (double v : samples[k]) m += v;
    m /= seeds;
    double ss = 0.0;
    for (double v : samples[k]) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (seeds - 1) / seeds);
    CHECK(std::abs(m - target[k]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("control distance to the chattered control shrinks with refinement") {
  rng_stream rng(31);
  TimeGrid grid{1.0, 4};
  double avg10 = 0.0, avg100 = 0.0, avg1000 = 0.0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    auto q = random_relaxed(rng, grid);
    const std::uint64_t seed = 500 + trial;
    avg10 += control_distance(2.0, q, chattering(q, 10, seed));
    avg100 += control_distance(2.0, q, chattering(q, 100, seed));
    avg1000 += control_distance(2.0, q, chattering(q, 1000, seed));
  }
  CHECK(avg100 <= avg10);
  CHECK(avg1000 <= avg100);
}

TEST_CASE("truncation") {
  TimeGrid grid{1.0, 2};
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = 1;
  q.steps.assign(2, RelaxedControlPath::StepMeasure{{{0.3}, {2.0}}, {0.4, 0.6}});
  auto t = truncate_actions(q, 1.0);
  CHECK(t.steps[0].atoms[0][0] == doctest::Approx(0.3));   // inside: unchanged
  CHECK(t.steps[0].atoms[1][0] == doctest::Approx(1.0));   // radius 2k -> radius k
  CHECK(t.steps[0].weights[0] == doctest::Approx(0.4));
  // truncated tail moment never increases, any r
  for (double r : {0.1, 0.5, 1.5}) {
    auto tail = [&](const RelaxedControlPath& c) {
      double s = 0.0;
      for (const auto& step : c.steps)
        for (std::size_t j = 0; j < step.atoms.size(); ++j)
          if (std::abs(step.atoms[j][0]) > r)
            s += step.weights[j] * std::pow(std::abs(step.atoms[j][0]), 3.0);
      return s;
    };
    CHECK(tail(t) <= tail(q) + 1e-12);
  }
}

TEST_CASE("policy_to_control is strict and matches lookups") {
  TimeGrid grid{2.0, 8};
  const ActionSet as = ActionSet::interval(-1.0, 1.0);
  MeasureFlow flow(grid, 1);
  for (int k = 0; k < grid.points(); ++k) {
    flow.clouds[k] = ParticleCloud(1, 2);
    flow.clouds[k].point(0)[0] = grid.time(k);
    flow.clouds[k].point(1)[0] = grid.time(k);
  }
  PathSample own(grid, 1);
  for (int k = 0; k < grid.points(); ++k) own.at(k)[0] = -0.25 * grid.time(k);

  auto constant = FeedbackPolicy::constant(as, {0.5});
  auto qc = policy_to_control(constant, own, flow);
  CHECK(qc.strict());
  for (const auto& step : qc.steps) {
    CHECK(step.atoms.size() == 1);
    CHECK(step.weights[0] == 1.0);
    CHECK(step.atoms[0][0] == doctest::Approx(0.5));
  }

  // example-3.3 optimal policy on the gamma = +1 weak branch: 0 then +1
  auto branch_policy = FeedbackPolicy::parametric(
      as, "weak_branch",
      [](double t, std::span<const double>, const CloudView&, std::span<double> out) {
        out[0] = t > 1.0 ? 1.0 : 0.0;
      });
  auto qb = policy_to_control(branch_policy, own, flow);
  for (int k = 0; k < grid.steps; ++k)
    CHECK(qb.steps[k].atoms[0][0] == doctest::Approx(grid.time(k) > 1.0 ? 1.0 : 0.0));

  // policies clamp into the action set
  auto wild = FeedbackPolicy::parametric(
      as, "wild", [](double, std::span<const double>, const CloudView&, std::span<double> out) {
        out[0] = 7.0;
      });
  auto qw = policy_to_control(wild, own, flow);
  CHECK(qw.steps[0].atoms[0][0] == doctest::Approx(1.0));
}

TEST_CASE("relaxed path validation") {
  TimeGrid grid{1.0, 2};
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = 1;
  q.steps.assign(2, RelaxedControlPath::StepMeasure{{{0.5}}, {0.5}});  // weights sum to 0.5
  CHECK_THROWS(q.validate());
  q.steps.assign(2, RelaxedControlPath::StepMeasure{{{0.5}}, {1.0}});
  CHECK_NOTHROW(q.validate());
  const ActionSet as = ActionSet::interval(-0.2, 0.2);
  CHECK_THROWS(q.validate(&as));
}

TEST_CASE("action moment") {
  TimeGrid grid{2.0, 4};
  auto q = RelaxedControlPath::strict_constant(grid, {0.5});
  CHECK(q.action_moment(2.0) == doctest::Approx(2.0 * 0.25));
}

}  // TEST_SUITE
