#include "mfglab/particle.hpp"

#include <cmath>
#include <stdexcept>

namespace mfglab {

namespace {

void check_blowup(std::span<const double> x, int step, int player) {
  for (double c : x) {
    if (!std::isfinite(c) || std::abs(c) > blowup_threshold)
      throw std::runtime_error("state blow-up at step " + std::to_string(step) + ", player " +
                               std::to_string(player));
  }
}

// Materialized per-player controls for one run. Policy players get their
// strict control filled in step by step.
struct RunControls {
  std::vector<RelaxedControlPath> paths;
  std::vector<bool> is_policy;
};

RunControls prepare_controls(const CoefficientBundle& bundle, const StrategyProfile& profile,
                             const NoiseBundle& noise) {
  const int n = profile.size();
  RunControls rc;
  rc.paths.resize(n);
  rc.is_policy.resize(n, false);
  for (int i = 0; i < n; ++i) {
    const auto& entry = profile.players[i];
    if (entry.policy.has_value()) {
      rc.is_policy[i] = true;
      rc.paths[i].grid = noise.grid;
      rc.paths[i].action_dim = bundle.actions.dim;
      rc.paths[i].steps.resize(noise.grid.steps);
    } else if (entry.sampler) {
      rc.paths[i] = entry.sampler(i, noise.seed);
      require_same_grid(rc.paths[i].grid, noise.grid, "simulate: sampled control");
      rc.paths[i].validate();
    } else {
      throw std::invalid_argument("StrategyProfile entry " + std::to_string(i) +
                                  " has neither policy nor sampler");
    }
  }
  return rc;
}

// Euler-Maruyama increment for one player given the step cloud.
inline void step_player(const CoefficientBundle& bundle, int i, int k, const CloudView& view,
                        RunControls& rc, const StrategyProfile& profile, const NoiseBundle& noise,
                        PathSample& path, std::vector<double>& drift, std::vector<double>& a,
                        std::vector<double>& sig, std::vector<double>& sig0,
                        std::vector<double>& bterm) {
  const int d = bundle.state_dim;
  const int m = bundle.idio_dim;
  const int m0 = bundle.common_dim;
  const double t = noise.grid.time(k);
  const double dt = noise.grid.dt();
  auto x = path.at(k);

  std::fill(drift.begin(), drift.end(), 0.0);
  if (rc.is_policy[i]) {
    (*profile.players[i].policy)(t, x, view, a);
    rc.paths[i].steps[k] = RelaxedControlPath::StepMeasure{{a}, {1.0}};
    bundle.drift(t, x, view, a, drift);
  } else {
    // relaxed drift: exact finite-atom average of b under the step measure
    const auto& step = rc.paths[i].steps[k];
    for (std::size_t j = 0; j < step.atoms.size(); ++j) {
      bundle.drift(t, x, view, step.atoms[j], bterm);
      for (int c = 0; c < d; ++c) drift[c] += step.weights[j] * bterm[c];
    }
  }

  bundle.sigma(t, x, view, sig);
  if (m0 > 0) bundle.sigma0(t, x, view, sig0);

  auto next = path.at(k + 1);
  const auto w_now = noise.idio[i].at(k);
  const auto w_next = noise.idio[i].at(k + 1);
  for (int c = 0; c < d; ++c) {
    double dx = drift[c] * dt;
    for (int j = 0; j < m; ++j)
      dx += sig[static_cast<std::size_t>(c) * m + j] * (w_next[j] - w_now[j]);
    if (m0 > 0) {
      const auto b_now = noise.common.at(k);
      const auto b_next = noise.common.at(k + 1);
      for (int j = 0; j < m0; ++j)
        dx += sig0[static_cast<std::size_t>(c) * m0 + j] * (b_next[j] - b_now[j]);
    }
    next[c] = x[c] + dx;
  }
  check_blowup(next, k + 1, i);
}

}  // namespace

NoiseBundle sample_noise(const CoefficientBundle& bundle, int n, int steps, std::uint64_t seed) {
  if (n < 1 || steps < 1) throw std::invalid_argument("sample_noise: n >= 1 and steps >= 1");
  NoiseBundle nb;
  nb.grid = TimeGrid{bundle.horizon, steps};
  nb.n = n;
  nb.idio_dim = bundle.idio_dim;
  nb.common_dim = bundle.common_dim;
  nb.seed = seed;
  const double sdt = std::sqrt(nb.grid.dt());

  nb.common = PathSample(nb.grid, bundle.common_dim);
  if (bundle.common_dim > 0) {
    rng_stream rng(derive_seed(seed, "noise-common"));
    for (int k = 0; k < steps; ++k) {
      auto prev = nb.common.at(k);
      auto next = nb.common.at(k + 1);
      for (int j = 0; j < bundle.common_dim; ++j) next[j] = prev[j] + sdt * rng.normal();
    }
  }

  nb.idio.reserve(n);
  nb.initials.resize(n, std::vector<double>(bundle.state_dim, 0.0));
  for (int i = 0; i < n; ++i) {
    PathSample w(nb.grid, bundle.idio_dim);
    rng_stream rng(derive_seed(seed, "noise-idio", static_cast<std::uint64_t>(i)));
    for (int k = 0; k < steps; ++k) {
      auto prev = w.at(k);
      auto next = w.at(k + 1);
      for (int j = 0; j < bundle.idio_dim; ++j) next[j] = prev[j] + sdt * rng.normal();
    }
    nb.idio.push_back(std::move(w));
    rng_stream init_rng(derive_seed(seed, "noise-init", static_cast<std::uint64_t>(i)));
    bundle.initial_sampler(init_rng, nb.initials[i]);
  }
  return nb;
}

ParticleTrajectories simulate_nplayer(const CoefficientBundle& bundle,
                                      const StrategyProfile& profile, const NoiseBundle& noise) {
  const int n = noise.n;
  if (profile.size() != n)
    throw std::invalid_argument("simulate_nplayer: profile size != noise count");
  const int d = bundle.state_dim;
  const int N = noise.grid.steps;

  ParticleTrajectories out;
  out.states.assign(n, PathSample(noise.grid, d));
  out.flow = MeasureFlow(noise.grid, d);
  RunControls rc = prepare_controls(bundle, profile, noise);

  for (int i = 0; i < n; ++i) {
    auto x0 = out.states[i].at(0);
    for (int c = 0; c < d; ++c) x0[c] = noise.initials[i][c];
  }

  std::vector<double> drift(d), a(bundle.actions.dim), bterm(d);
  std::vector<double> sig(static_cast<std::size_t>(d) * bundle.idio_dim);
  std::vector<double> sig0(static_cast<std::size_t>(d) * std::max(bundle.common_dim, 1));

  for (int k = 0; k <= N; ++k) {
    ParticleCloud& cloud = out.flow.clouds[k];
    cloud = ParticleCloud(d, n);
    for (int i = 0; i < n; ++i) {
      auto xs = out.states[i].at(k);
      auto pt = cloud.point(i);
      for (int c = 0; c < d; ++c) pt[c] = xs[c];
    }
    if (k == N) break;
    const CloudView view(cloud);
    for (int i = 0; i < n; ++i)
      step_player(bundle, i, k, view, rc, profile, noise, out.states[i], drift, a, sig, sig0, bterm);
  }

  out.controls = std::move(rc.paths);
  return out;
}

namespace {

KModifiedTrajectories simulate_k_modified_impl(const CoefficientBundle& bundle,
                                               const StrategyProfile* profile,
                                               const std::vector<RelaxedControlPath>* fixed,
                                               int kplayer, const NoiseBundle& noise) {
  const int n = noise.n;
  if (n < 2) throw std::invalid_argument("simulate_k_modified: needs n >= 2");
  if (kplayer < 0 || kplayer >= n)
    throw std::invalid_argument("simulate_k_modified: player index out of range");
  const int d = bundle.state_dim;
  const int N = noise.grid.steps;

  KModifiedTrajectories out;
  out.states.assign(n, PathSample(noise.grid, d));
  out.reduced_flow = MeasureFlow(noise.grid, d);

  RunControls rc;
  StrategyProfile dummy;
  const StrategyProfile* prof = profile;
  if (fixed != nullptr) {
    rc.paths = *fixed;
    rc.is_policy.assign(n, false);
    for (auto& p : rc.paths) require_same_grid(p.grid, noise.grid, "simulate_k_modified");
    dummy.players.resize(n);
    prof = &dummy;
  } else {
    rc = prepare_controls(bundle, *profile, noise);
  }

  for (int i = 0; i < n; ++i) {
    auto x0 = out.states[i].at(0);
    for (int c = 0; c < d; ++c) x0[c] = noise.initials[i][c];
  }

  std::vector<double> drift(d), a(bundle.actions.dim), bterm(d);
  std::vector<double> sig(static_cast<std::size_t>(d) * bundle.idio_dim);
  std::vector<double> sig0(static_cast<std::size_t>(d) * std::max(bundle.common_dim, 1));

  for (int k = 0; k <= N; ++k) {
    ParticleCloud& cloud = out.reduced_flow.clouds[k];
    cloud = ParticleCloud(d, n - 1);
    int slot = 0;
    for (int i = 0; i < n; ++i) {
      if (i == kplayer) continue;
      auto xs = out.states[i].at(k);
      auto pt = cloud.point(slot++);
      for (int c = 0; c < d; ++c) pt[c] = xs[c];
    }
    if (k == N) break;
    const CloudView view(cloud);
    for (int i = 0; i < n; ++i)
      step_player(bundle, i, k, view, rc, *prof, noise, out.states[i], drift, a, sig, sig0, bterm);
  }

  out.controls = std::move(rc.paths);
  return out;
}

}  // namespace

KModifiedTrajectories simulate_k_modified(const CoefficientBundle& bundle,
                                          const StrategyProfile& profile, int k,
                                          const NoiseBundle& noise) {
  return simulate_k_modified_impl(bundle, &profile, nullptr, k, noise);
}

KModifiedTrajectories simulate_k_modified(const CoefficientBundle& bundle,
                                          const std::vector<RelaxedControlPath>& controls, int k,
                                          const NoiseBundle& noise) {
  return simulate_k_modified_impl(bundle, nullptr, &controls, k, noise);
}

namespace {

SingleAgentRun simulate_vs_flow_impl(const CoefficientBundle& bundle,
                                     const RelaxedControlPath* control,
                                     const FeedbackPolicy* policy, const MeasureFlow& flow,
                                     const PathSample& idio, const PathSample& common,
                                     std::span<const double> initial) {
  require_same_grid(flow.grid, idio.grid, "simulate_vs_flow");
  const int d = bundle.state_dim;
  const int m = bundle.idio_dim;
  const int m0 = bundle.common_dim;
  const int N = flow.grid.steps;
  const double dt = flow.grid.dt();

  SingleAgentRun run;
  run.state = PathSample(flow.grid, d);
  if (control != nullptr) {
    require_same_grid(control->grid, flow.grid, "simulate_vs_flow: control grid");
    run.control = *control;
  } else {
    run.control.grid = flow.grid;
    run.control.action_dim = bundle.actions.dim;
    run.control.steps.resize(N);
  }
  auto x0 = run.state.at(0);
  for (int c = 0; c < d; ++c) x0[c] = initial[c];

  std::vector<double> drift(d), a(bundle.actions.dim), bterm(d);
  std::vector<double> sig(static_cast<std::size_t>(d) * m);
  std::vector<double> sig0(static_cast<std::size_t>(d) * std::max(m0, 1));

  for (int k = 0; k < N; ++k) {
    const double t = flow.grid.time(k);
    const CloudView view = flow.view(k);
    auto x = run.state.at(k);
    std::fill(drift.begin(), drift.end(), 0.0);
    if (policy != nullptr) {
      (*policy)(t, x, view, a);
      run.control.steps[k] = RelaxedControlPath::StepMeasure{{a}, {1.0}};
      bundle.drift(t, x, view, a, drift);
    } else {
      const auto& step = run.control.steps[k];
      for (std::size_t j = 0; j < step.atoms.size(); ++j) {
        bundle.drift(t, x, view, step.atoms[j], bterm);
        for (int c = 0; c < d; ++c) drift[c] += step.weights[j] * bterm[c];
      }
    }
    bundle.sigma(t, x, view, sig);
    if (m0 > 0) bundle.sigma0(t, x, view, sig0);
    auto next = run.state.at(k + 1);
    const auto w_now = idio.at(k);
    const auto w_next = idio.at(k + 1);
    for (int c = 0; c < d; ++c) {
      double dx = drift[c] * dt;
      for (int j = 0; j < m; ++j)
        dx += sig[static_cast<std::size_t>(c) * m + j] * (w_next[j] - w_now[j]);
      if (m0 > 0) {
        const auto b_now = common.at(k);
        const auto b_next = common.at(k + 1);
        for (int j = 0; j < m0; ++j)
          dx += sig0[static_cast<std::size_t>(c) * m0 + j] * (b_next[j] - b_now[j]);
      }
      next[c] = x[c] + dx;
    }
    check_blowup(next, k + 1, 0);
  }
  return run;
}

}  // namespace

SingleAgentRun simulate_vs_flow(const CoefficientBundle& bundle, const RelaxedControlPath& control,
                                const MeasureFlow& flow, const PathSample& idio,
                                const PathSample& common, std::span<const double> initial) {
  return simulate_vs_flow_impl(bundle, &control, nullptr, flow, idio, common, initial);
}

SingleAgentRun simulate_vs_flow(const CoefficientBundle& bundle, const FeedbackPolicy& policy,
                                const MeasureFlow& flow, const PathSample& idio,
                                const PathSample& common, std::span<const double> initial) {
  return simulate_vs_flow_impl(bundle, nullptr, &policy, flow, idio, common, initial);
}

}  // namespace mfglab
