#include "mfglab/mfg.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "mfglab/parallel.hpp"

namespace mfglab {

namespace {

// Acklam's rational approximation for the standard normal quantile, polished
// with one Halley step; ~1e-15 relative accuracy.
double norm_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("norm_quantile: p in (0,1)");
  double q, r, x;
  if (p < 0.02425) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 0.97575) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace

ParticleCloud gaussian_stencil_cloud(double mean, double stddev, int particles) {
  ParticleCloud cloud(1, particles);
  if (stddev <= 0.0) {
    for (int i = 0; i < particles; ++i) cloud.point(i)[0] = mean;
    return cloud;
  }
  // mirrored quantile stencil: the sample mean matches the target up to
  // rounding
  for (int i = 0; i < particles / 2; ++i) {
    const double u = (i + 0.5) / particles;
    const double z = norm_quantile(u);  // negative for u < 1/2
    cloud.point(i)[0] = mean + stddev * z;
    cloud.point(particles - 1 - i)[0] = mean - stddev * z;
  }
  if (particles % 2 == 1) cloud.point(particles / 2)[0] = mean;
  return cloud;
}

MFGSolutionSample MFGSolutionSample::mixture(std::vector<Branch> branches) {
  if (branches.empty()) throw std::invalid_argument("MFGSolutionSample: no branches");
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("MFGSolutionSample: branch weights must sum to 1");
  MFGSolutionSample s;
  s.branches_ = std::move(branches);
  return s;
}

const MFGSolutionSample::Branch& MFGSolutionSample::sample_branch(std::uint64_t seed) const {
  if (branches_.size() == 1) return branches_.front();
  rng_stream rng(seed);
  const double u = rng.uniform();
  double cum = 0.0;
  for (const auto& b : branches_) {
    cum += b.probability;
    if (u < cum) return b;
  }
  return branches_.back();
}

double consistency_residual(const CoefficientBundle& bundle, const MeasureFlow& flow,
                            const FeedbackPolicy& policy, const MonteCarloSettings& mc) {
  const long agents = mc.replications;
  const int d = bundle.state_dim;
  const int points = flow.grid.points();

  // one shared common-noise path, independent idiosyncratic noise per agent
  const NoiseBundle shared = sample_noise(bundle, 1, flow.grid.steps, derive_seed(mc.seed, "resid-common"));
  std::vector<PathSample> states(agents);
  parallel_for(agents, [&](long j) {
    const NoiseBundle noise = sample_noise(
        bundle, 1, flow.grid.steps, derive_seed(mc.seed, "resid-agent", static_cast<std::uint64_t>(j)));
    states[j] = simulate_vs_flow(bundle, policy, flow, noise.idio[0], shared.common,
                                 noise.initials[0])
                    .state;
  });

  std::vector<double> per_time(points, 0.0);
  parallel_for(points, [&](long k) {
    ParticleCloud sim(d, static_cast<int>(agents));
    for (long j = 0; j < agents; ++j) {
      auto xs = states[j].at(static_cast<int>(k));
      auto pt = sim.point(static_cast<int>(j));
      for (int c = 0; c < d; ++c) pt[c] = xs[c];
    }
    per_time[k] = wasserstein_clouds(bundle.p, CloudView(sim), flow.view(static_cast<int>(k)));
  });
  double res = 0.0;
  for (double v : per_time) res = std::max(res, v);
  return res;
}

namespace {

MeasureFlow simulate_agents_to_flow(const CoefficientBundle& bundle, const FeedbackPolicy& policy,
                                    const MeasureFlow& flow, long agents, std::uint64_t seed) {
  const int d = bundle.state_dim;
  const NoiseBundle shared = sample_noise(bundle, 1, flow.grid.steps, derive_seed(seed, "common"));
  std::vector<PathSample> states(agents);
  parallel_for(agents, [&](long j) {
    const NoiseBundle noise =
        sample_noise(bundle, 1, flow.grid.steps, derive_seed(seed, "agent", static_cast<std::uint64_t>(j)));
    states[j] =
        simulate_vs_flow(bundle, policy, flow, noise.idio[0], shared.common, noise.initials[0])
            .state;
  });
  MeasureFlow out(flow.grid, d);
  for (int k = 0; k < flow.grid.points(); ++k) {
    out.clouds[k] = ParticleCloud(d, static_cast<int>(agents));
    for (long j = 0; j < agents; ++j) {
      auto xs = states[j].at(k);
      auto pt = out.clouds[k].point(static_cast<int>(j));
      for (int c = 0; c < d; ++c) pt[c] = xs[c];
    }
  }
  return out;
}

ParticleCloud resample_cloud(const ParticleCloud& src, int count) {
  ParticleCloud out(src.dim, count);
  for (int i = 0; i < count; ++i) {
    const int j = static_cast<int>((static_cast<long>(i) * src.count()) / count);
    auto pt = out.point(i);
    auto sp = src.point(j);
    for (int c = 0; c < src.dim; ++c) pt[c] = sp[c];
  }
  return out;
}

}  // namespace

std::pair<MFGSolutionSample, FixedPointTrace> solve_strong_mfg(const CoefficientBundle& bundle,
                                                               const MeasureFlow& init_flow,
                                                               const PolicyClass& cls,
                                                               const SearchSettings& search,
                                                               const SolveSettings& settings) {
  const long particles = settings.mc.replications;
  MeasureFlow flow(init_flow.grid, init_flow.dim);
  for (int k = 0; k < flow.grid.points(); ++k)
    flow.clouds[k] = resample_cloud(init_flow.clouds[k], static_cast<int>(particles));

  FixedPointTrace trace;
  trace.damping = settings.damping;
  FeedbackPolicy policy;

  for (int it = 0; it < settings.max_iterations; ++it) {
    MonteCarloSettings mc = settings.mc;
    mc.seed = derive_seed(settings.mc.seed, "solver-br", static_cast<std::uint64_t>(it));
    const BestResponseResult br = best_response_vs_flow(bundle, flow, cls, search, mc);
    policy = br.policy;

    const MeasureFlow fresh = simulate_agents_to_flow(
        bundle, policy, flow, particles,
        derive_seed(settings.mc.seed, "solver-sim", static_cast<std::uint64_t>(it)));

    // damped particle resampling: keep (1-damping) of the old cloud
    const int keep = static_cast<int>(std::lround((1.0 - settings.damping) * particles));
    for (int k = 0; k < flow.grid.points(); ++k) {
      ParticleCloud mixed(flow.dim, static_cast<int>(particles));
      const ParticleCloud kept = resample_cloud(flow.clouds[k], keep);
      const ParticleCloud fresh_part =
          resample_cloud(fresh.clouds[k], static_cast<int>(particles) - keep);
      for (int i = 0; i < keep; ++i)
        for (int c = 0; c < flow.dim; ++c) mixed.point(i)[c] = kept.point(i)[c];
      for (int i = keep; i < particles; ++i)
        for (int c = 0; c < flow.dim; ++c) mixed.point(i)[c] = fresh_part.point(i - keep)[c];
      flow.clouds[k] = std::move(mixed);
    }

    MonteCarloSettings resid_mc = settings.mc;
    resid_mc.seed = derive_seed(settings.mc.seed, "solver-resid", static_cast<std::uint64_t>(it));
    const double residual = consistency_residual(bundle, flow, policy, resid_mc);
    trace.residual_history.push_back(residual);
    trace.iterations = it + 1;
    if (residual < settings.tolerance) {
      trace.converged = true;
      break;
    }
  }

  MFGSolutionSample::Branch branch;
  branch.label = sign_eta(flow.mean(flow.grid.points() - 1, 0), 1e-9);
  branch.probability = 1.0;
  branch.flow = flow;
  branch.policy = policy;
  // control template materialized along the flow mean path (exact for
  // state-free policies)
  PathSample mean_path(flow.grid, flow.dim);
  for (int k = 0; k < flow.grid.points(); ++k)
    for (int c = 0; c < flow.dim; ++c) mean_path.at(k)[c] = flow.view(k).mean(c);
  branch.control_template = policy_to_control(policy, mean_path, flow);
  return {MFGSolutionSample::strong(std::move(branch)), trace};
}

FeedbackPolicy pointwise_optimal_policy(const CoefficientBundle& bundle, long budget) {
  // precondition probes: g == 0 and f independent of own state
  {
    rng_stream rng(derive_seed(1234567, "pointwise-probe"));
    const int d = bundle.state_dim;
    ParticleCloud cloud(d, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < d; ++j) cloud.point(i)[j] = rng.uniform(-2.0, 2.0);
    std::vector<double> x1(d), x2(d), a(bundle.actions.dim);
    for (int trial = 0; trial < 8; ++trial) {
      for (int j = 0; j < d; ++j) {
        x1[j] = rng.uniform(-2.0, 2.0);
        x2[j] = rng.uniform(-2.0, 2.0);
      }
      bundle.actions.sample(rng, a);
      const double t = rng.uniform(0.0, bundle.horizon);
      CloudView view(cloud);
      if (std::abs(bundle.terminal_reward(x1, view)) > 1e-12)
        throw std::invalid_argument("pointwise_optimal_policy: requires g == 0");
      const double f1 = bundle.running_reward(t, x1, view, a);
      const double f2 = bundle.running_reward(t, x2, view, a);
      if (std::abs(f1 - f2) > 1e-9 * (1.0 + std::abs(f1)))
        throw std::invalid_argument("pointwise_optimal_policy: requires f independent of own state");
    }
  }

  const ActionSet as = bundle.actions;
  const long grid_n = std::max<long>(budget, 8);

  // coarse grid + two shrink-refine rounds around the best point
  auto optimize = [as, grid_n, f = bundle.running_reward,
                   state_dim = bundle.state_dim](double t, const CloudView& cloud) {
    std::vector<double> xdummy(state_dim, 0.0);
    std::vector<double> best(as.dim, 0.0);
    if (as.kind == ActionSet::Kind::finite) {
      double best_v = -std::numeric_limits<double>::infinity();
      for (const auto& atom : as.atoms) {
        const double v = f(t, xdummy, cloud, atom);
        if (v > best_v) {
          best_v = v;
          best = atom;
        }
      }
      return best;
    }
    std::vector<double> lo = as.kind == ActionSet::Kind::box ? as.lower : as.center;
    std::vector<double> hi = as.kind == ActionSet::Kind::box ? as.upper : as.center;
    if (as.kind == ActionSet::Kind::ball)
      for (int j = 0; j < as.dim; ++j) {
        lo[j] -= as.radius;
        hi[j] += as.radius;
      }
    const int per_dim = std::max(2, static_cast<int>(std::floor(
                               std::pow(static_cast<double>(grid_n), 1.0 / as.dim))));
    std::vector<double> a(as.dim);
    for (int round = 0; round < 4; ++round) {
      double best_v = -std::numeric_limits<double>::infinity();
      std::vector<double> round_best(as.dim);
      std::vector<int> idx(as.dim, 0);
      for (;;) {
        for (int j = 0; j < as.dim; ++j)
          a[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / (per_dim - 1);
        as.clamp(a);
        const double v = f(t, xdummy, cloud, a);
        if (v > best_v) {
          best_v = v;
          round_best = a;
        }
        int j = 0;
        while (j < as.dim && ++idx[j] == per_dim) idx[j++] = 0;
        if (j == as.dim) break;
      }
      best = round_best;
      for (int j = 0; j < as.dim; ++j) {
        const double span = (hi[j] - lo[j]) / (per_dim - 1);
        lo[j] = best[j] - span;
        hi[j] = best[j] + span;
      }
    }
    return best;
  };

  // flow-independence probe enables caching per time point
  bool flow_dependent = false;
  {
    rng_stream rng(derive_seed(7654321, "pointwise-nu"));
    const int d = bundle.state_dim;
    ParticleCloud c1(d, 4), c2(d, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < d; ++j) {
        c1.point(i)[j] = rng.uniform(-2.0, 2.0);
        c2.point(i)[j] = rng.uniform(-2.0, 2.0);
      }
    std::vector<double> x(d, 0.0), a(bundle.actions.dim);
    for (int trial = 0; trial < 8 && !flow_dependent; ++trial) {
      bundle.actions.sample(rng, a);
      const double t = rng.uniform(0.0, bundle.horizon);
      CloudView v1(c1), v2(c2);
      if (std::abs(bundle.running_reward(t, x, v1, a) - bundle.running_reward(t, x, v2, a)) > 1e-12)
        flow_dependent = true;
    }
  }

  auto memo = std::make_shared<std::unordered_map<double, std::vector<double>>>();
  auto memo_mutex = std::make_shared<std::mutex>();
  return FeedbackPolicy::parametric(
      as, "pointwise_optimal",
      [optimize, memo, memo_mutex, flow_dependent](double t, std::span<const double>,
                                               const CloudView& cloud, std::span<double> out) {
        if (!flow_dependent) {
          std::lock_guard<std::mutex> lock(*memo_mutex);
          auto it = memo->find(t);
          if (it == memo->end()) it = memo->emplace(t, optimize(t, cloud)).first;
          for (std::size_t j = 0; j < out.size(); ++j) out[j] = it->second[j];
          return;
        }
        const auto a = optimize(t, cloud);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j];
      });
}

namespace {

MeasureFlow example33_branch_flow(double sigma, int steps, int particles,
                                  const std::function<double(double)>& mean_path) {
  TimeGrid grid{2.0, steps};
  MeasureFlow flow(grid, 1);
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    flow.clouds[k] = gaussian_stencil_cloud(mean_path(t), sigma * std::sqrt(t), particles);
  }
  return flow;
}

}  // namespace

std::vector<std::pair<MeasureFlow, FeedbackPolicy>> example33_strong_solutions(double sigma,
                                                                               int steps,
                                                                               int particles) {
  const ActionSet as = ActionSet::interval(-1.0, 1.0);
  std::vector<std::pair<MeasureFlow, FeedbackPolicy>> out;
  for (double s : {1.0, 0.0, -1.0}) {
    MeasureFlow flow =
        example33_branch_flow(sigma, steps, particles, [s](double t) { return s * t; });
    out.emplace_back(std::move(flow), FeedbackPolicy::constant(as, {s}));
  }
  return out;
}

Example33WeakBranch example33_weak_solution(std::uint64_t seed, double sigma, int steps,
                                            int particles) {
  rng_stream rng(derive_seed(seed, "weak-branch"));
  const double gamma = rng.uniform() < 0.5 ? 1.0 : -1.0;
  Example33WeakBranch branch;
  branch.gamma = gamma;
  branch.flow = example33_branch_flow(sigma, steps, particles, [gamma](double t) {
    return t > 1.0 ? gamma * (t - 1.0) : 0.0;
  });
  TimeGrid grid{2.0, steps};
  std::vector<std::vector<double>> actions(steps);
  for (int k = 0; k < steps; ++k)
    actions[k] = {grid.time(k) >= 1.0 - 1e-12 ? gamma : 0.0};
  branch.control_template = RelaxedControlPath::strict_from_actions(grid, actions);
  return branch;
}

MFGSolutionSample example33_weak_solution_sample(double sigma, int steps, int particles) {
  const ActionSet as = ActionSet::interval(-1.0, 1.0);
  std::vector<MFGSolutionSample::Branch> branches;
  for (double gamma : {1.0, -1.0}) {
    MFGSolutionSample::Branch b;
    b.label = gamma;
    b.probability = 0.5;
    b.flow = example33_branch_flow(sigma, steps, particles, [gamma](double t) {
      return t > 1.0 ? gamma * (t - 1.0) : 0.0;
    });
    TimeGrid grid{2.0, steps};
    std::vector<std::vector<double>> actions(steps);
    for (int k = 0; k < steps; ++k)
      actions[k] = {grid.time(k) >= 1.0 - 1e-12 ? gamma : 0.0};
    b.control_template = RelaxedControlPath::strict_from_actions(grid, actions);
    b.policy = example33_optimal_policy(
        as, [gamma](double t) { return t > 1.0 ? gamma : 0.0; });
    branches.push_back(std::move(b));
  }
  return MFGSolutionSample::mixture(std::move(branches));
}

FeedbackPolicy example33_optimal_policy(const ActionSet& actions,
                                        std::function<double(double)> conditional_mean_T) {
  return FeedbackPolicy::parametric(
      actions, "example33_sign_policy",
      [fn = std::move(conditional_mean_T)](double t, std::span<const double>, const CloudView&,
                                           std::span<double> out) {
        out[0] = sign_eta(fn(t), 0.0);  // sign(0) = 0 exactly
      });
}

}  // namespace mfglab
