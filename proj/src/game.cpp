#include "mfglab/game.hpp"

#include <cmath>

#include "mfglab/mfg.hpp"
#include "mfglab/parallel.hpp"

namespace mfglab {

namespace {

// strictly-better-by-tolerance comparison; ties keep the incumbent so the
// selection is the first candidate in enumeration order
bool strictly_better(double candidate, double incumbent) {
  const double tol = 1e-9 * std::max(1.0, std::abs(incumbent)) + 1e-12;
  return candidate > incumbent + tol;
}

ValueEstimate summarize(const std::vector<double>& vals) {
  ValueEstimate est;
  est.replications = static_cast<long>(vals.size());
  double s = 0.0;
  for (double v : vals) s += v;
  est.mean = s / est.replications;
  if (est.replications > 1) {
    double ss = 0.0;
    for (double v : vals) {
      const double d = v - est.mean;
      ss += d * d;
    }
    est.stderr_ = std::sqrt(ss / (est.replications - 1) / est.replications);
  }
  return est;
}

}  // namespace

double objective_gamma(const CoefficientBundle& bundle, std::span<const CloudView> views,
                       const RelaxedControlPath& q, const PathSample& x) {
  require_same_grid(q.grid, x.grid, "objective_gamma");
  if (static_cast<int>(views.size()) != x.grid.points())
    throw std::invalid_argument("objective_gamma: views/grid mismatch");
  const double dt = x.grid.dt();
  double total = 0.0;
  for (int k = 0; k < x.grid.steps; ++k) {
    const auto& step = q.steps[k];
    double favg = 0.0;
    for (std::size_t j = 0; j < step.atoms.size(); ++j)
      favg +=
          step.weights[j] * bundle.running_reward(x.grid.time(k), x.at(k), views[k], step.atoms[j]);
    total += dt * favg;
  }
  total += bundle.terminal_reward(x.at(x.grid.points() - 1), views[x.grid.points() - 1]);
  return total;
}

double objective_gamma(const CoefficientBundle& bundle, const MeasureFlow& flow,
                       const RelaxedControlPath& q, const PathSample& x) {
  require_same_grid(flow.grid, x.grid, "objective_gamma");
  std::vector<CloudView> views;
  views.reserve(flow.grid.points());
  for (int k = 0; k < flow.grid.points(); ++k) views.emplace_back(flow.clouds[k]);
  return objective_gamma(bundle, views, q, x);
}

std::vector<CloudView> warmed_views(const MeasureFlow& flow) {
  std::vector<CloudView> views;
  views.reserve(flow.grid.points());
  for (int k = 0; k < flow.grid.points(); ++k) {
    views.emplace_back(flow.clouds[k]);
    for (int j = 0; j < flow.dim; ++j) views.back().mean(j);
  }
  return views;
}

ValueEstimate estimate_value(const CoefficientBundle& bundle, const StrategyProfile& profile,
                             int player, const MonteCarloSettings& mc) {
  const int n = profile.size();
  std::vector<double> vals(mc.replications);
  parallel_for(mc.replications, [&](long r) {
    const NoiseBundle noise =
        sample_noise(bundle, n, mc.steps, derive_seed(mc.seed, "value", static_cast<std::uint64_t>(r)));
    const ParticleTrajectories traj = simulate_nplayer(bundle, profile, noise);
    vals[r] = objective_gamma(bundle, traj.flow, traj.controls[player], traj.states[player]);
  });
  return summarize(vals);
}

std::string PolicyClass::descriptor() const {
  switch (kind) {
    case Kind::constants:
      return "constants(grid=" + std::to_string(grid_points_per_dim) + ")";
    case Kind::switch_sign: {
      std::string s = "switch_sign(taus=";
      for (std::size_t i = 0; i < switch_times.size(); ++i)
        s += (i ? "," : "") + std::to_string(switch_times[i]);
      return s + ")";
    }
    case Kind::flow_sign:
      return "flow_sign(eta=" + std::to_string(sign_eta) + ")";
    case Kind::pointwise:
      return "pointwise_optimal";
    case Kind::explicit_list:
      return "explicit(" + std::to_string(candidates.size()) + ")";
  }
  return "unknown";
}

std::vector<FeedbackPolicy> enumerate_candidates(const PolicyClass& cls,
                                                 const CoefficientBundle& bundle,
                                                 const MeasureFlow* flow,
                                                 const SearchSettings& search) {
  const ActionSet& as = bundle.actions;
  std::vector<FeedbackPolicy> out;
  switch (cls.kind) {
    case PolicyClass::Kind::constants: {
      if (as.kind == ActionSet::Kind::finite) {
        for (const auto& atom : as.atoms) out.push_back(FeedbackPolicy::constant(as, atom));
        break;
      }
      // per-dimension grid over the box hull
      const int g = std::max(1, cls.grid_points_per_dim);
      std::vector<double> lo = as.kind == ActionSet::Kind::box ? as.lower : as.center;
      std::vector<double> hi = as.kind == ActionSet::Kind::box ? as.upper : as.center;
      if (as.kind == ActionSet::Kind::ball)
        for (int j = 0; j < as.dim; ++j) {
          lo[j] -= as.radius;
          hi[j] += as.radius;
        }
      std::vector<int> idx(as.dim, 0);
      for (;;) {
        std::vector<double> a(as.dim);
        for (int j = 0; j < as.dim; ++j)
          a[j] = g == 1 ? 0.5 * (lo[j] + hi[j]) : lo[j] + (hi[j] - lo[j]) * idx[j] / (g - 1);
        as.clamp(a);
        out.push_back(FeedbackPolicy::constant(as, a));
        int j = 0;
        while (j < as.dim && ++idx[j] == g) idx[j++] = 0;
        if (j == as.dim) break;
      }
      break;
    }
    case PolicyClass::Kind::switch_sign: {
      if (as.dim != 1)
        throw std::invalid_argument("switch_sign class requires scalar actions");
      const double eta = cls.sign_eta;
      // zero policy first: the canonical tie-break anchor
      out.push_back(FeedbackPolicy::constant(as, {0.0}));
      auto add_switch = [&](double tau, double pre, int post_mode, double post_const) {
        std::string desc = "switch(tau=" + std::to_string(tau) + ",pre=" + std::to_string(pre) +
                           (post_mode == 0 ? ",post=" + std::to_string(post_const)
                                           : ",post=sign_mean") +
                           ")";
        out.push_back(FeedbackPolicy::parametric(
            as, desc,
            [tau, pre, post_mode, post_const, eta](double t, std::span<const double>,
                                                   const CloudView& cloud, std::span<double> o) {
              if (t <= tau + 1e-12) {
                o[0] = pre;
              } else if (post_mode == 0) {
                o[0] = post_const;
              } else {
                o[0] = sign_eta(cloud.mean(0), eta);
              }
            }));
      };
      for (double tau : cls.switch_times) {
        const std::vector<double> pres = tau <= 1e-12 ? std::vector<double>{0.0}
                                                      : std::vector<double>{-1.0, 0.0, 1.0};
        for (double pre : pres) {
          for (double pc : {-1.0, 0.0, 1.0}) {
            if (pre == 0.0 && pc == 0.0) continue;  // zero policy already listed
            add_switch(tau, pre, 0, pc);
          }
          add_switch(tau, pre, 1, 0.0);
        }
      }
      break;
    }
    case PolicyClass::Kind::flow_sign: {
      if (flow == nullptr)
        throw std::invalid_argument("flow_sign class needs a frozen flow");
      const double meanT = flow->mean(flow->grid.points() - 1, 0);
      const double s = sign_eta(meanT, cls.sign_eta);
      FeedbackPolicy p = FeedbackPolicy::constant(as, {s});
      p.descriptor = "flow_sign->" + std::to_string(s);
      out.push_back(std::move(p));
      break;
    }
    case PolicyClass::Kind::pointwise: {
      FeedbackPolicy p = pointwise_optimal_policy(bundle, search.budget);
      out.push_back(std::move(p));
      break;
    }
    case PolicyClass::Kind::explicit_list:
      out = cls.candidates;
      break;
  }
  if (out.empty()) throw std::invalid_argument("policy class enumerated no candidates");
  if (static_cast<long>(out.size()) > search.budget)
    out.resize(static_cast<std::size_t>(search.budget));
  return out;
}

namespace {

// Values of all candidates plus the on-profile baseline, with common random
// numbers: per replication one noise bundle reused across every candidate.
struct PairedValues {
  std::vector<double> baseline;               // per replication
  std::vector<std::vector<double>> values;    // candidate x replication
};

PairedValues paired_candidate_values(const CoefficientBundle& bundle,
                                     const StrategyProfile& profile, int player,
                                     const std::vector<FeedbackPolicy>& candidates,
                                     const MonteCarloSettings& mc) {
  // deviated profiles built once per candidate, shared across replications
  std::vector<StrategyProfile> deviated(candidates.size(), profile);
  for (std::size_t c = 0; c < candidates.size(); ++c)
    deviated[c].players[player] = StrategyProfile::Entry{candidates[c], nullptr};

  PairedValues pv;
  pv.baseline.resize(mc.replications);
  pv.values.assign(candidates.size(), std::vector<double>(mc.replications));
  parallel_for(mc.replications, [&](long r) {
    const NoiseBundle noise =
        sample_noise(bundle, profile.size(), mc.steps,
                     derive_seed(mc.seed, "gap", static_cast<std::uint64_t>(r)));
    const ParticleTrajectories base = simulate_nplayer(bundle, profile, noise);
    pv.baseline[r] = objective_gamma(bundle, base.flow, base.controls[player], base.states[player]);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const ParticleTrajectories dev = simulate_nplayer(bundle, deviated[c], noise);
      pv.values[c][r] =
          objective_gamma(bundle, dev.flow, dev.controls[player], dev.states[player]);
    }
  });
  return pv;
}

int pick_best(const std::vector<std::vector<double>>& values) {
  int best = 0;
  double best_mean = summarize(values[0]).mean;
  for (std::size_t c = 1; c < values.size(); ++c) {
    const double m = summarize(values[c]).mean;
    if (strictly_better(m, best_mean)) {
      best = static_cast<int>(c);
      best_mean = m;
    }
  }
  return best;
}

}  // namespace

BestResponseResult best_response(const CoefficientBundle& bundle, const StrategyProfile& profile,
                                 int player, const PolicyClass& cls, const SearchSettings& search,
                                 const MonteCarloSettings& mc) {
  const auto candidates = enumerate_candidates(cls, bundle, nullptr, search);
  const PairedValues pv = paired_candidate_values(bundle, profile, player, candidates, mc);
  const int best = pick_best(pv.values);
  return BestResponseResult{candidates[best], summarize(pv.values[best]), best};
}

BestResponseResult best_response_vs_flow(const CoefficientBundle& bundle, const MeasureFlow& flow,
                                         const PolicyClass& cls, const SearchSettings& search,
                                         const MonteCarloSettings& mc) {
  const auto candidates = enumerate_candidates(cls, bundle, &flow, search);
  const auto views = warmed_views(flow);
  std::vector<std::vector<double>> values(candidates.size(),
                                          std::vector<double>(mc.replications));
  parallel_for(mc.replications, [&](long r) {
    // one (W, B, xi) reused across candidates
    const NoiseBundle noise =
        sample_noise(bundle, 1, flow.grid.steps,
                     derive_seed(mc.seed, "brflow", static_cast<std::uint64_t>(r)));
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const SingleAgentRun run = simulate_vs_flow(bundle, candidates[c], flow, noise.idio[0],
                                                  noise.common, noise.initials[0]);
      values[c][r] = objective_gamma(bundle, views, run.control, run.state);
    }
  });
  const int best = pick_best(values);
  return BestResponseResult{candidates[best], summarize(values[best]), best};
}

NashGapReport nash_gap(const CoefficientBundle& bundle, const StrategyProfile& profile,
                       const PolicyClass& cls, const SearchSettings& search,
                       const MonteCarloSettings& mc, const std::vector<int>* players) {
  std::vector<int> who;
  if (players != nullptr) {
    who = *players;
  } else {
    who.resize(profile.size());
    for (int i = 0; i < profile.size(); ++i) who[i] = i;
  }
  NashGapReport rep;
  rep.players = who;
  rep.policy_class = cls.descriptor();
  const auto candidates = enumerate_candidates(cls, bundle, nullptr, search);
  for (int player : who) {
    const PairedValues pv = paired_candidate_values(bundle, profile, player, candidates, mc);
    const int best = pick_best(pv.values);
    std::vector<double> diffs(mc.replications);
    for (long r = 0; r < mc.replications; ++r) diffs[r] = pv.values[best][r] - pv.baseline[r];
    const ValueEstimate d = summarize(diffs);
    rep.raw.push_back(d.mean);
    rep.gap.push_back(std::max(0.0, d.mean));
    rep.stderr_.push_back(d.stderr_);
    rep.best_responses.push_back(candidates[best]);
  }
  return rep;
}

std::pair<StrategyProfile, ConverseReport> converse_equilibrium(
    const CoefficientBundle& bundle, const MFGSolutionSample& solution, int n,
    const PolicyClass& cls, const SearchSettings& search, const MonteCarloSettings& mc) {
  // Player-i control: the i-th sample of the solution's control, conditionally
  // i.i.d. given the branch; the branch is drawn once per noise realization.
  StrategyProfile profile;
  profile.players.resize(n);
  for (int i = 0; i < n; ++i) {
    profile.players[i].sampler = [&solution](int, std::uint64_t noise_seed) {
      const auto& branch = solution.sample_branch(derive_seed(noise_seed, "branch"));
      return branch.control_template;
    };
  }

  ConverseReport rep;
  rep.n = n;

  // exchangeable profile: the player-0 gap estimates the common eps_n
  const std::vector<int> player0{0};
  const NashGapReport gaps = nash_gap(bundle, profile, cls, search, mc, &player0);
  rep.epsilon = gaps.gap[0];
  rep.epsilon_stderr = gaps.stderr_[0];

  rep.value_mean = estimate_value(bundle, profile, 0, mc).mean;

  // distance of the realized empirical path measure to a branch-matched
  // independent sample of the solution
  const long dist_reps = mc.distance_reps();
  std::vector<double> dists(dist_reps);
  parallel_for(dist_reps, [&](long r) {
    const std::uint64_t base = derive_seed(mc.seed, "dist", static_cast<std::uint64_t>(r));
    const NoiseBundle noise = sample_noise(bundle, n, mc.steps, derive_seed(base, "noise"));
    const ParticleTrajectories traj = simulate_nplayer(bundle, profile, noise);
    const auto& branch = solution.sample_branch(derive_seed(derive_seed(base, "noise"), "branch"));

    EmpiricalPathMeasure mu_hat;
    mu_hat.triples.reserve(n);
    for (int i = 0; i < n; ++i)
      mu_hat.triples.push_back(PathTriple{noise.idio[i], traj.controls[i], traj.states[i]});

    EmpiricalPathMeasure ref;
    ref.triples.reserve(n);
    const NoiseBundle ref_noise = sample_noise(bundle, n, mc.steps, derive_seed(base, "ref"));
    for (int i = 0; i < n; ++i) {
      const SingleAgentRun run =
          simulate_vs_flow(bundle, branch.control_template, branch.flow, ref_noise.idio[i],
                           ref_noise.common, ref_noise.initials[i]);
      ref.triples.push_back(PathTriple{ref_noise.idio[i], run.control, run.state});
    }
    dists[r] = path_measure_distance(bundle.p, mu_hat, ref);
  });
  rep.distance_to_solution = summarize(dists).mean;
  return {std::move(profile), rep};
}

}  // namespace mfglab
