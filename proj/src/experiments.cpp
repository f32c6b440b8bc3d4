#include "mfglab/experiments.hpp"

#include <cmath>

#include "mfglab/parallel.hpp"

namespace mfglab {

namespace {

double pow_p(double base, double p) {
  if (p == 2.0) return base * base;
  if (p == 3.0) return base * base * base;
  return std::pow(base, p);
}

RateRow summarize_row(int n, const std::vector<double>& vals) {
  RateRow row;
  row.n = n;
  double s = 0.0;
  for (double v : vals) s += v;
  row.estimate = s / vals.size();
  if (vals.size() > 1) {
    double ss = 0.0;
    for (double v : vals) {
      const double d = v - row.estimate;
      ss += d * d;
    }
    row.stderr_ = std::sqrt(ss / (vals.size() - 1) / vals.size());
  }
  return row;
}

}  // namespace

void fit_loglog(RateTable& table) {
  const std::size_t m = table.rows.size();
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = std::log(static_cast<double>(table.rows[i].n));
    ys[i] = std::log(std::max(table.rows[i].estimate, 1e-300));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  table.fitted_slope = sxy / sxx;
  table.fitted_intercept = my - table.fitted_slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double fit = table.fitted_intercept + table.fitted_slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
  }
  table.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
}

RateTable run_chaos_rate(const CoefficientBundle& bundle,
                         const std::function<StrategyProfile(int)>& profile_family,
                         const std::vector<int>& n_list, const MonteCarloSettings& mc) {
  if (n_list.size() < 2) throw std::invalid_argument("run_chaos_rate: need several n values");
  const double pp = bundle.p_prime;
  const int kplayer = 0;

  RateTable table;
  for (int n : n_list) {
    const StrategyProfile profile = profile_family(n);
    std::vector<double> vals(mc.replications);
    parallel_for(mc.replications, [&](long r) {
      const NoiseBundle noise = sample_noise(
          bundle, n, mc.steps,
          derive_seed(mc.seed, "chaos", static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)));
      const ParticleTrajectories x_sys = simulate_nplayer(bundle, profile, noise);
      // same fixed control processes drive the k-modified system
      const KModifiedTrajectories y_sys =
          simulate_k_modified(bundle, x_sys.controls, kplayer, noise);

      // ||X^k - Y^{-k,k}||^{p'}
      const double own = pow_p(sup_norm_diff(x_sys.states[kplayer], y_sys.states[kplayer],
                                             noise.grid.points() - 1),
                               pp);
      // removal coupling for ell^{p'}(mu_hat^{-k}, mu_hat): pair (W^i, q^i, X^i)
      // with (W^i, q^i, Y^{-k,i}) for i != k, and route the removed atom
      // (W^k, q^k, X^k) to a uniformly chosen survivor
      double term_same = 0.0, term_removed = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == kplayer) continue;
        term_same +=
            pow_p(sup_norm_diff(x_sys.states[i], y_sys.states[i], noise.grid.points() - 1), pp);
        const PathTriple yi{noise.idio[i], x_sys.controls[i], y_sys.states[i]};
        const PathTriple xk{noise.idio[kplayer], x_sys.controls[kplayer], x_sys.states[kplayer]};
        term_removed += pow_p(triple_distance(bundle.p, yi, xk), pp);
      }
      const double ell = term_same / n + term_removed / (static_cast<double>(n) * (n - 1));
      vals[r] = ell + own;
    });
    table.rows.push_back(summarize_row(n, vals));
  }
  fit_loglog(table);
  return table;
}

RateTable run_pathwise_propagation(const CoefficientBundle& bundle,
                                   const MFGSolutionSample& solution,
                                   const std::vector<int>& n_list, const MonteCarloSettings& mc) {
  const double pp = bundle.p_prime;
  for (const auto& b : solution.branches())
    if (b.flow.grid.steps != mc.steps)
      throw std::invalid_argument("run_pathwise_propagation: solution flow grid != mc.steps");

  RateTable table;
  for (int n : n_list) {
    StrategyProfile profile;
    profile.players.resize(n);
    for (int i = 0; i < n; ++i)
      profile.players[i].sampler = [&solution](int, std::uint64_t noise_seed) {
        return solution.sample_branch(derive_seed(noise_seed, "branch")).control_template;
      };

    std::vector<double> vals(mc.replications);
    parallel_for(mc.replications, [&](long r) {
      const std::uint64_t base = derive_seed(mc.seed, "prop", static_cast<std::uint64_t>(n),
                                             static_cast<std::uint64_t>(r));
      const std::uint64_t noise_seed = derive_seed(base, "noise");
      const NoiseBundle noise = sample_noise(bundle, n, mc.steps, noise_seed);
      const auto& branch = solution.sample_branch(derive_seed(noise_seed, "branch"));
      const ParticleTrajectories x_sys = simulate_nplayer(bundle, profile, noise);

      // representative agents on shared noise
      const SingleAgentRun y0 = simulate_vs_flow(bundle, x_sys.controls[0], branch.flow,
                                                 noise.idio[0], noise.common, noise.initials[0]);
      const double own =
          pow_p(sup_norm_diff(x_sys.states[0], y0.state, noise.grid.points() - 1), pp);

      EmpiricalPathMeasure mu_hat;
      mu_hat.triples.reserve(n);
      for (int i = 0; i < n; ++i)
        mu_hat.triples.push_back(PathTriple{noise.idio[i], x_sys.controls[i], x_sys.states[i]});

      // branch-matched independent reference sample of the solution
      EmpiricalPathMeasure ref;
      ref.triples.reserve(n);
      const NoiseBundle ref_noise = sample_noise(bundle, n, mc.steps, derive_seed(base, "ref"));
      for (int i = 0; i < n; ++i) {
        const SingleAgentRun run =
            simulate_vs_flow(bundle, branch.control_template, branch.flow, ref_noise.idio[i],
                             ref_noise.common, ref_noise.initials[i]);
        ref.triples.push_back(PathTriple{ref_noise.idio[i], run.control, run.state});
      }
      vals[r] = pow_p(path_measure_distance(pp, mu_hat, ref), pp) + own;
    });
    table.rows.push_back(summarize_row(n, vals));
  }
  fit_loglog(table);
  return table;
}

LimitStats run_limit_experiment(const CoefficientBundle& bundle,
                                const std::function<StrategyProfile(int)>& equilibria,
                                const MFGSolutionSample& solution, const std::vector<int>& n_list,
                                const MonteCarloSettings& mc) {
  for (const auto& b : solution.branches())
    if (b.flow.grid.steps != mc.steps)
      throw std::invalid_argument("run_limit_experiment: solution flow grid != mc.steps");

  LimitStats stats;
  stats.branch_frequency.assign(solution.branches().size(), 0.0);

  for (std::size_t which = 0; which < n_list.size(); ++which) {
    const int n = n_list[which];
    const bool last = which + 1 == n_list.size();
    const StrategyProfile profile = equilibria(n);
    std::vector<double> vals(mc.replications);
    std::vector<int> branch_of(mc.replications, 0);
    std::vector<double> terminal(mc.replications, 0.0);
    parallel_for(mc.replications, [&](long r) {
      const std::uint64_t base = derive_seed(mc.seed, "limit", static_cast<std::uint64_t>(n),
                                             static_cast<std::uint64_t>(r));
      const NoiseBundle noise = sample_noise(bundle, n, mc.steps, derive_seed(base, "noise"));
      const ParticleTrajectories traj = simulate_nplayer(bundle, profile, noise);

      // classify the replication by the empirical terminal mean
      const double m_T = traj.flow.view(noise.grid.points() - 1).mean(0);
      terminal[r] = m_T;
      int best_branch = 0;
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < solution.branches().size(); ++b) {
        const auto& flow = solution.branches()[b].flow;
        const double gap = std::abs(flow.mean(flow.grid.points() - 1, 0) - m_T);
        if (gap < best_gap) {
          best_gap = gap;
          best_branch = static_cast<int>(b);
        }
      }
      branch_of[r] = best_branch;
      const auto& branch = solution.branches()[best_branch];

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
      vals[r] = path_measure_distance(bundle.p, mu_hat, ref);
    });
    stats.table.rows.push_back(summarize_row(n, vals));
    if (last) {
      for (long r = 0; r < mc.replications; ++r)
        stats.branch_frequency[static_cast<std::size_t>(branch_of[r])] += 1.0;
      for (double& f : stats.branch_frequency) f /= mc.replications;
      stats.terminal_means.assign(terminal.begin(), terminal.end());
    }
  }
  fit_loglog(stats.table);
  return stats;
}

}  // namespace mfglab
