// mfglab: scenario validation, particle-system simulation, Nash-gap
// certification, mean field game solving, and the packaged convergence
// experiments, driven by a structured text configuration.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mfglab/config.hpp"
#include "mfglab/csv.hpp"
#include "mfglab/experiments.hpp"
#include "mfglab/parallel.hpp"

namespace fs = std::filesystem;
using namespace mfglab;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitPass = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("MFGLAB_OUT")) return env;
  return "out";
}

void write_manifest(const fs::path& dir, const std::string& command, const ConfigNode& cfg,
                    std::uint64_t seed) {
  std::ofstream out(dir / "manifest.txt");
  out << "# mfglab " << kVersion << " manifest\n";
  out << "# regenerate with: mfglab " << command << " --config manifest.txt --out <dir>\n";
  out << "command = \"" << command << "\"\n";
  out << "seed = " << seed << "\n\n";
  out << render_config(cfg);
}

CoefficientBundle load_scenario(const ConfigNode& sc) {
  const std::string name = sc.get_string("name", "example33");
  if (name == "example33") return scenario_example33(sc.get_real("sigma", 1.0));
  if (name == "zero_objective") return scenario_zero_objective(sc.get_real("sigma", 1.0));
  if (name == "mean_coupled") return scenario_mean_coupled(sc.get_real("sigma", 0.5));
  if (name == "decoupled_quadratic")
    return scenario_decoupled_quadratic(sc.get_real("a_star", 0.3), sc.get_real("sigma", 1.0));
  if (name == "no_control_ou") {
    return scenario_no_control(
        [](double, std::span<const double> x, const CloudView&, std::span<double> out) {
          out[0] = -x[0];
        },
        [](double, std::span<const double>, const CloudView&, std::span<double> out) {
          out[0] = 1.0;
        },
        1, 1, sc.get_real("horizon", 1.0),
        [](rng_stream&, std::span<double> out) { out[0] = 0.0; });
  }
  if (name == "no_control_wiener") {
    return scenario_no_control(
        [](double, std::span<const double>, const CloudView&, std::span<double> out) {
          out[0] = 0.0;
        },
        [](double, std::span<const double>, const CloudView&, std::span<double> out) {
          out[0] = 1.0;
        },
        1, 1, sc.get_real("horizon", 1.0),
        [](rng_stream&, std::span<double> out) { out[0] = 0.0; });
  }
  throw std::runtime_error("unknown scenario '" + name + "'");
}

MonteCarloSettings load_mc(const ConfigNode& root, std::uint64_t seed) {
  MonteCarloSettings mc;
  const auto& grid = root.section("grid");
  mc.steps = static_cast<int>(grid.get_int("steps", 200));
  if (mc.steps < 2) throw std::runtime_error("config field grid.steps must be >= 2");
  const auto& mcn = root.section("mc");
  mc.replications = mcn.get_int("replications", 1000);
  if (mc.replications < 1) throw std::runtime_error("config field mc.replications must be >= 1");
  mc.distance_replications = mcn.get_int("distance_replications", 0);
  mc.seed = seed;
  return mc;
}

std::uint64_t resolve_seed(const ConfigNode& root, const CommonArgs& args) {
  if (args.seed_set) return args.seed;
  return static_cast<std::uint64_t>(root.section("mc").get_int("seed", 12345));
}

PolicyClass load_policy_class(const ConfigNode& root, double horizon) {
  PolicyClass cls;
  const auto& pc = root.section("policy_class");
  const std::string kind = pc.get_string("kind", "switch_sign");
  if (kind == "constants") {
    cls.kind = PolicyClass::Kind::constants;
    cls.grid_points_per_dim = static_cast<int>(pc.get_int("grid", 5));
  } else if (kind == "switch_sign") {
    cls.kind = PolicyClass::Kind::switch_sign;
    cls.switch_times = pc.get_real_list("taus", {0.0, horizon / 2.0});
    cls.sign_eta = pc.get_real("eta", 0.1);
  } else if (kind == "flow_sign") {
    cls.kind = PolicyClass::Kind::flow_sign;
    cls.sign_eta = pc.get_real("eta", 0.1);
  } else if (kind == "pointwise") {
    cls.kind = PolicyClass::Kind::pointwise;
  } else {
    throw std::runtime_error("unknown policy_class.kind '" + kind + "'");
  }
  return cls;
}

SearchSettings load_search(const ConfigNode& root, std::uint64_t seed) {
  SearchSettings s;
  const auto& sec = root.section("search");
  s.budget = sec.get_int("budget", 64);
  const std::string method = sec.get_string("method", "grid");
  if (method == "grid") {
    s.method = SearchSettings::Method::grid;
  } else if (method == "cross-entropy") {
    s.method = SearchSettings::Method::cross_entropy;
  } else {
    throw std::runtime_error("unknown search.method '" + method + "'");
  }
  s.seed = derive_seed(seed, "search");
  return s;
}

StrategyProfile load_profile(const ConfigNode& root, const CoefficientBundle& bundle, int n) {
  const auto& pf = root.section("profile");
  const std::string kind = pf.get_string("kind", "constant");
  if (kind == "constant") {
    const double a = pf.get_real("action", 0.0);
    return StrategyProfile::homogeneous(FeedbackPolicy::constant(bundle.actions, {a}), n);
  }
  if (kind == "sign_threshold") {
    auto p = FeedbackPolicy::sign_threshold(bundle.actions, pf.get_real("w0", 0.0),
                                            pf.get_real("wt", 0.0), pf.get_real("wx", 0.0),
                                            pf.get_real("wm", 1.0), pf.get_real("eta", 0.0));
    return StrategyProfile::homogeneous(p, n);
  }
  throw std::runtime_error("unknown profile.kind '" + kind + "'");
}

std::vector<int> load_n_list(const ConfigNode& root, std::vector<int> def) {
  const auto& run = root.section("run");
  if (!run.has("n_list")) return def;
  std::vector<int> ns;
  for (double v : run.get_real_list("n_list")) ns.push_back(static_cast<int>(v));
  if (ns.empty()) throw std::runtime_error("config field run.n_list must be nonempty");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw std::runtime_error("config field run.n_list must be ascending");
  return ns;
}

void write_rate_table(const fs::path& dir, const RateTable& table) {
  CsvWriter rate((dir / "rate.csv").string(), {"n", "estimate", "stderr"});
  for (const auto& row : table.rows)
    rate.row({cell(row.n), cell(row.estimate), cell(row.stderr_)});
  CsvWriter loglog((dir / "loglog.csv").string(), {"log_n", "log_estimate"});
  for (const auto& row : table.rows)
    loglog.row({cell(std::log(static_cast<double>(row.n))),
                cell(std::log(std::max(row.estimate, 1e-300)))});
}

void write_flow_csv(const fs::path& path, const MeasureFlow& flow) {
  std::vector<std::string> header{"step", "time", "particle"};
  for (int c = 0; c < flow.dim; ++c) header.push_back("x" + std::to_string(c));
  CsvWriter out(path.string(), header);
  for (int k = 0; k < flow.grid.points(); ++k) {
    for (int i = 0; i < flow.clouds[k].count(); ++i) {
      std::vector<std::string> row{cell(k), cell(flow.grid.time(k)), cell(i)};
      for (int c = 0; c < flow.dim; ++c) row.push_back(cell(flow.clouds[k].point(i)[c]));
      out.row(row);
    }
  }
}

struct SummaryWriter {
  std::ofstream out;
  bool all_pass = true;
  explicit SummaryWriter(const fs::path& path) : out(path) {}
  void line(const std::string& s) { out << s << "\n"; }
  void metric(const std::string& name, double v) { out << name << " = " << format_double(v) << "\n"; }
  void check(const std::string& name, bool pass) {
    out << (pass ? "PASS " : "FAIL ") << name << "\n";
    all_pass = all_pass && pass;
  }
};

// command implementations ------------------------------------------------

int cmd_validate(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const auto bundle = load_scenario(cfg.section("scenario"));
  ProbeSettings probe;
  const auto& pr = cfg.section("probe");
  probe.samples = pr.get_int("samples", 400);
  probe.radius = pr.get_real("radius", 2.0);
  probe.seed = seed;
  const auto report = validate_coefficients(bundle, probe);

  SummaryWriter sum(out / "summary.txt");
  sum.line("validate: scenario " + bundle.name);
  sum.metric("lipschitz_estimate", report.lipschitz_estimate);
  sum.metric("lipschitz_estimate_2r", report.lipschitz_estimate_2r);
  sum.metric("growth_estimate", report.growth_estimate);
  sum.metric("bound_estimate", report.bound_estimate);
  sum.metric("coercivity_margin", report.coercivity_margin);
  sum.metric("growth_violations", static_cast<double>(report.growth_violations));
  sum.check("finite", report.finite_pass);
  sum.check("lipschitz (A.4)", report.lipschitz_pass);
  sum.check("growth (A.4)", report.growth_pass);
  sum.check("coercivity (A.5)", report.coercivity_pass);

  CsvWriter wit((out / "witnesses.csv").string(), {"condition", "t", "value"});
  for (const auto& w : report.witnesses) wit.row({w.condition, cell(w.t), cell(w.value)});
  return report.pass() ? kExitPass : kExitThreshold;
}

int cmd_simulate(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const auto bundle = load_scenario(cfg.section("scenario"));
  const auto mc = load_mc(cfg, seed);
  const int n = static_cast<int>(cfg.section("run").get_int("n", 8));
  const long reps = cfg.section("run").get_int("trajectory_replications", 1);
  const auto profile = load_profile(cfg, bundle, n);

  std::vector<std::string> header{"replication", "player", "step", "time"};
  for (int c = 0; c < bundle.state_dim; ++c) header.push_back("state" + std::to_string(c));
  CsvWriter traj_csv((out / "trajectories.csv").string(), header);
  for (long r = 0; r < reps; ++r) {
    const auto noise = sample_noise(bundle, n, mc.steps, derive_seed(seed, "simulate", r));
    const auto traj = simulate_nplayer(bundle, profile, noise);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k <= mc.steps; ++k) {
        std::vector<std::string> row{cell(static_cast<long>(r)), cell(i), cell(k),
                                     cell(noise.grid.time(k))};
        for (int c = 0; c < bundle.state_dim; ++c) row.push_back(cell(traj.states[i].at(k)[c]));
        traj_csv.row(row);
      }
    if (r == 0) write_flow_csv(out / "flow.csv", traj.flow);
  }
  SummaryWriter sum(out / "summary.txt");
  sum.line("simulate: " + bundle.name + ", n = " + std::to_string(n));
  sum.check("completed", true);
  return kExitPass;
}

int cmd_nash_gap(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const auto bundle = load_scenario(cfg.section("scenario"));
  const auto mc = load_mc(cfg, seed);
  const int n = static_cast<int>(cfg.section("run").get_int("n", 8));
  const auto profile = load_profile(cfg, bundle, n);
  const auto cls = load_policy_class(cfg, bundle.horizon);
  const auto search = load_search(cfg, seed);

  std::vector<int> players;
  if (cfg.section("run").has("players")) {
    for (double v : cfg.section("run").get_real_list("players"))
      players.push_back(static_cast<int>(v));
  }
  const auto rep = nash_gap(bundle, profile, cls, search, mc,
                            players.empty() ? nullptr : &players);

  CsvWriter gaps((out / "gaps.csv").string(), {"player", "gap", "raw", "stderr", "policy"});
  double max_gap = 0.0;
  for (std::size_t i = 0; i < rep.players.size(); ++i) {
    gaps.row({cell(rep.players[i]), cell(rep.gap[i]), cell(rep.raw[i]), cell(rep.stderr_[i]),
              rep.best_responses[i].descriptor});
    max_gap = std::max(max_gap, rep.gap[i]);
  }
  SummaryWriter sum(out / "summary.txt");
  sum.line("nash-gap: class " + rep.policy_class);
  sum.metric("max_gap", max_gap);
  const double threshold = cfg.section("thresholds").get_real("max_gap", -1.0);
  if (threshold >= 0.0) sum.check("max_gap <= threshold", max_gap <= threshold);
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_mfg_solve(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const auto bundle = load_scenario(cfg.section("scenario"));
  auto mc = load_mc(cfg, seed);
  const auto cls = load_policy_class(cfg, bundle.horizon);
  const auto search = load_search(cfg, seed);
  const auto& solver = cfg.section("solver");
  SolveSettings settings;
  settings.max_iterations = static_cast<int>(solver.get_int("max_iterations", 25));
  settings.damping = solver.get_real("damping", 0.5);
  settings.tolerance = solver.get_real("tolerance", 0.05);
  settings.mc = mc;

  const auto slopes = solver.get_real_list("init_mean_slopes", {0.5});
  const double sigma = cfg.section("scenario").get_real("sigma", 1.0);

  SummaryWriter sum(out / "summary.txt");
  sum.line("mfg-solve: " + bundle.name);
  CsvWriter starts((out / "starts.csv").string(),
                   {"start", "init_slope", "mu_T", "residual", "iterations", "converged"});
  bool all_converged = true;
  for (std::size_t s = 0; s < slopes.size(); ++s) {
    TimeGrid grid{bundle.horizon, mc.steps};
    MeasureFlow init(grid, bundle.state_dim);
    for (int k = 0; k < grid.points(); ++k)
      init.clouds[k] = gaussian_stencil_cloud(slopes[s] * grid.time(k),
                                              sigma * std::sqrt(grid.time(k)),
                                              static_cast<int>(mc.replications));
    SolveSettings per = settings;
    per.mc.seed = derive_seed(seed, "solve-start", s);
    const auto [solution, trace] = solve_strong_mfg(bundle, init, cls, search, per);
    const auto& flow = solution.branches().front().flow;
    const double muT = flow.mean(flow.grid.points() - 1, 0);
    starts.row({cell(static_cast<long>(s)), cell(slopes[s]), cell(muT),
                cell(trace.residual_history.back()), cell(trace.iterations),
                cell(trace.converged ? 1L : 0L)});
    CsvWriter tr((out / ("trace_" + std::to_string(s) + ".csv")).string(),
                 {"iteration", "residual"});
    for (std::size_t it = 0; it < trace.residual_history.size(); ++it)
      tr.row({cell(static_cast<long>(it)), cell(trace.residual_history[it])});
    write_flow_csv(out / ("flow_" + std::to_string(s) + ".csv"), flow);
    sum.metric("mu_T[" + std::to_string(s) + "]", muT);
    sum.metric("residual[" + std::to_string(s) + "]", trace.residual_history.back());
    all_converged = all_converged && trace.converged;
  }
  sum.check("all starts converged", all_converged);
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_example33(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const double sigma = cfg.section("scenario").get_real("sigma", 1.0);
  const auto bundle = scenario_example33(sigma);
  auto mc = load_mc(cfg, seed);
  const int particles = static_cast<int>(mc.replications);

  SummaryWriter sum(out / "summary.txt");
  sum.line("example33 closed forms, sigma = " + format_double(sigma));

  CsvWriter branches((out / "branches.csv").string(), {"kind", "label", "mu_T", "residual"});
  const auto strong = example33_strong_solutions(sigma, mc.steps, particles);
  const std::vector<double> targets{2.0, 0.0, -2.0};
  bool residuals_ok = true;
  for (std::size_t i = 0; i < strong.size(); ++i) {
    MonteCarloSettings rmc = mc;
    rmc.seed = derive_seed(seed, "strong-resid", i);
    const double res = consistency_residual(bundle, strong[i].first, strong[i].second, rmc);
    const double muT = strong[i].first.mean(mc.steps, 0);
    branches.row({"strong", cell(targets[i] / 2.0), cell(muT), cell(res)});
    residuals_ok = residuals_ok && res < 0.05;
  }
  sum.check("strong branch residuals < 0.05", residuals_ok);

  // weak branch sampler frequency
  const long draws = cfg.section("run").get_int("weak_draws", 10000);
  long plus = 0;
  for (long s = 0; s < draws; ++s)
    if (example33_weak_solution(derive_seed(seed, "weak", s), sigma, 8, 2).gamma > 0) ++plus;
  const double freq = static_cast<double>(plus) / draws;
  sum.metric("weak_gamma_plus_frequency", freq);
  sum.check("branch frequency in [0.485, 0.515]", freq >= 0.485 && freq <= 0.515);

  const auto weak = example33_weak_solution_sample(sigma, mc.steps, particles);
  bool weak_ok = true;
  for (const auto& branch : weak.branches()) {
    MonteCarloSettings rmc = mc;
    rmc.seed = derive_seed(seed, "weak-resid", static_cast<std::uint64_t>(branch.label > 0));
    const double res = consistency_residual(
        bundle, branch.flow,
        example33_optimal_policy(bundle.actions,
                                 [g = branch.label](double t) { return t > 1.0 ? g : 0.0; }),
        rmc);
    const double muT = branch.flow.mean(mc.steps, 0);
    branches.row({"weak", cell(branch.label), cell(muT), cell(res)});
    weak_ok = weak_ok && res < 0.05 && std::abs(muT - branch.label) < 0.05;
  }
  sum.check("weak branch residuals and means", weak_ok);
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_chaos_rate(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  auto sc = cfg.section("scenario");
  CoefficientBundle bundle =
      sc.has("name") ? load_scenario(sc) : scenario_mean_coupled(0.5);
  const auto mc = load_mc(cfg, seed);
  const auto n_list = load_n_list(cfg, {8, 16, 32, 64, 128, 256});
  auto family = [&bundle](int n) {
    return StrategyProfile::homogeneous(
        FeedbackPolicy::parametric(bundle.actions, "state_feedback",
                                   [](double, std::span<const double> x, const CloudView&,
                                      std::span<double> o) { o[0] = -0.5 * x[0]; }),
        n);
  };
  const auto table = run_chaos_rate(bundle, family, n_list, mc);
  write_rate_table(out, table);
  SummaryWriter sum(out / "summary.txt");
  sum.line("chaos-rate: " + bundle.name);
  sum.metric("fitted_slope", table.fitted_slope);
  sum.metric("r_squared", table.r_squared);
  const double slope_max = cfg.section("thresholds").get_real("slope_max", -0.7);
  const double r2_min = cfg.section("thresholds").get_real("r2_min", 0.9);
  sum.check("slope <= slope_max", table.fitted_slope <= slope_max);
  sum.check("r2 >= r2_min", table.r_squared >= r2_min);
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_propagation(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const double sigma = cfg.section("scenario").get_real("sigma", 1.0);
  const auto bundle = scenario_example33(sigma);
  const auto mc = load_mc(cfg, seed);
  const auto n_list = load_n_list(cfg, {16, 32, 64, 128, 256});
  const int flow_particles =
      static_cast<int>(cfg.section("run").get_int("flow_particles", 2000));
  const auto solution = example33_weak_solution_sample(sigma, mc.steps, flow_particles);
  const auto table = run_pathwise_propagation(bundle, solution, n_list, mc);
  write_rate_table(out, table);
  SummaryWriter sum(out / "summary.txt");
  sum.line("propagation: example33");
  bool decreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    decreasing = decreasing && table.rows[i].estimate < table.rows[i - 1].estimate;
  const double ratio = cfg.section("thresholds").get_real("decay_ratio", 4.0);
  sum.metric("first", table.rows.front().estimate);
  sum.metric("final", table.rows.back().estimate);
  sum.check("strictly decreasing", decreasing);
  sum.check("final < first / ratio",
            table.rows.back().estimate < table.rows.front().estimate / ratio);
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_limit(const ConfigNode& cfg, const fs::path& out, std::uint64_t seed) {
  const double sigma = cfg.section("scenario").get_real("sigma", 1.0);
  const auto bundle = scenario_example33(sigma);
  const auto mc = load_mc(cfg, seed);
  const auto n_list = load_n_list(cfg, {16, 32, 64});
  const int flow_particles =
      static_cast<int>(cfg.section("run").get_int("flow_particles", 2000));
  const auto solution = example33_weak_solution_sample(sigma, mc.steps, flow_particles);

  auto equilibria = [&solution](int n) {
    StrategyProfile p;
    p.players.resize(n);
    for (int i = 0; i < n; ++i)
      p.players[i].sampler = [&solution](int, std::uint64_t noise_seed) {
        return solution.sample_branch(derive_seed(noise_seed, "branch")).control_template;
      };
    return p;
  };
  const auto stats = run_limit_experiment(bundle, equilibria, solution, n_list, mc);
  write_rate_table(out, stats.table);

  CsvWriter freq((out / "branch_frequency.csv").string(), {"branch_label", "frequency"});
  for (std::size_t b = 0; b < stats.branch_frequency.size(); ++b)
    freq.row({cell(solution.branches()[b].label), cell(stats.branch_frequency[b])});
  CsvWriter term((out / "terminal_means.csv").string(), {"replication", "terminal_mean"});
  for (std::size_t r = 0; r < stats.terminal_means.size(); ++r)
    term.row({cell(static_cast<long>(r)), cell(stats.terminal_means[r])});

  SummaryWriter sum(out / "summary.txt");
  sum.line("limit: example33 converse profiles");
  bool decreasing = true;
  for (std::size_t i = 1; i < stats.table.rows.size(); ++i)
    decreasing = decreasing && stats.table.rows[i].estimate < stats.table.rows[i - 1].estimate;
  sum.check("distance decreasing", decreasing);

  // optional converse eps_n decay table
  if (cfg.section("converse").get_bool("enabled", false)) {
    const auto cls = load_policy_class(cfg, bundle.horizon);
    const auto search = load_search(cfg, seed);
    CsvWriter conv((out / "converse.csv").string(),
                   {"n", "epsilon", "epsilon_stderr", "distance", "value"});
    std::vector<double> eps;
    for (int n : n_list) {
      MonteCarloSettings cmc = mc;
      cmc.seed = derive_seed(seed, "converse", static_cast<std::uint64_t>(n));
      const auto [profile, rep] = converse_equilibrium(bundle, solution, n, cls, search, cmc);
      conv.row({cell(static_cast<long>(n)), cell(rep.epsilon), cell(rep.epsilon_stderr),
                cell(rep.distance_to_solution), cell(rep.value_mean)});
      eps.push_back(rep.epsilon);
    }
    sum.check("epsilon decreasing overall", eps.back() < eps.front());
  }
  return sum.all_pass ? kExitPass : kExitThreshold;
}

int cmd_wasserstein(const std::string& file_a, const std::string& file_b, double p) {
  auto read_cloud = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell_text;
      while (std::getline(ss, cell_text, ',')) row.push_back(std::stod(cell_text));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty cloud file " + path);
    ParticleCloud cloud(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        cloud.point(static_cast<int>(i))[static_cast<int>(j)] = rows[i][j];
    return cloud;
  };
  const double d = wasserstein_clouds(p, read_cloud(file_a), read_cloud(file_b));
  std::cout << format_double(d) << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfglab: a numerical laboratory for symmetric n-player stochastic "
               "differential games with mean-field coupling"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  args.out_dir = default_out_dir();

  const std::vector<std::string> commands{"validate",   "simulate", "nash-gap",
                                          "mfg-solve",  "example33", "chaos-rate",
                                          "propagation", "limit"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "configuration file")->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "root seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_option("--threads", args.threads, "parallelism degree (0 = cores)");
    subs[name] = sub;
  }
  std::string wasserstein_a, wasserstein_b;
  double wasserstein_p = 2.0;
  CLI::App* wcmd = app.add_subcommand("wasserstein", "exact W_p between two point-cloud CSVs");
  wcmd->add_option("a", wasserstein_a, "first cloud CSV")->required();
  wcmd->add_option("b", wasserstein_b, "second cloud CSV")->required();
  wcmd->add_option("--p", wasserstein_p, "Wasserstein exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (wcmd->parsed()) return cmd_wasserstein(wasserstein_a, wasserstein_b, wasserstein_p);

    std::string command;
    for (const auto& name : commands)
      if (subs[name]->parsed()) command = name;

    ConfigNode cfg;
    std::uint64_t seed = 0;
    try {
      cfg = parse_config_file(args.config_path);
      seed = resolve_seed(cfg, args);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitUsage;
    }
    if (args.threads > 0) set_parallel_threads(args.threads);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    write_manifest(out, command, cfg, seed);

    int rc = kExitRuntime;
    try {
      if (command == "validate") rc = cmd_validate(cfg, out, seed);
      else if (command == "simulate") rc = cmd_simulate(cfg, out, seed);
      else if (command == "nash-gap") rc = cmd_nash_gap(cfg, out, seed);
      else if (command == "mfg-solve") rc = cmd_mfg_solve(cfg, out, seed);
      else if (command == "example33") rc = cmd_example33(cfg, out, seed);
      else if (command == "chaos-rate") rc = cmd_chaos_rate(cfg, out, seed);
      else if (command == "propagation") rc = cmd_propagation(cfg, out, seed);
      else if (command == "limit") rc = cmd_limit(cfg, out, seed);
      cfg.check_all_consumed();
      return rc;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::ofstream sum(fs::path(args.out_dir) / "summary.txt", std::ios::app);
    sum << "ERROR " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
