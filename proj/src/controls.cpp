#include "mfglab/controls.hpp"

#include <cmath>
#include <stdexcept>

#include "mfglab/rng.hpp"

namespace mfglab {

double RelaxedControlPath::action_moment(double qexp) const {
  const double dt = grid.dt();
  double total = 0.0;
  for (const auto& step : steps) {
    for (std::size_t j = 0; j < step.atoms.size(); ++j) {
      double s = 0.0;
      for (double c : step.atoms[j]) s += c * c;
      total += dt * step.weights[j] * std::pow(std::sqrt(s), qexp);
    }
  }
  return total;
}

void RelaxedControlPath::validate(const ActionSet* actions) const {
  if (static_cast<int>(steps.size()) != grid.steps)
    throw std::invalid_argument("RelaxedControlPath: step count does not match grid");
  for (const auto& step : steps) {
    if (step.atoms.empty() || step.atoms.size() != step.weights.size())
      throw std::invalid_argument("RelaxedControlPath: malformed step measure");
    double sum = 0.0;
    for (std::size_t j = 0; j < step.weights.size(); ++j) {
      if (step.weights[j] < -1e-15)
        throw std::invalid_argument("RelaxedControlPath: negative weight");
      if (static_cast<int>(step.atoms[j].size()) != action_dim)
        throw std::invalid_argument("RelaxedControlPath: atom dimension mismatch");
      sum += step.weights[j];
      if (actions && !actions->contains(step.atoms[j], 1e-9))
        throw std::invalid_argument("RelaxedControlPath: atom outside the action set");
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("RelaxedControlPath: step weights do not sum to 1");
  }
}

RelaxedControlPath RelaxedControlPath::refine(int factor) const {
  if (factor < 1) throw std::invalid_argument("RelaxedControlPath::refine: factor must be >= 1");
  RelaxedControlPath out;
  out.grid = TimeGrid{grid.horizon, grid.steps * factor};
  out.action_dim = action_dim;
  out.steps.reserve(static_cast<std::size_t>(grid.steps) * factor);
  for (const auto& step : steps)
    for (int s = 0; s < factor; ++s) out.steps.push_back(step);
  return out;
}

RelaxedControlPath RelaxedControlPath::strict_constant(TimeGrid grid, std::vector<double> action) {
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = static_cast<int>(action.size());
  q.steps.assign(grid.steps, StepMeasure{{action}, {1.0}});
  return q;
}

RelaxedControlPath RelaxedControlPath::strict_from_actions(
    TimeGrid grid, const std::vector<std::vector<double>>& per_step) {
  if (static_cast<int>(per_step.size()) != grid.steps)
    throw std::invalid_argument("strict_from_actions: need one action per step");
  RelaxedControlPath q;
  q.grid = grid;
  q.action_dim = static_cast<int>(per_step.front().size());
  q.steps.reserve(per_step.size());
  for (const auto& a : per_step) q.steps.push_back(StepMeasure{{a}, {1.0}});
  return q;
}

FeedbackPolicy FeedbackPolicy::constant(const ActionSet& as, std::vector<double> a) {
  std::string desc = "constant(";
  for (std::size_t j = 0; j < a.size(); ++j) desc += (j ? "," : "") + std::to_string(a[j]);
  desc += ")";
  FeedbackPolicy p;
  p.descriptor = desc;
  p.actions = as;
  p.eval = [a](double, std::span<const double>, const CloudView&, std::span<double> out) {
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j];
  };
  return p;
}

FeedbackPolicy FeedbackPolicy::sign_threshold(const ActionSet& as, double w0, double wt, double wx,
                                              double wm, double eta) {
  FeedbackPolicy p;
  p.descriptor = "sign_threshold(w0=" + std::to_string(w0) + ",wt=" + std::to_string(wt) +
                 ",wx=" + std::to_string(wx) + ",wm=" + std::to_string(wm) + ")";
  p.actions = as;
  p.eval = [w0, wt, wx, wm, eta](double t, std::span<const double> x, const CloudView& cloud,
                                 std::span<double> out) {
    double v = w0 + wt * t;
    if (wx != 0.0) v += wx * x[0];
    if (wm != 0.0) v += wm * cloud.mean(0);
    out[0] = sign_eta(v, eta);
    for (std::size_t j = 1; j < out.size(); ++j) out[j] = 0.0;
  };
  return p;
}

FeedbackPolicy FeedbackPolicy::table(const ActionSet& as, TimeGrid grid, double x_lo, double x_hi,
                                     int x_cells, std::vector<std::vector<double>> values) {
  if (x_cells < 1 || static_cast<int>(values.size()) != grid.points() * x_cells)
    throw std::invalid_argument("FeedbackPolicy::table: need points() * x_cells entries");
  FeedbackPolicy p;
  p.descriptor = "table(" + std::to_string(grid.points()) + "x" + std::to_string(x_cells) + ")";
  p.actions = as;
  p.eval = [grid, x_lo, x_hi, x_cells, values = std::move(values)](
               double t, std::span<const double> x, const CloudView&, std::span<double> out) {
    int kt = static_cast<int>(std::lround(t / grid.dt()));
    kt = std::min(std::max(kt, 0), grid.points() - 1);
    const double frac = (x[0] - x_lo) / (x_hi - x_lo);
    int kx = static_cast<int>(std::floor(frac * x_cells));
    kx = std::min(std::max(kx, 0), x_cells - 1);
    const auto& a = values[static_cast<std::size_t>(kt) * x_cells + kx];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j];
  };
  return p;
}

FeedbackPolicy FeedbackPolicy::parametric(
    const ActionSet& as, std::string descriptor,
    std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> fn) {
  FeedbackPolicy p;
  p.descriptor = std::move(descriptor);
  p.actions = as;
  p.eval = std::move(fn);
  return p;
}

RelaxedControlPath chattering(const RelaxedControlPath& q, int refinement, std::uint64_t seed) {
  if (refinement < 1) throw std::invalid_argument("chattering: refinement must be >= 1");
  RelaxedControlPath out;
  out.grid = TimeGrid{q.grid.horizon, q.grid.steps * refinement};
  out.action_dim = q.action_dim;
  out.steps.reserve(static_cast<std::size_t>(out.grid.steps));
  for (int k = 0; k < q.grid.steps; ++k) {
    const auto& step = q.steps[k];
    // cumulative weights for inverse-CDF selection
    std::vector<double> cum(step.weights.size());
    double run = 0.0;
    for (std::size_t j = 0; j < step.weights.size(); ++j) {
      run += step.weights[j];
      cum[j] = run;
    }
    rng_stream rng(derive_seed(seed, "chatter", static_cast<std::uint64_t>(k)));
    for (int s = 0; s < refinement; ++s) {
      // stratified: one draw per substep inside its own quantile stratum, so
      // empirical frequencies match the weights to within 1/refinement
      const double u = (s + rng.uniform()) / refinement;
      std::size_t pick = 0;
      while (pick + 1 < cum.size() && u >= cum[pick]) ++pick;
      out.steps.push_back(RelaxedControlPath::StepMeasure{{step.atoms[pick]}, {1.0}});
    }
  }
  return out;
}

RelaxedControlPath truncate_actions(const RelaxedControlPath& q, double k) {
  if (k <= 0.0) throw std::invalid_argument("truncate_actions: k must be positive");
  RelaxedControlPath out = q;
  for (auto& step : out.steps) {
    for (auto& atom : step.atoms) {
      double norm = 0.0;
      for (double c : atom) norm += c * c;
      norm = std::sqrt(norm);
      if (norm > k) {
        const double f = k / norm;
        for (double& c : atom) c *= f;
      }
    }
  }
  return out;
}

RelaxedControlPath policy_to_control(const FeedbackPolicy& policy, const PathSample& own_path,
                                     const MeasureFlow& flow) {
  require_same_grid(own_path.grid, flow.grid, "policy_to_control");
  RelaxedControlPath q;
  q.grid = own_path.grid;
  q.action_dim = policy.actions.dim;
  q.steps.reserve(static_cast<std::size_t>(q.grid.steps));
  std::vector<double> a(policy.actions.dim);
  for (int k = 0; k < q.grid.steps; ++k) {
    const CloudView view = flow.view(k);
    policy(q.grid.time(k), own_path.at(k), view, a);
    q.steps.push_back(RelaxedControlPath::StepMeasure{{a}, {1.0}});
  }
  return q;
}

}  // namespace mfglab
