#include "mfglab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfglab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pow_p(double base, double p) {
  if (p == 1.0) return base;
  if (p == 2.0) return base * base;
  if (p == 3.0) return base * base * base;
  return std::pow(base, p);
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

// Exact 1-d empirical W_p via the quantile-function integral; handles unequal
// sample counts.
double wasserstein_1d_quantile(double p, std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  if (n == m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += pow_p(std::abs(a[i] - b[i]), p);
    return std::pow(s / n, 1.0 / p);
  }
  // integrate |F_a^{-1}(u) - F_b^{-1}(u)|^p over merged breakpoints
  double s = 0.0;
  std::size_t i = 0, j = 0;
  double u = 0.0;
  while (i < n && j < m) {
    const double ua = static_cast<double>(i + 1) / n;
    const double ub = static_cast<double>(j + 1) / m;
    const double next = std::min(ua, ub);
    s += (next - u) * pow_p(std::abs(a[i] - b[j]), p);
    u = next;
    if (ua <= next + 1e-15) ++i;
    if (ub <= next + 1e-15) ++j;
  }
  return std::pow(s, 1.0 / p);
}

}  // namespace

// Shortest-augmenting-path assignment with potentials, O(n^3).
double solve_assignment(const std::vector<double>& cost, int n) {
  if (n <= 0) throw std::invalid_argument("solve_assignment: empty instance");
  if (n > assignment_budget)
    throw std::invalid_argument("solve_assignment: instance exceeds the exact-solver budget of " +
                                std::to_string(assignment_budget));
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    total += cost[static_cast<std::size_t>(match[j] - 1) * n + (j - 1)];
  return total;
}

// Transportation problem by successive shortest augmenting paths: Dijkstra
// with node potentials over a super-source / super-sink residual graph. The
// Dijkstra predecessor structure is a tree by construction, and potentials
// keep reduced costs nonnegative (clamped against float dust). Each
// augmentation exhausts a supply or a demand, so at most n_a + n_b rounds.
double solve_transport(const std::vector<double>& cost, const std::vector<double>& supply,
                       const std::vector<double>& demand) {
  const int na = static_cast<int>(supply.size());
  const int nb = static_cast<int>(demand.size());
  if (na == 0 || nb == 0) throw std::invalid_argument("solve_transport: empty instance");
  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supply) total_supply += s;
  for (double d : demand) total_demand += d;
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(total_supply, 1.0))
    throw std::invalid_argument("solve_transport: supply and demand masses differ");

  // nodes: [0, na) sources, [na, na+nb) sinks, S = na+nb, T = na+nb+1
  const int S = na + nb, T = na + nb + 1, V = na + nb + 2;
  std::vector<double> rem_s = supply, rem_d = demand;
  std::vector<double> flow(static_cast<std::size_t>(na) * nb, 0.0);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<int> prev(V);
  std::vector<char> done(V);
  const double eps = 1e-15 * std::max(total_supply, 1.0);

  double remaining = total_supply;
  while (remaining > eps) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    dist[S] = 0.0;
    for (;;) {
      int u = -1;
      for (int v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      if (u < 0 || u == T) break;
      done[u] = 1;
      auto relax = [&](int v, double edge_cost) {
        const double rc = std::max(0.0, edge_cost + pot[u] - pot[v]);
        if (!done[v] && dist[u] + rc < dist[v]) {
          dist[v] = dist[u] + rc;
          prev[v] = u;
        }
      };
      if (u == S) {
        for (int i = 0; i < na; ++i)
          if (rem_s[i] > eps) relax(i, 0.0);
      } else if (u < na) {
        for (int j = 0; j < nb; ++j) relax(na + j, cost[static_cast<std::size_t>(u) * nb + j]);
      } else {
        const int j = u - na;
        if (rem_d[j] > eps) relax(T, 0.0);
        for (int i = 0; i < na; ++i)
          if (flow[static_cast<std::size_t>(i) * nb + j] > eps)
            relax(i, -cost[static_cast<std::size_t>(i) * nb + j]);
      }
    }
    if (dist[T] >= kInf) break;  // only float dust left
    for (int v = 0; v < V; ++v) pot[v] += std::min(dist[v], dist[T]);

    // bottleneck along the tree path
    double push = remaining;
    for (int v = T; prev[v] != -1; v = prev[v]) {
      const int u = prev[v];
      if (u == S) push = std::min(push, rem_s[v]);
      else if (v == T) push = std::min(push, rem_d[u - na]);
      else if (u >= na && v < na)
        push = std::min(push, flow[static_cast<std::size_t>(v) * nb + (u - na)]);
    }
    if (push <= eps) break;
    for (int v = T; prev[v] != -1; v = prev[v]) {
      const int u = prev[v];
      if (u == S) rem_s[v] -= push;
      else if (v == T) rem_d[u - na] -= push;
      else if (u < na && v >= na)
        flow[static_cast<std::size_t>(u) * nb + (v - na)] += push;
      else
        flow[static_cast<std::size_t>(v) * nb + (u - na)] -= push;
    }
    remaining -= push;
  }

  double total = 0.0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      total += flow[static_cast<std::size_t>(i) * nb + j] * cost[static_cast<std::size_t>(i) * nb + j];
  return total;
}

double wasserstein_clouds(double p, const CloudView& a, const CloudView& b) {
  if (p < 1.0) throw std::invalid_argument("wasserstein_clouds: p must be >= 1");
  if (a.count() == 0 || b.count() == 0)
    throw std::invalid_argument("wasserstein_clouds: empty cloud");
  if (a.dim() != b.dim()) throw std::invalid_argument("wasserstein_clouds: dimension mismatch");

  const int d = a.dim();
  if (d == 1) {
    std::vector<double> xs(a.count()), ys(b.count());
    for (int i = 0; i < a.count(); ++i) xs[i] = a.point(i)[0];
    for (int i = 0; i < b.count(); ++i) ys[i] = b.point(i)[0];
    return wasserstein_1d_quantile(p, std::move(xs), std::move(ys));
  }

  if (a.count() == b.count()) {
    const int n = a.count();
    if (n > assignment_budget)
      throw std::invalid_argument("wasserstein_clouds: cloud size exceeds exact-solver budget");
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        cost[static_cast<std::size_t>(i) * n + j] = pow_p(euclid(a.point(i), b.point(j)), p);
    return std::pow(solve_assignment(cost, n) / n, 1.0 / p);
  }

  if (a.count() + b.count() > 64)
    throw std::invalid_argument(
        "wasserstein_clouds: unequal-count instances are limited to 64 total atoms");
  std::vector<double> cost(static_cast<std::size_t>(a.count()) * b.count());
  for (int i = 0; i < a.count(); ++i)
    for (int j = 0; j < b.count(); ++j)
      cost[static_cast<std::size_t>(i) * b.count() + j] = pow_p(euclid(a.point(i), b.point(j)), p);
  std::vector<double> supply(a.count(), 1.0 / a.count());
  std::vector<double> demand(b.count(), 1.0 / b.count());
  return std::pow(solve_transport(cost, supply, demand), 1.0 / p);
}

double wasserstein_clouds(double p, const ParticleCloud& a, const ParticleCloud& b) {
  return wasserstein_clouds(p, CloudView(a), CloudView(b));
}

double wasserstein_1d(double p, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein_1d: unequal lengths");
  if (a.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  const bool sorted_a = std::is_sorted(a.begin(), a.end());
  const bool sorted_b = std::is_sorted(b.begin(), b.end());
  if (sorted_a && sorted_b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += pow_p(std::abs(a[i] - b[i]), p);
    return std::pow(s / a.size(), 1.0 / p);
  }
  // defensive sort on copies, O(n log n)
  return wasserstein_1d_quantile(p, a, b);
}

double truncated_sup_distance(const PathSample& x, const PathSample& y, double t) {
  require_same_grid(x.grid, y.grid, "truncated_sup_distance");
  if (x.dim != y.dim) throw std::invalid_argument("truncated_sup_distance: dimension mismatch");
  if (t < -1e-12 || t > x.grid.horizon + 1e-12)
    throw std::invalid_argument("truncated_sup_distance: t outside [0, T]");
  int upto = 0;
  for (int k = 0; k < x.grid.points(); ++k)
    if (x.grid.time(k) <= t + 1e-12) upto = k;
  return sup_norm_diff(x, y, upto);
}

namespace {

// W_p^p between two finitely supported probability measures on actions.
double step_measure_cost(double p, const RelaxedControlPath::StepMeasure& q1,
                         const RelaxedControlPath::StepMeasure& q2) {
  if (q1.atoms.size() == 1 && q2.atoms.size() == 1)
    return pow_p(euclid(std::span<const double>(q1.atoms[0]), std::span<const double>(q2.atoms[0])),
                 p);
  const int na = static_cast<int>(q1.atoms.size());
  const int nb = static_cast<int>(q2.atoms.size());
  std::vector<double> cost(static_cast<std::size_t>(na) * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      cost[static_cast<std::size_t>(i) * nb + j] =
          pow_p(euclid(std::span<const double>(q1.atoms[i]), std::span<const double>(q2.atoms[j])), p);
  return solve_transport(cost, q1.weights, q2.weights);
}

// lift controls onto a common grid when one refines the other
void align_grids(RelaxedControlPath& a, RelaxedControlPath& b) {
  if (a.grid == b.grid) return;
  if (a.grid.refines_to(b.grid)) {
    a = a.refine(b.grid.steps / a.grid.steps);
    return;
  }
  if (b.grid.refines_to(a.grid)) {
    b = b.refine(a.grid.steps / b.grid.steps);
    return;
  }
  throw std::invalid_argument("control_distance: grid mismatch (no common refinement)");
}

}  // namespace

double control_distance(double p, const RelaxedControlPath& q1_in, const RelaxedControlPath& q2_in,
                        ControlDistanceMode mode) {
  RelaxedControlPath q1 = q1_in, q2 = q2_in;
  align_grids(q1, q2);
  const double dt = q1.grid.dt();
  const double horizon = q1.grid.horizon;

  if (mode == ControlDistanceMode::diagonal) {
    double s = 0.0;
    for (int k = 0; k < q1.grid.steps; ++k) s += dt * step_measure_cost(p, q1.steps[k], q2.steps[k]);
    return std::pow(s, 1.0 / p);
  }

  // exact: discrete OT on [0,T] x A atoms, time marginals fixed to the
  // uniform grid measure, cost |t - t'|^p + |a - a'|^p
  const int total = q1.total_atoms() + q2.total_atoms();
  if (total > 64)
    throw std::invalid_argument("control_distance: exact mode limited to 64 total atoms, got " +
                                std::to_string(total));
  struct Atom {
    double t;
    const std::vector<double>* a;
    double mass;
  };
  auto collect = [](const RelaxedControlPath& q) {
    std::vector<Atom> atoms;
    const double step_mass = 1.0 / q.grid.steps;
    for (int k = 0; k < q.grid.steps; ++k) {
      for (std::size_t j = 0; j < q.steps[k].atoms.size(); ++j)
        atoms.push_back({q.grid.time(k), &q.steps[k].atoms[j], step_mass * q.steps[k].weights[j]});
    }
    return atoms;
  };
  const auto atoms1 = collect(q1);
  const auto atoms2 = collect(q2);
  std::vector<double> cost(atoms1.size() * atoms2.size());
  for (std::size_t i = 0; i < atoms1.size(); ++i)
    for (std::size_t j = 0; j < atoms2.size(); ++j)
      cost[i * atoms2.size() + j] =
          pow_p(std::abs(atoms1[i].t - atoms2[j].t), p) +
          pow_p(euclid(std::span<const double>(*atoms1[i].a), std::span<const double>(*atoms2[j].a)),
                p);
  std::vector<double> supply(atoms1.size()), demand(atoms2.size());
  for (std::size_t i = 0; i < atoms1.size(); ++i) supply[i] = atoms1[i].mass;
  for (std::size_t j = 0; j < atoms2.size(); ++j) demand[j] = atoms2[j].mass;
  return std::pow(horizon * solve_transport(cost, supply, demand), 1.0 / p);
}

double triple_distance(double p, const PathTriple& a, const PathTriple& b,
                       ControlDistanceMode mode) {
  const double horizon = a.state.grid.horizon;
  return truncated_sup_distance(a.noise, b.noise, horizon) +
         control_distance(p, a.control, b.control, mode) +
         truncated_sup_distance(a.state, b.state, horizon);
}

void EmpiricalPathMeasure::validate() const {
  if (triples.empty()) throw std::invalid_argument("EmpiricalPathMeasure: empty");
  const TimeGrid& g = triples.front().state.grid;
  for (const auto& t : triples) {
    require_same_grid(t.state.grid, g, "EmpiricalPathMeasure");
    require_same_grid(t.noise.grid, g, "EmpiricalPathMeasure");
    require_same_grid(t.control.grid, g, "EmpiricalPathMeasure");
  }
}

double path_measure_distance(double p, const EmpiricalPathMeasure& mu1,
                             const EmpiricalPathMeasure& mu2, ControlDistanceMode mode) {
  mu1.validate();
  mu2.validate();
  if (mu1.triples.size() != mu2.triples.size())
    throw std::invalid_argument("path_measure_distance: triple counts differ");
  require_same_grid(mu1.triples.front().state.grid, mu2.triples.front().state.grid,
                    "path_measure_distance");
  const int n = static_cast<int>(mu1.triples.size());
  if (n == 1) return triple_distance(p, mu1.triples[0], mu2.triples[0], mode);
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[static_cast<std::size_t>(i) * n + j] =
          pow_p(triple_distance(p, mu1.triples[i], mu2.triples[j], mode), p);
  return std::pow(solve_assignment(cost, n) / n, 1.0 / p);
}

}  // namespace mfglab
