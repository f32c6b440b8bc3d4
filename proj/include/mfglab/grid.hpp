#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfglab {

// Uniform time grid t_k = k*T/steps, k = 0..steps.
struct TimeGrid {
  double horizon = 0.0;
  int steps = 0;

  double dt() const { return horizon / steps; }
  int points() const { return steps + 1; }
  double time(int k) const { return horizon * static_cast<double>(k) / steps; }

  bool operator==(const TimeGrid& o) const {
    return steps == o.steps && horizon == o.horizon;
  }

  // true if `fine` subdivides this grid
  bool refines_to(const TimeGrid& fine) const {
    return fine.horizon == horizon && fine.steps % steps == 0;
  }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

// Discretized continuous path: values at every grid point.
struct PathSample {
  TimeGrid grid;
  int dim = 0;
  std::vector<double> values;  // points() x dim, row-major

  PathSample() = default;
  PathSample(TimeGrid g, int d) : grid(g), dim(d), values(static_cast<std::size_t>(g.points()) * d, 0.0) {}

  std::span<const double> at(int k) const {
    return {values.data() + static_cast<std::size_t>(k) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> at(int k) {
    return {values.data() + static_cast<std::size_t>(k) * dim, static_cast<std::size_t>(dim)};
  }
};

inline double sup_norm_diff(const PathSample& x, const PathSample& y, int upto_point) {
  double m = 0.0;
  for (int k = 0; k <= upto_point; ++k) {
    double s = 0.0;
    auto xs = x.at(k);
    auto ys = y.at(k);
    for (int j = 0; j < x.dim; ++j) {
      const double d = xs[j] - ys[j];
      s += d * d;
    }
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

}  // namespace mfglab
