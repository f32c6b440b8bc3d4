#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfglab/rng.hpp"

namespace mfglab {

// Closed action set A: box, ball, or finite atom list.
struct ActionSet {
  enum class Kind { box, ball, finite };

  Kind kind = Kind::box;
  int dim = 0;
  std::vector<double> lower, upper;               // box
  std::vector<double> center;                     // ball
  double radius = 0.0;                            // ball
  std::vector<std::vector<double>> atoms;         // finite

  static ActionSet box(std::vector<double> lo, std::vector<double> hi) {
    ActionSet s;
    s.kind = Kind::box;
    s.dim = static_cast<int>(lo.size());
    if (hi.size() != lo.size()) throw std::invalid_argument("ActionSet::box: bound sizes differ");
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (lo[j] > hi[j]) throw std::invalid_argument("ActionSet::box: lower > upper");
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    return s;
  }

  static ActionSet interval(double lo, double hi) { return box({lo}, {hi}); }

  static ActionSet ball(std::vector<double> c, double r) {
    if (r <= 0.0) throw std::invalid_argument("ActionSet::ball: radius must be positive");
    ActionSet s;
    s.kind = Kind::ball;
    s.dim = static_cast<int>(c.size());
    s.center = std::move(c);
    s.radius = r;
    return s;
  }

  static ActionSet finite(std::vector<std::vector<double>> as) {
    if (as.empty()) throw std::invalid_argument("ActionSet::finite: need at least one atom");
    ActionSet s;
    s.kind = Kind::finite;
    s.dim = static_cast<int>(as.front().size());
    for (const auto& a : as)
      if (static_cast<int>(a.size()) != s.dim)
        throw std::invalid_argument("ActionSet::finite: atom dimensions differ");
    s.atoms = std::move(as);
    return s;
  }

  static ActionSet singleton(std::vector<double> a) { return finite({std::move(a)}); }

  bool is_singleton() const { return kind == Kind::finite && atoms.size() == 1; }

  // Project a into the set (in place).
  void clamp(std::span<double> a) const {
    switch (kind) {
      case Kind::box:
        for (int j = 0; j < dim; ++j) a[j] = std::min(std::max(a[j], lower[j]), upper[j]);
        break;
      case Kind::ball: {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double d = a[j] - center[j];
          s += d * d;
        }
        s = std::sqrt(s);
        if (s > radius) {
          const double f = radius / s;
          for (int j = 0; j < dim; ++j) a[j] = center[j] + f * (a[j] - center[j]);
        }
        break;
      }
      case Kind::finite: {
        double best = -1.0;
        const std::vector<double>* pick = nullptr;
        for (const auto& atom : atoms) {
          double s = 0.0;
          for (int j = 0; j < dim; ++j) {
            const double d = a[j] - atom[j];
            s += d * d;
          }
          if (pick == nullptr || s < best) {
            best = s;
            pick = &atom;
          }
        }
        for (int j = 0; j < dim; ++j) a[j] = (*pick)[j];
        break;
      }
    }
  }

  bool contains(std::span<const double> a, double tol = 1e-9) const {
    std::vector<double> c(a.begin(), a.end());
    clamp(c);
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double d = c[j] - a[j];
      s += d * d;
    }
    return std::sqrt(s) <= tol;
  }

  // Uniform sample: uniform on box, uniform on ball, uniform over atoms.
  void sample(rng_stream& rng, std::span<double> out) const {
    switch (kind) {
      case Kind::box:
        for (int j = 0; j < dim; ++j) out[j] = rng.uniform(lower[j], upper[j]);
        break;
      case Kind::ball: {
        double s = 0.0;
        std::vector<double> g(dim);
        for (int j = 0; j < dim; ++j) {
          g[j] = rng.normal();
          s += g[j] * g[j];
        }
        s = std::sqrt(s);
        const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
        for (int j = 0; j < dim; ++j) out[j] = center[j] + (s > 0 ? r * g[j] / s : 0.0);
        break;
      }
      case Kind::finite: {
        const auto& atom = atoms[static_cast<std::size_t>(rng.uniform_index(static_cast<long>(atoms.size())))];
        for (int j = 0; j < dim; ++j) out[j] = atom[j];
        break;
      }
    }
  }
};

}  // namespace mfglab
