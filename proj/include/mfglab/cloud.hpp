#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfglab/grid.hpp"

namespace mfglab {

// Equal-weight particle cloud in R^d.
struct ParticleCloud {
  int dim = 0;
  std::vector<double> pts;  // count x dim, row-major

  ParticleCloud() = default;
  ParticleCloud(int d, int count) : dim(d), pts(static_cast<std::size_t>(count) * d, 0.0) {}

  int count() const { return dim == 0 ? 0 : static_cast<int>(pts.size() / dim); }
  std::span<const double> point(int i) const {
    return {pts.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> point(int i) {
    return {pts.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

// Permutation-invariant sum: sorting the summands first makes the result a
// function of the multiset only, which keeps the exchangeability contract
// (permuting players permutes paths bit-exactly) valid in floating point.
inline double pi_sum(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  double s = 0.0;
  for (double v : scratch) s += v;
  return s;
}

// Read-only view of a cloud handed to coefficient callables. Means are
// computed lazily with permutation-invariant accumulation and cached; a view
// is owned by a single simulation thread.
class CloudView {
 public:
  CloudView() = default;
  CloudView(const double* data, int count, int dim) : data_(data), count_(count), dim_(dim) {}
  explicit CloudView(const ParticleCloud& c) : data_(c.pts.data()), count_(c.count()), dim_(c.dim) {}

  int count() const { return count_; }
  int dim() const { return dim_; }
  std::span<const double> point(int i) const {
    return {data_ + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }

  double mean(int j) const {
    if (!have_mean_) compute_mean();
    return mean_[j];
  }

  // (1/n) sum_i |x_i|^p
  double moment(double p) const {
    std::vector<double> scratch(count_);
    for (int i = 0; i < count_; ++i) {
      double s = 0.0;
      auto pt = point(i);
      for (int j = 0; j < dim_; ++j) s += pt[j] * pt[j];
      scratch[i] = std::pow(std::sqrt(s), p);
    }
    return pi_sum(scratch) / count_;
  }

 private:
  void compute_mean() const {
    mean_.assign(dim_, 0.0);
    std::vector<double> scratch(count_);
    for (int j = 0; j < dim_; ++j) {
      for (int i = 0; i < count_; ++i) scratch[i] = data_[static_cast<std::size_t>(i) * dim_ + j];
      mean_[j] = pi_sum(scratch) / count_;
    }
    have_mean_ = true;
  }

  const double* data_ = nullptr;
  int count_ = 0;
  int dim_ = 0;
  mutable std::vector<double> mean_;
  mutable bool have_mean_ = false;
};

// Flow t -> mu_t as a per-grid-point particle cloud.
struct MeasureFlow {
  TimeGrid grid;
  int dim = 0;
  std::vector<ParticleCloud> clouds;  // size grid.points()

  MeasureFlow() = default;
  MeasureFlow(TimeGrid g, int d) : grid(g), dim(d), clouds(g.points(), ParticleCloud(d, 0)) {}

  CloudView view(int k) const { return CloudView(clouds[k]); }

  // mean of the time-k cloud, component j
  double mean(int k, int j = 0) const { return view(k).mean(j); }
};

}  // namespace mfglab
