#include "mfglab/model.hpp"

#include <cmath>

#include "mfglab/measures.hpp"

namespace mfglab {

namespace {

struct Probe {
  double t = 0.0;
  std::vector<double> x, y, a;
  ParticleCloud mu, nu;
};

std::vector<Probe> draw_probes(const CoefficientBundle& bundle, long samples, double radius,
                               rng_stream& rng) {
  const int d = bundle.state_dim;
  std::vector<Probe> out;
  out.reserve(samples);
  for (long s = 0; s < samples; ++s) {
    Probe pr;
    pr.t = rng.uniform(0.0, bundle.horizon);
    pr.x.resize(d);
    pr.y.resize(d);
    for (int j = 0; j < d; ++j) {
      pr.x[j] = rng.uniform(-radius, radius);
      pr.y[j] = rng.uniform(-radius, radius);
    }
    const int cloud_size = 8;
    pr.mu = ParticleCloud(d, cloud_size);
    pr.nu = ParticleCloud(d, cloud_size);
    for (int i = 0; i < cloud_size; ++i)
      for (int j = 0; j < d; ++j) {
        pr.mu.point(i)[j] = rng.uniform(-radius, radius);
        pr.nu.point(i)[j] = rng.uniform(-radius, radius);
      }
    pr.a.resize(bundle.actions.dim);
    bundle.actions.sample(rng, pr.a);
    out.push_back(std::move(pr));
  }
  return out;
}

double frobenius(const std::vector<double>& m) {
  double s = 0.0;
  for (double v : m) s += v * v;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  for (double c : v)
    if (!std::isfinite(c)) return false;
  return true;
}

struct PassStats {
  double lipschitz = 0.0;
  double growth = 0.0;
  std::vector<Probe> probes;
};

}  // namespace

ValidationReport validate_coefficients(const CoefficientBundle& bundle,
                                       const ProbeSettings& probe) {
  if (probe.samples < 1) throw std::invalid_argument("validate_coefficients: samples >= 1");
  if (probe.radius <= 0.0) throw std::invalid_argument("validate_coefficients: radius > 0");
  bundle.check_exponents();

  const int d = bundle.state_dim;
  const int m = bundle.idio_dim;
  const int m0 = bundle.common_dim;
  ValidationReport rep;
  rep.samples = probe.samples;

  auto witness = [&](const std::string& what, const Probe& pr, double value) {
    if (rep.witnesses.size() < 16)
      rep.witnesses.push_back(ProbeWitness{what, pr.t, pr.x, pr.y, pr.a, value});
  };

  ParticleCloud dirac0(d, 1);
  std::vector<double> zero(d, 0.0);

  // purity probe: coefficient callables must be side-effect free
  {
    rng_stream rng(derive_seed(probe.seed, "purity"));
    Probe pr = draw_probes(bundle, 1, probe.radius, rng).front();
    std::vector<double> b1(d), b2(d);
    CloudView mu(pr.mu);
    bundle.drift(pr.t, pr.x, mu, pr.a, b1);
    bundle.drift(pr.t, pr.x, mu, pr.a, b2);
    for (int j = 0; j < d; ++j)
      if (b1[j] != b2[j]) throw std::runtime_error("validate_coefficients: drift is not pure");
  }

  auto sweep = [&](double radius, const char* label) {
    PassStats st;
    rng_stream rng(derive_seed(probe.seed, label));
    st.probes = draw_probes(bundle, probe.samples, radius, rng);
    std::vector<double> bx(d), by(d);
    std::vector<double> sx(static_cast<std::size_t>(d) * m), sy(static_cast<std::size_t>(d) * m);
    std::vector<double> s0x(static_cast<std::size_t>(d) * m0), s0y(static_cast<std::size_t>(d) * m0);
    for (const auto& pr : st.probes) {
      CloudView mu(pr.mu), nu(pr.nu);
      bundle.drift(pr.t, pr.x, mu, pr.a, bx);
      bundle.drift(pr.t, pr.y, nu, pr.a, by);
      bundle.sigma(pr.t, pr.x, mu, sx);
      bundle.sigma(pr.t, pr.y, nu, sy);
      if (m0 > 0) {
        bundle.sigma0(pr.t, pr.x, mu, s0x);
        bundle.sigma0(pr.t, pr.y, nu, s0y);
      }
      if (!all_finite(bx) || !all_finite(by) || !all_finite(sx) || !all_finite(sy) ||
          !all_finite(s0x) || !all_finite(s0y)) {
        rep.finite_pass = false;
        witness("non-finite coefficient", pr, std::nan(""));
        continue;
      }
      double num = 0.0;
      for (int j = 0; j < d; ++j) {
        const double db = bx[j] - by[j];
        num += db * db;
      }
      num = std::sqrt(num);
      std::vector<double> dsig(sx.size());
      for (std::size_t j = 0; j < sx.size(); ++j) dsig[j] = sx[j] - sy[j];
      num += frobenius(dsig);
      if (m0 > 0) {
        std::vector<double> dsig0(s0x.size());
        for (std::size_t j = 0; j < s0x.size(); ++j) dsig0[j] = s0x[j] - s0y[j];
        num += frobenius(dsig0);
      }
      double den = 0.0;
      for (int j = 0; j < d; ++j) {
        const double dx = pr.x[j] - pr.y[j];
        den += dx * dx;
      }
      den = std::sqrt(den) + wasserstein_clouds(bundle.p, pr.mu, pr.nu);
      if (den > 1e-9) {
        const double ratio = num / den;
        if (ratio > st.lipschitz) {
          st.lipschitz = ratio;
          if (std::string(label) == "probe2r") witness("lipschitz ratio", pr, ratio);
        }
      }

      // growth: |b(t,0,delta_0,a)| <= c1 (1+|a|)
      bundle.drift(pr.t, zero, CloudView(dirac0), pr.a, bx);
      if (!all_finite(bx)) {
        rep.finite_pass = false;
        witness("non-finite drift at origin", pr, std::nan(""));
        continue;
      }
      double bnorm = 0.0, anorm = 0.0;
      for (int j = 0; j < d; ++j) bnorm += bx[j] * bx[j];
      for (double c : pr.a) anorm += c * c;
      const double g1 = std::sqrt(bnorm) / (1.0 + std::sqrt(anorm));
      // |sigma sigma^T + sigma0 sigma0^T| <= c1 (1 + |x|^{p_sigma} + moment^{p_sigma/p})
      std::vector<double> ssq(static_cast<std::size_t>(d) * d, 0.0);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          double v = 0.0;
          for (int j = 0; j < m; ++j)
            v += sx[static_cast<std::size_t>(r) * m + j] * sx[static_cast<std::size_t>(c) * m + j];
          for (int j = 0; j < m0; ++j)
            v += s0x[static_cast<std::size_t>(r) * m0 + j] * s0x[static_cast<std::size_t>(c) * m0 + j];
          ssq[static_cast<std::size_t>(r) * d + c] = v;
        }
      double xnorm = 0.0;
      for (double c : pr.x) xnorm += c * c;
      xnorm = std::sqrt(xnorm);
      const double env = 1.0 + std::pow(xnorm, bundle.p_sigma) +
                         std::pow(mu.moment(bundle.p), bundle.p_sigma / bundle.p);
      const double g2 = frobenius(ssq) / env;
      st.growth = std::max(st.growth, std::max(g1, g2));
    }
    return st;
  };

  PassStats near = sweep(probe.radius, "probe1r");
  PassStats far = sweep(2.0 * probe.radius, "probe2r");
  rep.lipschitz_estimate = near.lipschitz;
  rep.lipschitz_estimate_2r = far.lipschitz;
  rep.growth_estimate = near.growth;
  rep.growth_estimate_2r = far.growth;

  // A constant ratio across a radius doubling is the Lipschitz signature; a
  // growing one witnesses super-linear behavior (e.g. b = x^2).
  const double slack = 1.5;
  rep.lipschitz_pass =
      rep.finite_pass && far.lipschitz <= slack * near.lipschitz + 1e-9;
  rep.growth_pass = rep.finite_pass && far.growth <= slack * near.growth + 1e-9;

  // count individual far-radius probes exceeding the near-radius growth envelope
  {
    rng_stream rng(derive_seed(probe.seed, "probe2r"));
    auto probes = draw_probes(bundle, probe.samples, 2.0 * probe.radius, rng);
    std::vector<double> bx(d);
    for (const auto& pr : probes) {
      bundle.drift(pr.t, zero, CloudView(dirac0), pr.a, bx);
      double bnorm = 0.0, anorm = 0.0;
      for (int j = 0; j < d; ++j) bnorm += bx[j] * bx[j];
      for (double c : pr.a) anorm += c * c;
      if (std::sqrt(bnorm) / (1.0 + std::sqrt(anorm)) > slack * near.growth + 1e-9)
        ++rep.growth_violations;
    }
  }

  // (A.5): c2 from |g| and from both f envelopes, then the implied smallest
  // c3 candidate at every sampled action with |a| > 0
  double c2 = 0.0;
  bool f_finite = true;
  for (const auto* stage : {&near, &far}) {
    for (const auto& pr : stage->probes) {
      CloudView mu(pr.mu);
      const double gval = bundle.terminal_reward(pr.x, mu);
      const double fval = bundle.running_reward(pr.t, pr.x, mu, pr.a);
      if (!std::isfinite(gval) || !std::isfinite(fval)) {
        rep.finite_pass = false;
        f_finite = false;
        witness("non-finite reward", pr, std::nan(""));
        continue;
      }
      double xnorm = 0.0;
      for (double c : pr.x) xnorm += c * c;
      const double base = 1.0 + std::pow(std::sqrt(xnorm), bundle.p) + mu.moment(bundle.p);
      double anorm = 0.0;
      for (double c : pr.a) anorm += c * c;
      const double ap = std::pow(std::sqrt(anorm), bundle.p_prime);
      c2 = std::max(c2, std::abs(gval) / base);
      c2 = std::max(c2, std::max(fval, 0.0) / base);
      c2 = std::max(c2, std::max(-fval, 0.0) / (base + ap));
    }
  }
  rep.bound_estimate = c2;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto* stage : {&near, &far}) {
    for (const auto& pr : stage->probes) {
      CloudView mu(pr.mu);
      const double fval = bundle.running_reward(pr.t, pr.x, mu, pr.a);
      if (!std::isfinite(fval)) continue;
      double xnorm = 0.0, anorm = 0.0;
      for (double c : pr.x) xnorm += c * c;
      for (double c : pr.a) anorm += c * c;
      const double ap = std::pow(std::sqrt(anorm), bundle.p_prime);
      if (ap < 1e-9) continue;
      const double base = 1.0 + std::pow(std::sqrt(xnorm), bundle.p) + mu.moment(bundle.p);
      const double cand = (c2 * base - fval) / ap;
      if (cand < margin) {
        margin = cand;
        if (cand <= 0.0) witness("coercivity margin", pr, cand);
      }
    }
  }
  rep.coercivity_margin = std::isfinite(margin) ? margin : 0.0;
  rep.coercivity_pass = f_finite && rep.coercivity_margin > 0.0;
  return rep;
}

CoefficientBundle scenario_example33(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("scenario_example33: sigma >= 0");
  CoefficientBundle b;
  b.name = "example33";
  b.state_dim = 1;
  b.idio_dim = 1;
  b.common_dim = 0;
  b.horizon = 2.0;
  b.p = 2.0;
  b.p_prime = 3.0;
  b.p_sigma = 0.0;
  b.actions = ActionSet::interval(-1.0, 1.0);
  b.drift = [](double, std::span<const double>, const CloudView&, std::span<const double> a,
               std::span<double> out) { out[0] = a[0]; };
  b.sigma = [sigma](double, std::span<const double>, const CloudView&, std::span<double> out) {
    out[0] = sigma;
  };
  b.sigma0 = [](double, std::span<const double>, const CloudView&, std::span<double>) {};
  b.running_reward = [](double, std::span<const double>, const CloudView&,
                        std::span<const double>) { return 0.0; };
  b.terminal_reward = [](std::span<const double> x, const CloudView& cloud) {
    return x[0] * cloud.mean(0);
  };
  b.initial_sampler = [](rng_stream&, std::span<double> out) { out[0] = 0.0; };
  b.check_exponents();
  return b;
}

CoefficientBundle scenario_no_control(
    std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> drift,
    std::function<void(double, std::span<const double>, const CloudView&, std::span<double>)> sigma,
    int state_dim, int idio_dim, double horizon,
    std::function<void(rng_stream&, std::span<double>)> initial_sampler) {
  CoefficientBundle b;
  b.name = "no_control";
  b.state_dim = state_dim;
  b.idio_dim = idio_dim;
  b.common_dim = 0;
  b.horizon = horizon;
  b.p = 2.0;
  b.p_prime = 3.0;
  b.p_sigma = 0.0;
  b.actions = ActionSet::singleton(std::vector<double>{0.0});
  b.drift = [inner = std::move(drift)](double t, std::span<const double> x, const CloudView& mu,
                                       std::span<const double>, std::span<double> out) {
    inner(t, x, mu, out);
  };
  b.sigma = std::move(sigma);
  b.sigma0 = [](double, std::span<const double>, const CloudView&, std::span<double>) {};
  b.running_reward = [](double, std::span<const double>, const CloudView&,
                        std::span<const double>) { return 0.0; };
  b.terminal_reward = [](std::span<const double>, const CloudView&) { return 0.0; };
  b.initial_sampler = std::move(initial_sampler);
  b.check_exponents();
  return b;
}

CoefficientBundle scenario_mean_coupled(double sigma) {
  CoefficientBundle b;
  b.name = "mean_coupled";
  b.state_dim = 1;
  b.idio_dim = 1;
  b.common_dim = 0;
  b.horizon = 1.0;
  b.p = 2.0;
  b.p_prime = 3.0;
  b.p_sigma = 0.0;
  b.actions = ActionSet::interval(-1.0, 1.0);
  b.drift = [](double, std::span<const double>, const CloudView& cloud, std::span<const double> a,
               std::span<double> out) { out[0] = a[0] + cloud.mean(0); };
  b.sigma = [sigma](double, std::span<const double>, const CloudView&, std::span<double> out) {
    out[0] = sigma;
  };
  b.sigma0 = [](double, std::span<const double>, const CloudView&, std::span<double>) {};
  b.running_reward = [](double, std::span<const double>, const CloudView&,
                        std::span<const double>) { return 0.0; };
  b.terminal_reward = [](std::span<const double>, const CloudView&) { return 0.0; };
  b.initial_sampler = [](rng_stream& rng, std::span<double> out) { out[0] = 0.25 * rng.normal(); };
  b.check_exponents();
  return b;
}

CoefficientBundle scenario_decoupled_quadratic(double a_star, double sigma) {
  if (std::abs(a_star) > 1.0)
    throw std::invalid_argument("scenario_decoupled_quadratic: a_star must lie in [-1, 1]");
  CoefficientBundle b;
  b.name = "decoupled_quadratic";
  b.state_dim = 1;
  b.idio_dim = 1;
  b.common_dim = 0;
  b.horizon = 1.0;
  b.p = 1.0;
  b.p_prime = 2.0;
  b.p_sigma = 0.0;
  b.actions = ActionSet::interval(-1.0, 1.0);
  b.drift = [](double, std::span<const double>, const CloudView&, std::span<const double>,
               std::span<double> out) { out[0] = 0.0; };
  b.sigma = [sigma](double, std::span<const double>, const CloudView&, std::span<double> out) {
    out[0] = sigma;
  };
  b.sigma0 = [](double, std::span<const double>, const CloudView&, std::span<double>) {};
  b.running_reward = [a_star](double, std::span<const double>, const CloudView&,
                              std::span<const double> a) {
    const double d = a[0] - a_star;
    return -d * d;
  };
  b.terminal_reward = [](std::span<const double>, const CloudView&) { return 0.0; };
  b.initial_sampler = [](rng_stream&, std::span<double> out) { out[0] = 0.0; };
  b.check_exponents();
  return b;
}

CoefficientBundle scenario_zero_objective(double sigma) {
  CoefficientBundle b = scenario_example33(sigma);
  b.name = "zero_objective";
  b.running_reward = [](double, std::span<const double>, const CloudView&,
                        std::span<const double>) { return 0.0; };
  b.terminal_reward = [](std::span<const double>, const CloudView&) { return 0.0; };
  return b;
}

}  // namespace mfglab
