#include "bayescomp/mixture.hpp"

#include "bayescomp/distributions.hpp"

#include <cmath>
#include <numbers>

namespace bayescomp {

double mixture_logpost(const MixtureTarget& t, const Vector& mu) {
  require(mu.size() == 2, "mixture target takes (mu1, mu2)");
  if (!mu.allFinite()) return -std::numeric_limits<double>::infinity();
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * t.sigma2);
  const double lw1 = std::log(t.weight);
  const double lw2 = std::log1p(-t.weight);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t.data.size(); ++i) {
    const double d1 = t.data(i) - mu(0);
    const double d2 = t.data(i) - mu(1);
    const double a = lw1 - 0.5 * d1 * d1 / t.sigma2;
    const double b = lw2 - 0.5 * d2 * d2 / t.sigma2;
    const double m = std::max(a, b);
    sum += m + std::log(std::exp(a - m) + std::exp(b - m)) + log_norm;
  }
  const double v = t.prior_var();
  const double prior_norm = -0.5 * std::log(2.0 * std::numbers::pi * v);
  return sum + 2.0 * prior_norm - 0.5 * (mu(0) * mu(0) + mu(1) * mu(1)) / v;
}

BayesModel mixture_bayes_model(const MixtureTarget& target) {
  BayesModel m;
  m.dimension = 2;
  const double v = target.prior_var();
  m.log_prior = [v](const Vector& mu) {
    return -std::log(2.0 * std::numbers::pi * v) - 0.5 * mu.squaredNorm() / v;
  };
  m.log_likelihood = [target, v](const Vector& mu) {
    return mixture_logpost(target, mu) + std::log(2.0 * std::numbers::pi * v) + 0.5 * mu.squaredNorm() / v;
  };
  m.sample_prior = [v](RngStream& rng) {
    Vector mu(2);
    mu(0) = std::sqrt(v) * rng.normal();
    mu(1) = std::sqrt(v) * rng.normal();
    return mu;
  };
  return m;
}

Vector simulate_mixture_data(std::size_t n, double weight, double mu1, double mu2, double sigma2, RngStream& rng) {
  Vector y(static_cast<Eigen::Index>(n));
  const double sd = std::sqrt(sigma2);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool first = rng.uniform() < weight;
    y(i) = (first ? mu1 : mu2) + sd * rng.normal();
  }
  return y;
}

Vector mixture_local_mode(const MixtureTarget& t, const Vector& start, int max_iterations) {
  require(start.size() == 2, "mixture target takes (mu1, mu2)");
  Vector mu = start;
  const double shrink = t.sigma2 / t.prior_var();
  for (int it = 0; it < max_iterations; ++it) {
    double r1 = 0.0, r1y = 0.0, r2 = 0.0, r2y = 0.0;
    for (Eigen::Index i = 0; i < t.data.size(); ++i) {
      const double d1 = t.data(i) - mu(0);
      const double d2 = t.data(i) - mu(1);
      const double a = std::log(t.weight) - 0.5 * d1 * d1 / t.sigma2;
      const double b = std::log1p(-t.weight) - 0.5 * d2 * d2 / t.sigma2;
      const double resp = 1.0 / (1.0 + std::exp(b - a));
      r1 += resp;
      r1y += resp * t.data(i);
      r2 += 1.0 - resp;
      r2y += (1.0 - resp) * t.data(i);
    }
    Vector next(2);
    next(0) = r1y / (r1 + shrink);
    next(1) = r2y / (r2 + shrink);
    const double change = (next - mu).cwiseAbs().maxCoeff();
    mu = next;
    if (change < 1e-13) break;
  }
  return mu;
}

}  // namespace bayescomp
