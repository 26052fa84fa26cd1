#pragma once

// theta ~ U(0, 1), n Bernoulli(theta) observations, summary = success count.
// With s successes the exact posterior is Beta(s + 1, n - s + 1).

#include "bayescomp/model.hpp"

#include <cmath>
#include <limits>

namespace bernoulli_toy {

using bayescomp::Vector;

inline bayescomp::SimulableModel model(int n) {
  bayescomp::SimulableModel m;
  m.sample_prior = [](bayescomp::RngStream& rng) { return Vector::Constant(1, rng.uniform()); };
  m.log_prior = [](const Vector& t) {
    return t(0) > 0 && t(0) < 1 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  m.simulate = [n](const Vector& t, bayescomp::RngStream& rng) {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.uniform() < t(0) ? 1.0 : 0.0;
    return z;
  };
  m.summary = [](const Vector& z) { return Vector::Constant(1, z.sum()); };
  return m;
}

inline Vector observed(int n, int successes) {
  Vector y = Vector::Zero(n);
  y.head(successes).setOnes();
  return y;
}

inline double beta_mean(double a, double b) { return a / (a + b); }
inline double beta_sd(double a, double b) { return std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1))); }

}  // namespace bernoulli_toy
