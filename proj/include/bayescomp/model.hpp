#pragma once

#include "bayescomp/core.hpp"
#include "bayescomp/rng.hpp"

#include <functional>

namespace bayescomp {

using LogDensity = std::function<double(const Vector&)>;
using Sampler = std::function<Vector(RngStream&)>;

/// A posterior target: log prior plus log likelihood over a p-dimensional
/// parameter, with data captured at construction. Both functions return
/// -inf outside the support and never throw for out-of-support input.
struct BayesModel {
  std::size_t dimension = 0;
  LogDensity log_prior;
  LogDensity log_likelihood;
  /// Optional; required by estimators that simulate from the prior.
  Sampler sample_prior;
};

/// log_prior + log_likelihood, with -inf propagated and NaN mapped to -inf.
double log_posterior(const BayesModel& model, const Vector& theta);

/// Closed unary target over theta for samplers.
LogDensity posterior_density(const BayesModel& model);

/// Latent-variable completion of a model: alternating conditional draws
/// plus the normalized log density of theta given the latents.
struct LatentCompletion {
  std::function<Vector(const Vector& theta, RngStream&)> sample_latents;
  std::function<Vector(const Vector& latents, RngStream&)> sample_params;
  std::function<double(const Vector& theta, const Vector& latents)> log_full_conditional_param;
};

/// A model known only through simulation: prior draws, pseudo-data, and a
/// summary statistic. `log_prior` is needed by the MCMC and PMC variants.
struct SimulableModel {
  Sampler sample_prior;
  LogDensity log_prior;
  std::function<Vector(const Vector& theta, RngStream&)> simulate;
  std::function<Vector(const Vector& data)> summary;
};

}  // namespace bayescomp
