#pragma once

#include "bayescomp/model.hpp"

#include <vector>

namespace bayescomp {

/// Particles with unnormalized log-weights.
struct WeightedSample {
  std::vector<Vector> points;
  Vector log_weights;

  std::size_t size() const { return points.size(); }
  /// Normalized weights exp(lw - log_sum_exp(lw)). Throws kDegenerateWeights
  /// when no log-weight is finite.
  Vector normalized_weights() const;
  /// Count of weights that are exactly zero in double precision.
  std::size_t zero_weight_count() const;
};

struct EstimateReport {
  double value = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
  std::size_t n_draws = 0;
  /// Set when only one weight carries the whole mass.
  bool degenerate = false;
};

using ScalarFunction = std::function<double(const Vector&)>;

/// Plain average with the CLT standard error sd / sqrt(N).
EstimateReport mc_estimate(const ScalarFunction& h, const std::vector<Vector>& draws);

/// N draws from the proposal weighted by target/proposal. The target may be
/// unnormalized. A proposal density of -inf at its own draw throws kInternal.
WeightedSample importance_sample(const LogDensity& target_logpdf, const LogDensity& proposal_logpdf,
                                 const Sampler& proposal_draw, std::size_t n, RngStream& rng);

/// Self-normalized estimate; the standard error is the delta-method
/// sqrt(sum w_i^2 (h_i - value)^2).
EstimateReport snis_estimate(const ScalarFunction& h, const WeightedSample& ws);

/// 1 / sum of squared normalized weights.
double ess(const WeightedSample& ws);

struct ResampleResult {
  std::vector<Vector> points;
  std::vector<std::size_t> indices;
  bool degenerate = false;
};

/// M multinomial draws with probabilities given by the normalized weights.
ResampleResult sir_resample(const WeightedSample& ws, std::size_t m, RngStream& rng);

}  // namespace bayescomp
