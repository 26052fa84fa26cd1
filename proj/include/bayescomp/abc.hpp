#pragma once

#include "bayescomp/mcmc.hpp"
#include "bayescomp/model.hpp"
#include "bayescomp/probit.hpp"

#include <optional>
#include <vector>

namespace bayescomp {

using Distance = std::function<double(const Vector&, const Vector&)>;

double euclidean_distance(const Vector& a, const Vector& b);

struct AbcConfig {
  Distance distance = euclidean_distance;
  /// Exactly one of tolerance and quantile must be set.
  std::optional<double> tolerance;
  std::optional<double> quantile;
  std::size_t n_output = 1000;
  /// Perturbation covariance multiplier for ABC-PMC.
  double kernel_scale_rule = 2.0;
  /// Explicit non-increasing tolerance schedule for ABC-PMC; overrides the
  /// quantile rule when nonempty.
  std::vector<double> schedule;
  std::size_t max_proposals = 10'000'000;

  void validate() const;
};

struct AbcPopulation {
  std::vector<Vector> particles;
  Vector log_weights;
  std::vector<double> distances;
  double epsilon = 0.0;
  std::size_t t = 0;
  std::size_t proposals = 0;
  double ess = 0.0;

  double acceptance_rate() const;
};

/// Rejection sampler. With a tolerance it keeps proposals within epsilon
/// until n_output are accepted; with a quantile it simulates
/// n_output / quantile proposals and keeps the closest n_output.
AbcPopulation abc_reject(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config, RngStream& rng);

/// Likelihood-free MH at fixed tolerance, started from one rejection hit.
Chain abc_mcmc(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config, const MhProposal& proposal,
               std::size_t n_iter, RngStream& rng);

/// ABC-PMC with Gaussian perturbations and importance weights
/// prior / sum_j w_j K(theta | theta_j). Generation 0 is quantile rejection
/// from the prior; epsilon_t is the configured quantile of the previous
/// generation's accepted distances and must strictly decrease, otherwise the
/// run stops early. Throws kDegenerateWeights if the ESS drops below 10.
std::vector<AbcPopulation> abc_pmc(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config,
                                   std::size_t generations, RngStream& rng);

/// Simulable probit model whose summary is the predictive vector
/// (Phi(x_i' beta))_i; no pseudo-data is drawn.
SimulableModel probit_simulable(const ProbitModel& model);

/// ABC-PMC on the probit model against the summary at the MLE.
std::vector<AbcPopulation> probit_abc(const ProbitModel& model, const AbcConfig& config, std::size_t generations,
                                      RngStream& rng);

/// Weighted mean and standard deviation of each coordinate.
std::pair<Vector, Vector> weighted_moments(const std::vector<Vector>& points, const Vector& log_weights);

}  // namespace bayescomp
