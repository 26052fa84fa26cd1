#pragma once

#include "bayescomp/distributions.hpp"
#include "bayescomp/model.hpp"
#include "bayescomp/montecarlo.hpp"

#include <vector>

namespace bayescomp {

/// Gaussian random-walk kernels sharing one adapted base covariance.
struct KernelBank {
  std::vector<double> scales{0.3, 1.0, 3.0};
  /// Mixture weights; sum to one, each at least `floor`.
  Vector weights;
  Matrix base_covariance;
  double floor = 1e-3;

  /// Uniform weights over the given scales.
  static KernelBank uniform(std::vector<double> scales, Matrix base_covariance, double floor = 1e-3);
  std::size_t size() const { return scales.size(); }
};

struct Population {
  std::vector<Vector> particles;
  Vector log_weights;
  std::vector<Vector> resampled;
  /// Kernel index used by each particle; empty at iteration 0.
  std::vector<std::size_t> kernel_assignments;
  std::size_t iteration = 0;
  double ess = 0.0;
  /// Bank weights in force when this population was drawn.
  Vector kernel_weights;

  WeightedSample weighted() const { return {particles, log_weights}; }
};

struct InitialProposal {
  LogDensity logpdf;
  Sampler draw;
};

/// Normalized Gaussian proposal; the covariance must be full rank.
InitialProposal gaussian_proposal(Vector mean, Matrix covariance);

enum class PmcDensity {
  /// Kernel density at the selected center with the selected scale.
  kConditional,
  /// Mixture over all kernels and all resampled centers (O(N^2 K)).
  kFullMixture,
  /// Base kernel density, ignoring the selected scale. Invalid; kept only as
  /// a negative control for the weight-validity tests.
  kUnadjusted,
};

struct PmcOptions {
  std::size_t particles = 1000;
  std::size_t iterations = 10;
  PmcDensity density = PmcDensity::kConditional;
};

/// Mixture-weight update: w_j = floor + (1 - K floor) * (normalized weight
/// mass of the particles that used kernel j). The base covariance becomes the
/// weighted covariance of the population when that is positive definite.
KernelBank dkernel_update(const KernelBank& bank, const Population& pop,
                          const std::vector<std::size_t>& kernel_assignments);

/// Iteration 0 samples q0; iterations 1..T-1 move resampled particles with
/// kernels chosen from the bank. Returns all T populations.
std::vector<Population> pmc_run(const BayesModel& target, const InitialProposal& q0, KernelBank bank,
                                const PmcOptions& options, RngStream& rng);

}  // namespace bayescomp
