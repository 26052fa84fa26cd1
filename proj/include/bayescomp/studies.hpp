#pragma once

#include "bayescomp/evidence.hpp"
#include "bayescomp/mcmc.hpp"
#include "bayescomp/mixture.hpp"
#include "bayescomp/probit.hpp"

namespace bayescomp {

/// Bayes factor for the last covariate of a probit model (model 1) against
/// the model without it (model 0), by four estimators.
struct CovariateTestOptions {
  std::size_t draws = 10000;
  /// Truncation mass of the Gelfand-Dey instrumental density.
  double coverage = 1.0;
  /// Use the MLE instead of the Gibbs posterior mean as theta*.
  bool theta_star_mle = false;
  /// Gibbs iterations used to fit the bridge pseudo-posterior.
  std::size_t pilot_draws = 2000;
};

/// Every estimate is log B10 (evidence for keeping the covariate).
struct CovariateTestResult {
  EvidenceEstimate importance;
  EvidenceEstimate harmonic;
  EvidenceEstimate chib;
  EvidenceEstimate bridge;
};

CovariateTestResult covariate_test_replicate(const ProbitModel& full, const CovariateTestOptions& options,
                                             RngStream& rng);

/// Two-component mixture dataset with its major and spurious posterior modes.
struct MixtureTrap {
  MixtureTarget target;
  Vector major;
  Vector spurious;
};

/// Simulates the data and locates both modes by EM from the true and the
/// swapped means. Throws kModelFailure when the two starts reach one mode.
MixtureTrap mixture_trap_setup(std::size_t n, double weight, double mu1, double mu2, double sigma2, RngStream& rng);

struct TrapRun {
  Chain chain;
  /// First iteration (1-based) within distance 0.5 of the major mode; -1 if
  /// never.
  long escape_iteration = -1;
};

/// Random walk N(mu, tau I) started at the spurious mode.
TrapRun mixture_trap_run(const MixtureTrap& trap, double tau, std::size_t iterations, RngStream& rng);

}  // namespace bayescomp
