#pragma once

#include "bayescomp/rng.hpp"

#include <vector>

namespace bayescomp {

/// Three-stage open-population capture-recapture with emigration: only the
/// first-capture cohort is marked, so the data are (n1, c2, c3) and the
/// removals (r1, r2) are latent.
struct CaptureModel {
  long n1 = 0;
  long c2 = 0;
  long c3 = 0;
  /// Upper bound for the population size N in the Gibbs and oracle sums.
  long n_max = 0;

  /// Validates and applies the default bound n_max = 50 * n1 when zero.
  CaptureModel(long n1, long c2, long c3, long n_max = 0);
};

struct CaptureState {
  long N = 0;
  double p = 0.0;
  double q = 0.0;
  long r1 = 0;
  long r2 = 0;
};

/// Sum of the five binomial log-pmfs; -inf on any support violation.
double capture_loglik(const CaptureModel& model, long N, double p, double q, long r1, long r2);

struct LatentPair {
  long r1;
  long r2;
  double probability;
};

/// Exact full conditionals for the improper prior 1/N on N and uniform
/// priors on p and q.
class CaptureConditionals {
 public:
  explicit CaptureConditionals(const CaptureModel& model) : model_(model) {}

  double sample_p(const CaptureState& s, RngStream& rng) const;
  double sample_q(const CaptureState& s, RngStream& rng) const;
  /// Normalized pmf of (r1, r2) given (N, p, q) over its finite support.
  std::vector<LatentPair> latent_pmf(const CaptureState& s) const;
  LatentPair sample_latents(const CaptureState& s, RngStream& rng) const;
  /// Normalized log pmf of N over n1..n_max given p.
  std::vector<double> population_log_pmf(double p) const;
  /// Draws N; sets *truncated when the mass at n_max exceeds 1e-6.
  long sample_population(const CaptureState& s, RngStream& rng, bool* truncated) const;

  /// Beta shape parameters of p | rest and q | rest.
  std::pair<double, double> p_shapes(const CaptureState& s) const;
  std::pair<double, double> q_shapes(const CaptureState& s) const;

 private:
  CaptureModel model_;
};

struct CaptureChain {
  std::vector<CaptureState> states;
  /// Sweeps in which the N conditional put more than 1e-6 at n_max.
  long truncation_warnings = 0;
};

/// Systematic scan p, q, (r1, r2), N.
CaptureChain capture_gibbs_run(const CaptureModel& model, long iterations, RngStream& rng);

}  // namespace bayescomp
