#pragma once

#include "bayescomp/model.hpp"

namespace bayescomp {

/// Posterior over (mu1, mu2) for p N(mu1, s2) + (1-p) N(mu2, s2) with p and
/// s2 known and independent N(0, 10 s2) priors on both means.
struct MixtureTarget {
  Vector data;
  double weight = 0.5;
  double sigma2 = 1.0;

  double prior_var() const { return 10.0 * sigma2; }
};

double mixture_logpost(const MixtureTarget& target, const Vector& mu);

BayesModel mixture_bayes_model(const MixtureTarget& target);

/// n draws from the two-component mixture.
Vector simulate_mixture_data(std::size_t n, double weight, double mu1, double mu2, double sigma2, RngStream& rng);

/// Local posterior mode reached from `start` by MAP-EM (monotone ascent).
Vector mixture_local_mode(const MixtureTarget& target, const Vector& start, int max_iterations = 10000);

}  // namespace bayescomp
