#include "bayescomp/studies.hpp"

#include "bayescomp/pmc.hpp"

#include <numeric>

namespace bayescomp {

namespace {

EvidenceEstimate negate(EvidenceEstimate e) {
  e.log_value = -e.log_value;
  return e;
}

EvidenceEstimate difference(const EvidenceEstimate& m1, const EvidenceEstimate& m0) {
  EvidenceEstimate e = m1;
  e.log_value = m1.log_value - m0.log_value;
  e.std_error = combined_se(m1.std_error, m0.std_error);
  e.n_draws = m1.n_draws + m0.n_draws;
  e.reliable = m1.reliable && m0.reliable;
  return e;
}

}  // namespace

CovariateTestResult covariate_test_replicate(const ProbitModel& full, const CovariateTestOptions& options,
                                             RngStream& rng) {
  require(full.dim() >= 2, "covariate test needs at least two columns");
  std::vector<std::size_t> reduced(full.dim() - 1);
  std::iota(reduced.begin(), reduced.end(), 0);
  const ProbitModel sub = full.select_columns(reduced);
  const auto m0 = sub.bayes_model();
  const auto m1 = full.bayes_model();
  const auto fit0 = probit_mle(sub);
  const auto fit1 = probit_mle(full);
  const std::size_t n = options.draws;

  CovariateTestResult out;
  RngStream is_rng = rng.split(0);
  out.importance = negate(bf_importance(m0, m1, gaussian_proposal(fit0.beta, fit0.covariance),
                                        gaussian_proposal(fit1.beta, fit1.covariance), n, n, is_rng));

  RngStream g0_rng = rng.split(1);
  RngStream g1_rng = rng.split(2);
  const auto gibbs0 = probit_gibbs_run(sub, n, g0_rng, true);
  const auto gibbs1 = probit_gibbs_run(full, n, g1_rng, true);

  const auto h0 = harmonic_mean_gd(posterior_density(m0), gibbs0.chain.states,
                                   PhiSpec{fit0.beta, fit0.covariance, options.coverage});
  const auto h1 = harmonic_mean_gd(posterior_density(m1), gibbs1.chain.states,
                                   PhiSpec{fit1.beta, fit1.covariance, options.coverage});
  out.harmonic = difference(h1, h0);

  const Vector star0 = options.theta_star_mle ? fit0.beta : sample_mean(gibbs0.chain.states);
  const Vector star1 = options.theta_star_mle ? fit1.beta : sample_mean(gibbs1.chain.states);
  const auto c0 = chib_marginal(m0, probit_latent_completion(sub), gibbs0.latents, star0);
  const auto c1 = chib_marginal(m1, probit_latent_completion(full), gibbs1.latents, star1);
  out.chib = difference(c1, c0);

  RngStream pilot_rng = rng.split(3);
  const auto pilot = probit_gibbs_run(full, options.pilot_draws, pilot_rng);
  const auto omega = fit_pseudo_posterior(pilot.chain.states, 1);
  RngStream bridge_rng = rng.split(4);
  out.bridge = negate(
      bridge_embedded(m0, m1, Vector::Zero(1), omega, gibbs0.chain.states, gibbs1.chain.states, bridge_rng));
  return out;
}

MixtureTrap mixture_trap_setup(std::size_t n, double weight, double mu1, double mu2, double sigma2, RngStream& rng) {
  if (!(weight > 0.0 && weight < 1.0) || !(sigma2 > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "mixture weight must lie in (0, 1) and sigma2 be positive");
  }
  MixtureTrap trap;
  trap.target.data = simulate_mixture_data(n, weight, mu1, mu2, sigma2, rng);
  trap.target.weight = weight;
  trap.target.sigma2 = sigma2;
  Vector truth(2), swapped(2);
  truth << mu1, mu2;
  swapped << mu2, mu1;
  trap.major = mixture_local_mode(trap.target, truth);
  trap.spurious = mixture_local_mode(trap.target, swapped);
  if ((trap.major - trap.spurious).norm() < 0.5) {
    throw Error(ErrorCode::kModelFailure, "simulated mixture posterior has no separate spurious mode");
  }
  if (mixture_logpost(trap.target, trap.spurious) > mixture_logpost(trap.target, trap.major)) {
    std::swap(trap.major, trap.spurious);
  }
  return trap;
}

TrapRun mixture_trap_run(const MixtureTrap& trap, double tau, std::size_t iterations, RngStream& rng) {
  require(tau >= 0.0, "tau must be nonnegative");
  TrapRun run;
  run.chain = rw_mh_run(mixture_bayes_model(trap.target), tau * Matrix::Identity(2, 2), trap.spurious, iterations, rng);
  for (std::size_t t = 0; t < run.chain.size(); ++t) {
    if ((run.chain.states[t] - trap.major).norm() <= 0.5) {
      run.escape_iteration = static_cast<long>(t + 1);
      break;
    }
  }
  return run;
}

}  // namespace bayescomp
