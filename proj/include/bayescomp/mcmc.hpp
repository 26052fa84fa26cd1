#pragma once

#include "bayescomp/model.hpp"
#include "bayescomp/probit.hpp"

#include <string>
#include <vector>

namespace bayescomp {

struct Chain {
  std::vector<Vector> states;
  std::vector<double> log_posts;
  /// Accepted and attempted MH moves, one entry per block (one block for
  /// plain MH).
  std::vector<long> accept_counts;
  std::vector<long> proposal_counts;
  std::string proposal_family;
  double proposal_scale = 0.0;

  std::size_t size() const { return states.size(); }
  long accepted() const;
  long proposed() const;
  double acceptance_rate() const;
  double block_acceptance_rate(std::size_t block) const;
  /// Column j of the state history.
  Vector coordinate(std::size_t j) const;
};

struct MhProposal {
  std::function<Vector(const Vector& from, RngStream&)> draw;
  /// log q(to | from); leave empty for a symmetric kernel.
  std::function<double(const Vector& to, const Vector& from)> log_density;
  std::string family = "custom";
  double scale = 0.0;
};

/// Metropolis-Hastings. U is drawn on every step and the move is accepted
/// when log U < log-ratio. Throws kStart if theta0 has zero posterior mass
/// and kProposal if a proposal or its density is NaN.
Chain mh_run(const BayesModel& target, const MhProposal& proposal, const Vector& theta0, std::size_t n_iter,
             RngStream& rng);

/// Gaussian random walk with the given covariance.
Chain rw_mh_run(const BayesModel& target, const Matrix& covariance, const Vector& theta0, std::size_t n_iter,
                RngStream& rng);

struct GibbsBlock {
  std::vector<std::size_t> indices;
  /// New values for `indices` given the current full state.
  std::function<Vector(const Vector& state, RngStream&)> sample;
};

/// Systematic scan in the listed block order. The blocks must partition the
/// coordinates of theta0. `log_target`, when given, fills log_posts.
Chain gibbs_run(const std::vector<GibbsBlock>& blocks, const Vector& theta0, std::size_t n_iter, RngStream& rng,
                const LogDensity& log_target = {});

struct ProbitGibbsChain {
  Chain chain;
  /// z draws paired with chain.states (z_t was used to draw beta_t).
  std::vector<Vector> latents;
};

/// Data-augmentation Gibbs for the probit g-prior posterior, started at the
/// MLE.
ProbitGibbsChain probit_gibbs_run(const ProbitModel& model, std::size_t n_iter, RngStream& rng,
                                  bool keep_latents = false);

struct MwgOptions {
  double beta_step_sd = 1.0;
  /// Spread of the log-normal proposal on sigma.
  double log_sigma_spread = 0.04;
  /// When false the spread is read as a standard deviation.
  bool spread_is_variance = true;
  /// Replace the likelihood by a constant (prior recovery check).
  bool flat_likelihood = false;
  double beta0 = 0.0;
  double sigma2_0 = 1.0;
};

/// Metropolis-within-Gibbs on (beta, sigma^2) for the single-covariate probit
/// P(y=1) = Phi(x beta / sigma) with prior sigma^-4 exp(-1/sigma^2)
/// exp(-beta^2/50). Block 0 is beta, block 1 is sigma^2.
Chain mwg_probit_overparam_run(const Vector& x, const Vector& y, std::size_t n_iter, RngStream& rng,
                               const MwgOptions& options = {});

/// Log posterior of the over-parameterized probit at (beta, sigma^2).
double overparam_log_posterior(const Vector& x, const Vector& y, double beta, double sigma2, bool flat_likelihood);

struct SeriesDiagnostics {
  std::vector<double> autocorrelation;  // lags 0..50
  /// Integrated autocorrelation time; +inf for a constant series.
  double iact = 0.0;
  double ess = 0.0;
};

/// Autocorrelations up to `max_lag` and the initial-positive-sequence IACT.
SeriesDiagnostics series_diagnostics(const Vector& series, std::size_t max_lag = 50);

struct ChainDiagnostics {
  double acceptance_rate = 0.0;
  std::vector<SeriesDiagnostics> coordinates;
};

/// Requires at least 100 states.
ChainDiagnostics chain_diagnostics(const Chain& chain);

}  // namespace bayescomp
