#pragma once

#include "bayescomp/model.hpp"
#include "bayescomp/pmc.hpp"

#include <string>
#include <vector>

namespace bayescomp {

/// A log marginal likelihood or log Bayes factor with its Monte Carlo
/// standard error on the log scale.
struct EvidenceEstimate {
  double log_value = 0.0;
  double std_error = 0.0;
  std::string method;
  std::size_t n_draws = 0;
  /// False when the standard error cannot be trusted (too few draws, or an
  /// estimator with possibly infinite variance).
  bool reliable = true;
};

/// Standard error of log(mean(exp(v))) from `batches` contiguous batch means.
/// Short inputs use n/2 batches of two. Falls back to the delta method when a
/// batch carries no mass. Returns +inf when n < 4.
double batch_log_mean_exp_se(std::span<const double> v, std::size_t batches = 50);

/// log m(y) by averaging the likelihood over prior draws.
EvidenceEstimate log_evidence_prior_mc(const BayesModel& model, std::size_t n, RngStream& rng);

/// log m(y) by importance sampling from a normalized proposal g.
EvidenceEstimate log_evidence_importance(const BayesModel& model, const InitialProposal& g, std::size_t n,
                                         RngStream& rng);

/// log B01 from prior draws. Both models draw from one common child stream
/// of `rng`, so identical models give exactly zero.
EvidenceEstimate bf_prior_mc(const BayesModel& model0, const BayesModel& model1, std::size_t n0, std::size_t n1,
                             RngStream& rng);

/// log B01 from importance draws with normalized proposals g0, g1; same
/// stream policy as bf_prior_mc.
EvidenceEstimate bf_importance(const BayesModel& model0, const BayesModel& model1, const InitialProposal& g0,
                               const InitialProposal& g1, std::size_t n0, std::size_t n1, RngStream& rng);

struct BridgeOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100;
  /// Starting value of log r.
  double log_r0 = 0.0;
  /// Batch count for the standard error; 0 skips it.
  std::size_t batches = 50;
};

struct BridgeTrace {
  std::vector<double> log_r;
  std::size_t iterations = 0;
};

/// Meng-Wong iterative bridge estimate of log(c0/c1) where c_i normalizes
/// exp(log_q_i). Throws kNonConvergence (with the iterates in the message)
/// and kOverlap when the two samples share no support.
EvidenceEstimate bridge_sampling(const LogDensity& log_q0, const LogDensity& log_q1, const std::vector<Vector>& sample0,
                                 const std::vector<Vector>& sample1, const BridgeOptions& options = {},
                                 BridgeTrace* trace = nullptr);

/// Pseudo-posterior on the extra parameter psi given theta. It must be a
/// normalized density; the constructor rejects anything else.
class PseudoPosterior {
 public:
  using LogPdf = std::function<double(const Vector& psi, const Vector& theta)>;
  using Draw = std::function<Vector(const Vector& theta, RngStream&)>;
  PseudoPosterior(LogPdf logpdf, Draw draw, bool normalized);

  double logpdf(const Vector& psi, const Vector& theta) const { return logpdf_(psi, theta); }
  Vector draw(const Vector& theta, RngStream& rng) const { return draw_(theta, rng); }

 private:
  LogPdf logpdf_;
  Draw draw_;
};

/// Gaussian pseudo-posterior for psi whose mean is linear in theta:
/// psi | theta ~ N(a + B theta, S).
PseudoPosterior gaussian_pseudo_posterior(Vector intercept, Matrix slope, Matrix covariance);

/// Fits gaussian_pseudo_posterior by least squares on joint draws (theta, psi)
/// where psi occupies the last `psi_dim` coordinates.
PseudoPosterior fit_pseudo_posterior(const std::vector<Vector>& joint_sample, std::size_t psi_dim);

/// log B01 for model0 embedded in model1 at psi = psi0, where psi occupies
/// the trailing coordinates of model1. The model-0 posterior sample is
/// completed with psi ~ omega(.|theta) and bridged against sample1.
EvidenceEstimate bridge_embedded(const BayesModel& model0, const BayesModel& model1, const Vector& psi0,
                                 const PseudoPosterior& omega, const std::vector<Vector>& sample0,
                                 const std::vector<Vector>& sample1, RngStream& rng, const BridgeOptions& options = {});

/// Instrumental density for the Gelfand-Dey estimator: N(center, scatter)
/// truncated to the ellipsoid holding mass `coverage`.
struct PhiSpec {
  Vector center;
  Matrix scatter;
  double coverage = 0.25;
};

/// Moment-matched PhiSpec from a posterior sample.
PhiSpec phi_from_sample(const std::vector<Vector>& sample, double coverage = 0.25);

/// Gelfand-Dey: -log mean of phi / (prior x likelihood) over posterior
/// draws. Throws kUnstableEstimate when fewer than 10 draws fall inside the
/// truncation ellipsoid.
EvidenceEstimate harmonic_mean_gd(const LogDensity& log_prior_plus_loglik, const std::vector<Vector>& posterior_sample,
                                  const PhiSpec& phi);

/// The plain harmonic mean of the likelihood. Always marked unreliable.
EvidenceEstimate newton_raftery_hm(const LogDensity& loglik, const std::vector<Vector>& posterior_sample);

/// Chib's identity with a Rao-Blackwellized posterior ordinate at theta_star.
/// Throws kBadThetaStar when every conditional density underflows there.
EvidenceEstimate chib_marginal(const BayesModel& model, const LatentCompletion& completion,
                               const std::vector<Vector>& latents, const Vector& theta_star);

/// Posterior mean of a sample.
Vector sample_mean(const std::vector<Vector>& sample);
Matrix sample_covariance(const std::vector<Vector>& sample);

/// Combined standard error sqrt(a^2 + b^2).
double combined_se(double a, double b);

}  // namespace bayescomp
