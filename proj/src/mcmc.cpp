#include "bayescomp/mcmc.hpp"

#include "bayescomp/distributions.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace bayescomp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_start(double lp) {
  if (!(lp > kNegInf)) throw Error(ErrorCode::kStart, "starting value has zero posterior density");
}

}  // namespace

long Chain::accepted() const { return std::accumulate(accept_counts.begin(), accept_counts.end(), 0L); }
long Chain::proposed() const { return std::accumulate(proposal_counts.begin(), proposal_counts.end(), 0L); }

double Chain::acceptance_rate() const {
  const long n = proposed();
  return n == 0 ? 0.0 : static_cast<double>(accepted()) / static_cast<double>(n);
}

double Chain::block_acceptance_rate(std::size_t block) const {
  require(block < proposal_counts.size(), "no such MH block");
  return proposal_counts[block] == 0 ? 0.0
                                     : static_cast<double>(accept_counts[block]) / static_cast<double>(proposal_counts[block]);
}

Vector Chain::coordinate(std::size_t j) const {
  Vector out(static_cast<Eigen::Index>(states.size()));
  for (std::size_t t = 0; t < states.size(); ++t) out(static_cast<Eigen::Index>(t)) = states[t](static_cast<Eigen::Index>(j));
  return out;
}

Chain mh_run(const BayesModel& target, const MhProposal& proposal, const Vector& theta0, std::size_t n_iter,
             RngStream& rng) {
  require(static_cast<bool>(proposal.draw), "MH proposal needs a draw function");
  Vector theta = theta0;
  double lp = log_posterior(target, theta);
  check_start(lp);

  Chain chain;
  chain.accept_counts = {0};
  chain.proposal_counts = {0};
  chain.proposal_family = proposal.family;
  chain.proposal_scale = proposal.scale;
  chain.states.reserve(n_iter);
  chain.log_posts.reserve(n_iter);
  for (std::size_t t = 0; t < n_iter; ++t) {
    Vector cand = proposal.draw(theta, rng);
    if (cand.size() != theta.size() || cand.hasNaN()) {
      throw Error(ErrorCode::kProposal, "proposal returned NaN or wrong length at iteration " + std::to_string(t));
    }
    const double lp_cand = log_posterior(target, cand);
    double log_ratio = lp_cand - lp;
    if (proposal.log_density && lp_cand > kNegInf) {
      const double back = proposal.log_density(theta, cand);
      const double fwd = proposal.log_density(cand, theta);
      if (std::isnan(back) || std::isnan(fwd)) {
        throw Error(ErrorCode::kProposal, "proposal density is NaN at iteration " + std::to_string(t));
      }
      log_ratio += back - fwd;
    }
    const double u = rng.uniform();
    ++chain.proposal_counts[0];
    if (std::log(u) < log_ratio) {
      theta = std::move(cand);
      lp = lp_cand;
      ++chain.accept_counts[0];
    }
    chain.states.push_back(theta);
    chain.log_posts.push_back(lp);
  }
  return chain;
}

Chain rw_mh_run(const BayesModel& target, const Matrix& covariance, const Vector& theta0, std::size_t n_iter,
                RngStream& rng) {
  require(static_cast<std::size_t>(covariance.rows()) == target.dimension, "random-walk covariance has wrong size");
  const MvnParams step(Vector::Zero(covariance.rows()), covariance);
  MhProposal proposal;
  proposal.family = "gaussian-random-walk";
  proposal.scale = covariance.trace();
  proposal.draw = [step](const Vector& from, RngStream& r) -> Vector { return from + step.sample(r); };
  return mh_run(target, proposal, theta0, n_iter, rng);
}

Chain gibbs_run(const std::vector<GibbsBlock>& blocks, const Vector& theta0, std::size_t n_iter, RngStream& rng,
                const LogDensity& log_target) {
  require(!blocks.empty(), "Gibbs needs at least one block");
  std::vector<int> seen(static_cast<std::size_t>(theta0.size()), 0);
  for (const auto& b : blocks) {
    require(!b.indices.empty(), "Gibbs block is empty");
    for (auto i : b.indices) {
      require(i < seen.size(), "Gibbs block index out of range");
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    require(seen[i] == 1, "Gibbs blocks do not partition the coordinates (index " + std::to_string(i) + ")");
  }

  Chain chain;
  chain.proposal_family = "gibbs";
  chain.states.reserve(n_iter);
  Vector theta = theta0;
  for (std::size_t t = 0; t < n_iter; ++t) {
    for (const auto& b : blocks) {
      const Vector v = b.sample(theta, rng);
      require(static_cast<std::size_t>(v.size()) == b.indices.size(), "Gibbs block sampler returned wrong length");
      for (std::size_t k = 0; k < b.indices.size(); ++k) theta(static_cast<Eigen::Index>(b.indices[k])) = v(static_cast<Eigen::Index>(k));
    }
    chain.states.push_back(theta);
    if (log_target) chain.log_posts.push_back(log_target(theta));
  }
  return chain;
}

ProbitGibbsChain probit_gibbs_run(const ProbitModel& model, std::size_t n_iter, RngStream& rng, bool keep_latents) {
  const auto fit = probit_mle(model);
  const auto completion = probit_latent_completion(model);
  const auto target = model.bayes_model();
  ProbitGibbsChain out;
  out.chain.proposal_family = "probit-data-augmentation";
  out.chain.states.reserve(n_iter);
  out.chain.log_posts.reserve(n_iter);
  if (keep_latents) out.latents.reserve(n_iter);
  Vector beta = fit.beta;
  for (std::size_t t = 0; t < n_iter; ++t) {
    Vector z = completion.sample_latents(beta, rng);
    beta = completion.sample_params(z, rng);
    out.chain.states.push_back(beta);
    out.chain.log_posts.push_back(log_posterior(target, beta));
    if (keep_latents) out.latents.push_back(std::move(z));
  }
  return out;
}

double overparam_log_posterior(const Vector& x, const Vector& y, double beta, double sigma2, bool flat_likelihood) {
  if (!(sigma2 > 0.0) || !std::isfinite(beta) || !std::isfinite(sigma2)) return kNegInf;
  double lp = -2.0 * std::log(sigma2) - 1.0 / sigma2 - beta * beta / 50.0;
  if (flat_likelihood) return lp;
  const double ratio = beta / std::sqrt(sigma2);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double eta = x(i) * ratio;
    lp += y(i) > 0.5 ? normal_logcdf(eta) : normal_logcdf(-eta);
  }
  return lp;
}

Chain mwg_probit_overparam_run(const Vector& x, const Vector& y, std::size_t n_iter, RngStream& rng,
                               const MwgOptions& options) {
  require(x.size() == y.size(), "covariate and response lengths differ");
  require(options.beta_step_sd > 0.0 && options.log_sigma_spread > 0.0, "MwG proposal scales must be positive");
  const double log_sigma_sd = options.spread_is_variance ? std::sqrt(options.log_sigma_spread) : options.log_sigma_spread;
  double beta = options.beta0;
  double sigma2 = options.sigma2_0;
  double lp = overparam_log_posterior(x, y, beta, sigma2, options.flat_likelihood);
  check_start(lp);

  Chain chain;
  chain.proposal_family = "metropolis-within-gibbs";
  chain.proposal_scale = options.beta_step_sd;
  chain.accept_counts = {0, 0};
  chain.proposal_counts = {0, 0};
  chain.states.reserve(n_iter);
  chain.log_posts.reserve(n_iter);
  for (std::size_t t = 0; t < n_iter; ++t) {
    const double beta_c = beta + options.beta_step_sd * rng.normal();
    const double lp_b = overparam_log_posterior(x, y, beta_c, sigma2, options.flat_likelihood);
    ++chain.proposal_counts[0];
    if (std::log(rng.uniform()) < lp_b - lp) {
      beta = beta_c;
      lp = lp_b;
      ++chain.accept_counts[0];
    }
    // log sigma' = log sigma + s Z, so log sigma2' moves by 2 s Z.
    const double sigma2_c = sigma2 * std::exp(2.0 * log_sigma_sd * rng.normal());
    const double lp_s = overparam_log_posterior(x, y, beta, sigma2_c, options.flat_likelihood);
    const double hastings = std::log(sigma2_c) - std::log(sigma2);
    ++chain.proposal_counts[1];
    if (std::log(rng.uniform()) < lp_s - lp + hastings) {
      sigma2 = sigma2_c;
      lp = lp_s;
      ++chain.accept_counts[1];
    }
    Vector s(2);
    s << beta, sigma2;
    chain.states.push_back(std::move(s));
    chain.log_posts.push_back(lp);
  }
  return chain;
}

SeriesDiagnostics series_diagnostics(const Vector& series, std::size_t max_lag) {
  const auto n = static_cast<std::size_t>(series.size());
  require(n >= 2, "series needs at least two values");
  const double mean = series.mean();
  const Vector d = series.array() - mean;
  const double c0 = d.squaredNorm() / static_cast<double>(n);
  SeriesDiagnostics out;
  auto acf = [&](std::size_t lag) {
    if (lag >= n) return 0.0;
    const double c = d.head(static_cast<Eigen::Index>(n - lag)).dot(d.tail(static_cast<Eigen::Index>(n - lag)));
    return c / static_cast<double>(n) / c0;
  };
  if (!(c0 > 0.0)) {
    out.autocorrelation.assign(max_lag + 1, std::numeric_limits<double>::quiet_NaN());
    out.iact = std::numeric_limits<double>::infinity();
    out.ess = 0.0;
    return out;
  }
  out.autocorrelation.reserve(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) out.autocorrelation.push_back(acf(k));

  // Geyer's initial positive sequence: sum pairs while they stay positive.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double gamma = acf(2 * m) + acf(2 * m + 1);
    if (!(gamma > 0.0)) break;
    tau += 2.0 * gamma;
  }
  out.iact = std::max(tau, 1.0 / static_cast<double>(n));
  out.ess = static_cast<double>(n) / out.iact;
  return out;
}

ChainDiagnostics chain_diagnostics(const Chain& chain) {
  require(chain.size() >= 100, "chain diagnostics need at least 100 states");
  ChainDiagnostics out;
  out.acceptance_rate = chain.acceptance_rate();
  const auto p = static_cast<std::size_t>(chain.states.front().size());
  for (std::size_t j = 0; j < p; ++j) out.coordinates.push_back(series_diagnostics(chain.coordinate(j)));
  return out;
}

}  // namespace bayescomp
