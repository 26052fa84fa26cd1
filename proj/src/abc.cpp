#include "bayescomp/abc.hpp"

#include "bayescomp/distributions.hpp"
#include "bayescomp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bayescomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || v[hi] == v[lo]) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

double distance_to(const SimulableModel& model, const AbcConfig& config, const Vector& eta_obs, const Vector& theta,
                   RngStream& rng) {
  const double d = config.distance(model.summary(model.simulate(theta, rng)), eta_obs);
  return std::isnan(d) ? kInf : d;
}

void finish_population(AbcPopulation& pop) {
  const Vector w = WeightedSample{pop.particles, pop.log_weights}.normalized_weights();
  pop.ess = 1.0 / w.squaredNorm();
}

}  // namespace

double euclidean_distance(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "summaries differ in length");
  return (a - b).norm();
}

void AbcConfig::validate() const {
  if (tolerance.has_value() == quantile.has_value() && schedule.empty()) {
    throw Error(ErrorCode::kConfig, "set exactly one of tolerance and quantile");
  }
  if (tolerance && !(*tolerance >= 0.0)) throw Error(ErrorCode::kConfig, "tolerance must be nonnegative");
  if (quantile && !(*quantile > 0.0 && *quantile <= 1.0)) throw Error(ErrorCode::kConfig, "quantile must lie in (0, 1]");
  if (n_output < 1) throw Error(ErrorCode::kConfig, "n_output must be positive");
  if (!(kernel_scale_rule > 0.0)) throw Error(ErrorCode::kConfig, "kernel_scale_rule must be positive");
  for (std::size_t t = 1; t < schedule.size(); ++t) {
    if (schedule[t] > schedule[t - 1]) throw Error(ErrorCode::kConfig, "tolerance schedule must be non-increasing");
  }
  if (!distance) throw Error(ErrorCode::kConfig, "distance function is missing");
}

double AbcPopulation::acceptance_rate() const {
  return proposals == 0 ? 0.0 : static_cast<double>(particles.size()) / static_cast<double>(proposals);
}

AbcPopulation abc_reject(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config, RngStream& rng) {
  config.validate();
  const Vector eta_obs = model.summary(y_obs);
  AbcPopulation pop;
  if (config.quantile && !config.tolerance) {
    const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(config.n_output) / *config.quantile));
    std::vector<Vector> thetas;
    std::vector<double> dists;
    thetas.reserve(m);
    dists.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      thetas.push_back(model.sample_prior(rng));
      dists.push_back(distance_to(model, config, eta_obs, thetas.back(), rng));
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dists[a] < dists[b]; });
    order.resize(config.n_output);
    std::sort(order.begin(), order.end());
    for (auto i : order) {
      pop.particles.push_back(thetas[i]);
      pop.distances.push_back(dists[i]);
    }
    pop.epsilon = *std::max_element(pop.distances.begin(), pop.distances.end());
    pop.proposals = m;
  } else {
    const double eps = config.tolerance ? *config.tolerance : config.schedule.front();
    pop.epsilon = eps;
    while (pop.particles.size() < config.n_output) {
      Vector theta = model.sample_prior(rng);
      const double d = distance_to(model, config, eta_obs, theta, rng);
      ++pop.proposals;
      if (d <= eps) {
        pop.particles.push_back(std::move(theta));
        pop.distances.push_back(d);
      }
      if (pop.proposals >= config.max_proposals &&
          static_cast<double>(pop.particles.size()) < 1e-6 * static_cast<double>(pop.proposals)) {
        throw Error(ErrorCode::kToleranceTooSmall, "ABC acceptance probability below 1e-6 after " +
                                                       std::to_string(pop.proposals) + " proposals; raise epsilon");
      }
    }
  }
  pop.log_weights = Vector::Zero(static_cast<Eigen::Index>(pop.particles.size()));
  finish_population(pop);
  return pop;
}

Chain abc_mcmc(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config, const MhProposal& proposal,
               std::size_t n_iter, RngStream& rng) {
  config.validate();
  if (!config.tolerance) throw Error(ErrorCode::kConfig, "ABC-MCMC needs a fixed tolerance");
  require(static_cast<bool>(model.log_prior), "ABC-MCMC needs the prior density");
  AbcConfig init = config;
  init.n_output = 1;
  const auto start = abc_reject(model, y_obs, init, rng);
  const Vector eta_obs = model.summary(y_obs);
  const double eps = *config.tolerance;

  Vector theta = start.particles.front();
  double lp = model.log_prior(theta);
  Chain chain;
  chain.accept_counts = {0};
  chain.proposal_counts = {0};
  chain.proposal_family = "abc-" + proposal.family;
  chain.proposal_scale = proposal.scale;
  chain.states.reserve(n_iter);
  chain.log_posts.reserve(n_iter);
  for (std::size_t t = 0; t < n_iter; ++t) {
    Vector cand = proposal.draw(theta, rng);
    if (cand.hasNaN()) throw Error(ErrorCode::kProposal, "ABC-MCMC proposal returned NaN");
    const double lp_cand = model.log_prior(cand);
    double log_ratio = lp_cand - lp;
    if (proposal.log_density && lp_cand > -kInf) log_ratio += proposal.log_density(theta, cand) - proposal.log_density(cand, theta);
    const double u = rng.uniform();
    ++chain.proposal_counts[0];
    // Pseudo-data only matter when the prior/proposal ratio would accept.
    if (std::log(u) < log_ratio && distance_to(model, config, eta_obs, cand, rng) <= eps) {
      theta = std::move(cand);
      lp = lp_cand;
      ++chain.accept_counts[0];
    }
    chain.states.push_back(theta);
    chain.log_posts.push_back(lp);
  }
  return chain;
}

std::vector<AbcPopulation> abc_pmc(const SimulableModel& model, const Vector& y_obs, const AbcConfig& config,
                                   std::size_t generations, RngStream& rng) {
  config.validate();
  require(config.n_output >= 100, "ABC-PMC needs at least 100 particles");
  require(generations >= 2, "ABC-PMC needs at least two generations");
  require(static_cast<bool>(model.log_prior), "ABC-PMC needs the prior density");
  const bool explicit_schedule = !config.schedule.empty();
  if (!explicit_schedule && !config.quantile) throw Error(ErrorCode::kConfig, "ABC-PMC needs a quantile or a schedule");
  const std::size_t n = config.n_output;
  const Vector eta_obs = model.summary(y_obs);

  std::vector<AbcPopulation> out;
  {
    AbcConfig first = config;
    if (explicit_schedule) {
      first.tolerance = config.schedule.front();
      first.quantile.reset();
    } else {
      first.tolerance.reset();
    }
    out.push_back(abc_reject(model, y_obs, first, rng));
  }

  for (std::size_t t = 1; t < generations; ++t) {
    const AbcPopulation& prev = out.back();
    double eps = 0.0;
    if (explicit_schedule) {
      eps = config.schedule[std::min(t, config.schedule.size() - 1)];
    } else {
      eps = quantile_of(prev.distances, *config.quantile);
      if (!(eps < prev.epsilon)) break;
    }

    const Vector w = WeightedSample{prev.particles, prev.log_weights}.normalized_weights();
    const auto p = prev.particles.front().size();
    Vector mean = Vector::Zero(p);
    for (std::size_t i = 0; i < n; ++i) mean += w(static_cast<Eigen::Index>(i)) * prev.particles[i];
    Matrix cov = Matrix::Zero(p, p);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector d = prev.particles[i] - mean;
      cov += w(static_cast<Eigen::Index>(i)) * d * d.transpose();
    }
    const MvnParams kernel(Vector::Zero(p), config.kernel_scale_rule * cov);
    if (kernel.degenerate()) {
      throw Error(ErrorCode::kDegenerateWeights,
                  "ABC-PMC particles collapsed to a lower-dimensional set at generation " + std::to_string(t));
    }
    std::vector<double> prev_lw(prev.log_weights.data(), prev.log_weights.data() + prev.log_weights.size());
    const CategoricalTable picker(prev_lw);
    const double prev_norm = log_sum_exp(prev.log_weights);

    AbcPopulation pop;
    pop.t = t;
    pop.epsilon = eps;
    pop.particles.reserve(n);
    pop.distances.reserve(n);
    while (pop.particles.size() < n) {
      const std::size_t j = picker.draw(rng);
      Vector theta = prev.particles[j] + kernel.sample(rng);
      ++pop.proposals;
      if (pop.proposals > config.max_proposals) {
        throw Error(ErrorCode::kToleranceTooSmall,
                    "ABC-PMC generation " + std::to_string(t) + " exceeded the proposal budget at epsilon " + std::to_string(eps));
      }
      if (!(model.log_prior(theta) > -kInf)) continue;
      const double d = distance_to(model, config, eta_obs, theta, rng);
      if (d <= eps) {
        pop.particles.push_back(std::move(theta));
        pop.distances.push_back(d);
      }
    }
    pop.log_weights.resize(static_cast<Eigen::Index>(n));
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) terms[j] = prev_lw[j] - prev_norm + kernel.logpdf(pop.particles[i] - prev.particles[j]);
      pop.log_weights(static_cast<Eigen::Index>(i)) = model.log_prior(pop.particles[i]) - log_sum_exp(terms);
    }
    finish_population(pop);
    if (pop.ess < 10.0) {
      throw Error(ErrorCode::kDegenerateWeights,
                  "ABC-PMC weights degenerate (ESS " + std::to_string(pop.ess) + ") at generation " + std::to_string(t));
    }
    out.push_back(std::move(pop));
  }
  return out;
}

SimulableModel probit_simulable(const ProbitModel& model) {
  SimulableModel m;
  m.sample_prior = [model](RngStream& rng) { return model.gprior().sample(rng); };
  m.log_prior = [model](const Vector& beta) { return model.gprior_logpdf(beta); };
  m.simulate = [model](const Vector& beta, RngStream&) { return probit_abc_summary(model, beta); };
  m.summary = [](const Vector& eta) { return eta; };
  return m;
}

std::vector<AbcPopulation> probit_abc(const ProbitModel& model, const AbcConfig& config, std::size_t generations,
                                      RngStream& rng) {
  const auto fit = probit_mle(model);
  return abc_pmc(probit_simulable(model), probit_abc_summary(model, fit.beta), config, generations, rng);
}

std::pair<Vector, Vector> weighted_moments(const std::vector<Vector>& points, const Vector& log_weights) {
  const Vector w = WeightedSample{points, log_weights}.normalized_weights();
  const auto p = points.front().size();
  Vector mean = Vector::Zero(p);
  for (std::size_t i = 0; i < points.size(); ++i) mean += w(static_cast<Eigen::Index>(i)) * points[i];
  Vector var = Vector::Zero(p);
  for (std::size_t i = 0; i < points.size(); ++i) {
    var += w(static_cast<Eigen::Index>(i)) * (points[i] - mean).array().square().matrix();
  }
  return {mean, var.cwiseSqrt()};
}

}  // namespace bayescomp
