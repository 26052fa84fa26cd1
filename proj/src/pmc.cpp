#include "bayescomp/pmc.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace bayescomp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix weighted_covariance(const std::vector<Vector>& points, const Vector& w) {
  const auto p = points.front().size();
  Vector mean = Vector::Zero(p);
  for (std::size_t i = 0; i < points.size(); ++i) mean += w(static_cast<Eigen::Index>(i)) * points[i];
  Matrix cov = Matrix::Zero(p, p);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector d = points[i] - mean;
    cov += w(static_cast<Eigen::Index>(i)) * d * d.transpose();
  }
  return cov;
}

bool positive_definite(const Matrix& m) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

Vector normalized_or_throw(const Population& pop) {
  try {
    return pop.weighted().normalized_weights();
  } catch (const Error& e) {
    throw Error(ErrorCode::kDegenerateWeights,
                "PMC weights degenerate at iteration " + std::to_string(pop.iteration) + ": " + e.what());
  }
}

}  // namespace

InitialProposal gaussian_proposal(Vector mean, Matrix covariance) {
  const auto mvn = std::make_shared<const MvnParams>(std::move(mean), std::move(covariance));
  if (mvn->degenerate()) throw Error(ErrorCode::kInvalidParameter, "Gaussian proposal needs a full-rank covariance");
  return {[mvn](const Vector& x) { return mvn->logpdf(x); }, [mvn](RngStream& rng) { return mvn->sample(rng); }};
}

KernelBank KernelBank::uniform(std::vector<double> scales, Matrix base_covariance, double floor) {
  KernelBank bank;
  require(!scales.empty(), "kernel bank needs at least one scale");
  for (double s : scales) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidParameter, "kernel scales must be positive");
  }
  if (!(floor >= 0.0) || floor * static_cast<double>(scales.size()) >= 1.0) {
    throw Error(ErrorCode::kInvalidParameter, "kernel weight floor too large for the bank size");
  }
  bank.weights = Vector::Constant(static_cast<Eigen::Index>(scales.size()), 1.0 / static_cast<double>(scales.size()));
  bank.scales = std::move(scales);
  bank.base_covariance = std::move(base_covariance);
  bank.floor = floor;
  return bank;
}

KernelBank dkernel_update(const KernelBank& bank, const Population& pop,
                          const std::vector<std::size_t>& kernel_assignments) {
  require(kernel_assignments.size() == pop.particles.size(), "one kernel assignment per particle");
  const Vector w = normalized_or_throw(pop);
  const auto k = static_cast<Eigen::Index>(bank.size());
  Vector mass = Vector::Zero(k);
  for (std::size_t i = 0; i < kernel_assignments.size(); ++i) {
    require(kernel_assignments[i] < bank.size(), "kernel assignment out of range");
    mass(static_cast<Eigen::Index>(kernel_assignments[i])) += w(static_cast<Eigen::Index>(i));
  }
  mass /= mass.sum();
  KernelBank next = bank;
  next.weights = (bank.floor + (1.0 - static_cast<double>(k) * bank.floor) * mass.array()).matrix();
  next.weights /= next.weights.sum();
  const Matrix cov = weighted_covariance(pop.particles, w);
  if (positive_definite(cov)) next.base_covariance = cov;
  return next;
}

std::vector<Population> pmc_run(const BayesModel& target, const InitialProposal& q0, KernelBank bank,
                                const PmcOptions& options, RngStream& rng) {
  const std::size_t n = options.particles;
  if (n < 2) throw Error(ErrorCode::kDegenerateWeights, "PMC needs N >= 2 particles; resampling collapses at iteration 0");
  require(options.iterations >= 1, "PMC needs T >= 1");
  require(bank.size() >= 1 && static_cast<std::size_t>(bank.weights.size()) == bank.size(), "kernel bank is malformed");

  std::vector<Population> history;
  history.reserve(options.iterations);

  Population pop;
  pop.iteration = 0;
  pop.kernel_weights = bank.weights;
  const WeightedSample first = importance_sample(posterior_density(target), q0.logpdf, q0.draw, n, rng);
  pop.particles = first.points;
  pop.log_weights = first.log_weights;

  for (std::size_t t = 0;; ++t) {
    const Vector w = normalized_or_throw(pop);
    pop.ess = 1.0 / w.squaredNorm();
    const auto resampled = sir_resample(pop.weighted(), n, rng);
    pop.resampled = resampled.points;

    if (t == 0) {
      const Matrix cov = weighted_covariance(pop.particles, w);
      if (positive_definite(cov)) bank.base_covariance = cov;
    } else {
      bank = dkernel_update(bank, pop, pop.kernel_assignments);
    }
    history.push_back(pop);
    if (t + 1 == options.iterations) break;

    require(positive_definite(bank.base_covariance), "PMC base covariance is not positive definite");
    std::vector<MvnParams> kernels;
    kernels.reserve(bank.size());
    for (double s : bank.scales) kernels.emplace_back(Vector::Zero(bank.base_covariance.rows()), s * bank.base_covariance);
    const MvnParams base(Vector::Zero(bank.base_covariance.rows()), bank.base_covariance);
    std::vector<double> log_mix(bank.size());
    for (std::size_t j = 0; j < bank.size(); ++j) log_mix[j] = std::log(bank.weights(static_cast<Eigen::Index>(j)));
    const CategoricalTable kernel_table(log_mix);

    Population next;
    next.iteration = t + 1;
    next.kernel_weights = bank.weights;
    next.particles.resize(n);
    next.kernel_assignments.resize(n);
    next.log_weights.resize(static_cast<Eigen::Index>(n));
    const auto& centers = history.back().resampled;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = kernel_table.draw(rng);
      Vector theta = centers[i] + kernels[j].sample(rng);
      double lq = 0.0;
      switch (options.density) {
        case PmcDensity::kConditional:
          lq = kernels[j].logpdf(theta - centers[i]);
          break;
        case PmcDensity::kUnadjusted:
          lq = base.logpdf(theta - centers[i]);
          break;
        case PmcDensity::kFullMixture: {
          std::vector<double> terms;
          terms.reserve(n * bank.size());
          for (std::size_t jj = 0; jj < bank.size(); ++jj) {
            for (const auto& c : centers) terms.push_back(log_mix[jj] + kernels[jj].logpdf(theta - c));
          }
          lq = log_sum_exp(terms) - std::log(static_cast<double>(n));
          break;
        }
      }
      const double lp = log_posterior(target, theta);
      next.log_weights(static_cast<Eigen::Index>(i)) = lp == kNegInf ? kNegInf : lp - lq;
      next.kernel_assignments[i] = j;
      next.particles[i] = std::move(theta);
    }
    pop = std::move(next);
  }
  return history;
}

}  // namespace bayescomp
