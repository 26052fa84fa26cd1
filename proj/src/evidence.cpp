#include "bayescomp/evidence.hpp"

#include "bayescomp/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace bayescomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double sd(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

EvidenceEstimate log_mean_estimate(const std::vector<double>& terms, const std::string& method) {
  EvidenceEstimate e;
  e.method = method;
  e.n_draws = terms.size();
  e.log_value = log_mean_exp(terms);
  e.std_error = batch_log_mean_exp_se(terms);
  e.reliable = std::isfinite(e.std_error);
  return e;
}

// One fixed point of the Meng-Wong iteration on precomputed log(q0/q1).
struct BridgeSolve {
  double log_r = 0.0;
  std::vector<double> trace;
  bool converged = false;
};

BridgeSolve solve_bridge(std::span<const double> ll0, std::span<const double> ll1, const BridgeOptions& opt) {
  const double n0 = static_cast<double>(ll0.size());
  const double n1 = static_cast<double>(ll1.size());
  const double log_s0 = std::log(n0 / (n0 + n1));
  const double log_s1 = std::log(n1 / (n0 + n1));
  BridgeSolve out;
  double log_r = opt.log_r0;
  out.trace.push_back(log_r);
  std::vector<double> num(ll1.size()), den(ll0.size());
  for (std::size_t k = 0; k < opt.max_iter; ++k) {
    for (std::size_t j = 0; j < ll1.size(); ++j) {
      const double l = ll1[j];
      num[j] = l == kInf ? -log_s0 : l - log_add_exp(log_s0 + l, log_s1 + log_r);
    }
    for (std::size_t j = 0; j < ll0.size(); ++j) {
      const double l = ll0[j];
      den[j] = l == kInf ? -kInf : -log_add_exp(log_s0 + l, log_s1 + log_r);
    }
    const double log_num = log_mean_exp(num);
    const double log_den = log_mean_exp(den);
    if (!std::isfinite(log_num) || !std::isfinite(log_den)) {
      throw Error(ErrorCode::kOverlap, "bridge sampling: the two posterior samples do not overlap");
    }
    const double next = log_num - log_den;
    out.trace.push_back(next);
    const double change = std::abs(next - log_r);
    log_r = next;
    if (change < opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.log_r = log_r;
  return out;
}

std::vector<double> log_ratio_values(const LogDensity& log_q0, const LogDensity& log_q1, const std::vector<Vector>& s) {
  std::vector<double> out;
  out.reserve(s.size());
  for (const auto& theta : s) {
    double a = log_q0(theta);
    double b = log_q1(theta);
    if (std::isnan(a)) a = -kInf;
    if (std::isnan(b)) b = -kInf;
    if (a == -kInf && b == -kInf) {
      throw Error(ErrorCode::kOverlap, "bridge sampling: a sample point has zero density under both models");
    }
    out.push_back(b == -kInf ? kInf : a - b);
  }
  return out;
}

}  // namespace

double batch_log_mean_exp_se(std::span<const double> v, std::size_t batches) {
  const std::size_t n = v.size();
  const std::size_t k = std::min(batches, n / 2);
  if (k < 2) return kInf;
  const std::size_t m = n / k;
  std::vector<double> means;
  means.reserve(k);
  bool all_finite = true;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t end = b + 1 == k ? n : (b + 1) * m;
    const double lm = log_mean_exp(v.subspan(b * m, end - b * m));
    all_finite = all_finite && std::isfinite(lm);
    means.push_back(lm);
  }
  if (all_finite) return sd(means) / std::sqrt(static_cast<double>(k));
  // Some batch had no mass: delta method on the linear scale.
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return kInf;
  std::vector<double> w(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(v[i] - top);
    mean += w[i];
  }
  mean /= static_cast<double>(n);
  return sd(w) / (mean * std::sqrt(static_cast<double>(n)));
}

double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

Vector sample_mean(const std::vector<Vector>& sample) {
  require(!sample.empty(), "empty sample");
  Vector m = Vector::Zero(sample.front().size());
  for (const auto& x : sample) m += x;
  return m / static_cast<double>(sample.size());
}

Matrix sample_covariance(const std::vector<Vector>& sample) {
  require(sample.size() >= 2, "covariance needs at least two points");
  const Vector m = sample_mean(sample);
  Matrix c = Matrix::Zero(m.size(), m.size());
  for (const auto& x : sample) c += (x - m) * (x - m).transpose();
  return c / static_cast<double>(sample.size() - 1);
}

EvidenceEstimate log_evidence_prior_mc(const BayesModel& model, std::size_t n, RngStream& rng) {
  require(static_cast<bool>(model.sample_prior), "prior Monte Carlo needs a prior sampler");
  require(n >= 1, "prior Monte Carlo needs at least one draw");
  std::vector<double> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = model.log_likelihood(model.sample_prior(rng));
    terms.push_back(std::isnan(l) ? -kInf : l);
  }
  auto e = log_mean_estimate(terms, "prior-mc");
  if (!std::isfinite(e.log_value)) throw Error(ErrorCode::kModelFailure, "every prior draw has zero likelihood");
  return e;
}

EvidenceEstimate log_evidence_importance(const BayesModel& model, const InitialProposal& g, std::size_t n,
                                         RngStream& rng) {
  require(n >= 1, "importance evidence needs at least one draw");
  const auto ws = importance_sample(posterior_density(model), g.logpdf, g.draw, n, rng);
  const std::vector<double> terms(ws.log_weights.data(), ws.log_weights.data() + ws.log_weights.size());
  auto e = log_mean_estimate(terms, "importance");
  if (!std::isfinite(e.log_value)) throw Error(ErrorCode::kModelFailure, "every importance draw has zero posterior mass");
  return e;
}

namespace {

EvidenceEstimate ratio(const EvidenceEstimate& a, const EvidenceEstimate& b, const std::string& method) {
  EvidenceEstimate e;
  e.method = method;
  e.log_value = a.log_value - b.log_value;
  e.std_error = combined_se(a.std_error, b.std_error);
  e.n_draws = a.n_draws + b.n_draws;
  e.reliable = a.reliable && b.reliable;
  return e;
}

template <typename F>
EvidenceEstimate per_model(F&& f, const char* which) {
  try {
    return f();
  } catch (const Error& err) {
    throw Error(err.code(), std::string(which) + ": " + err.what());
  }
}

}  // namespace

EvidenceEstimate bf_prior_mc(const BayesModel& model0, const BayesModel& model1, std::size_t n0, std::size_t n1,
                             RngStream& rng) {
  const RngStream common = rng.split(rng());
  RngStream r0 = common;
  RngStream r1 = common;
  const auto e0 = per_model([&] { return log_evidence_prior_mc(model0, n0, r0); }, "model 0");
  const auto e1 = per_model([&] { return log_evidence_prior_mc(model1, n1, r1); }, "model 1");
  return ratio(e0, e1, "prior-mc");
}

EvidenceEstimate bf_importance(const BayesModel& model0, const BayesModel& model1, const InitialProposal& g0,
                               const InitialProposal& g1, std::size_t n0, std::size_t n1, RngStream& rng) {
  const RngStream common = rng.split(rng());
  RngStream r0 = common;
  RngStream r1 = common;
  const auto e0 = per_model([&] { return log_evidence_importance(model0, g0, n0, r0); }, "model 0");
  const auto e1 = per_model([&] { return log_evidence_importance(model1, g1, n1, r1); }, "model 1");
  return ratio(e0, e1, "importance");
}

EvidenceEstimate bridge_sampling(const LogDensity& log_q0, const LogDensity& log_q1, const std::vector<Vector>& sample0,
                                 const std::vector<Vector>& sample1, const BridgeOptions& options, BridgeTrace* trace) {
  require(!sample0.empty() && !sample1.empty(), "bridge sampling needs two nonempty samples");
  require(sample0.front().size() == sample1.front().size(), "bridge sampling needs equal dimensions");
  const auto ll0 = log_ratio_values(log_q0, log_q1, sample0);
  const auto ll1 = log_ratio_values(log_q0, log_q1, sample1);
  const auto solved = solve_bridge(ll0, ll1, options);
  if (trace != nullptr) {
    trace->log_r = solved.trace;
    trace->iterations = solved.trace.size() - 1;
  }
  if (!solved.converged) {
    std::ostringstream msg;
    msg << "bridge sampling did not converge in " << options.max_iter << " iterations; log r trace:";
    const std::size_t shown = std::min<std::size_t>(solved.trace.size(), 12);
    for (std::size_t i = solved.trace.size() - shown; i < solved.trace.size(); ++i) msg << ' ' << solved.trace[i];
    throw Error(ErrorCode::kNonConvergence, msg.str());
  }
  EvidenceEstimate e;
  e.method = "bridge";
  e.log_value = solved.log_r;
  e.n_draws = sample0.size() + sample1.size();
  e.std_error = kInf;
  e.reliable = false;
  const std::size_t k = std::min({options.batches, ll0.size() / 2, ll1.size() / 2});
  if (k >= 2) {
    std::vector<double> batch;
    batch.reserve(k);
    const std::size_t m0 = ll0.size() / k;
    const std::size_t m1 = ll1.size() / k;
    BridgeOptions inner = options;
    inner.log_r0 = solved.log_r;
    try {
      for (std::size_t b = 0; b < k; ++b) {
        const std::size_t e0 = b + 1 == k ? ll0.size() : (b + 1) * m0;
        const std::size_t e1 = b + 1 == k ? ll1.size() : (b + 1) * m1;
        const auto s = solve_bridge(std::span<const double>(ll0).subspan(b * m0, e0 - b * m0),
                                    std::span<const double>(ll1).subspan(b * m1, e1 - b * m1), inner);
        if (!s.converged) throw Error(ErrorCode::kNonConvergence, "batch bridge did not converge");
        batch.push_back(s.log_r);
      }
      e.std_error = sd(batch) / std::sqrt(static_cast<double>(k));
      e.reliable = true;
    } catch (const Error&) {
      e.std_error = kInf;
    }
  }
  return e;
}

PseudoPosterior::PseudoPosterior(LogPdf logpdf, Draw draw, bool normalized)
    : logpdf_(std::move(logpdf)), draw_(std::move(draw)) {
  require(normalized, "pseudo-posterior must be a normalized density");
  require(static_cast<bool>(logpdf_) && static_cast<bool>(draw_), "pseudo-posterior needs a density and a sampler");
}

PseudoPosterior gaussian_pseudo_posterior(Vector intercept, Matrix slope, Matrix covariance) {
  require(slope.rows() == intercept.size() && covariance.rows() == intercept.size(), "pseudo-posterior shapes disagree");
  const auto noise = std::make_shared<const MvnParams>(Vector::Zero(intercept.size()), std::move(covariance));
  require(!noise->degenerate(), "pseudo-posterior covariance must be positive definite");
  auto a = std::make_shared<const Vector>(std::move(intercept));
  auto b = std::make_shared<const Matrix>(std::move(slope));
  return PseudoPosterior(
      [noise, a, b](const Vector& psi, const Vector& theta) { return noise->logpdf(psi - *a - *b * theta); },
      [noise, a, b](const Vector& theta, RngStream& rng) -> Vector { return *a + *b * theta + noise->sample(rng); },
      true);
}

PseudoPosterior fit_pseudo_posterior(const std::vector<Vector>& joint_sample, std::size_t psi_dim) {
  require(!joint_sample.empty(), "pseudo-posterior fit needs a sample");
  const auto dim = static_cast<std::size_t>(joint_sample.front().size());
  require(psi_dim >= 1 && psi_dim < dim, "psi dimension must leave at least one theta coordinate");
  const auto p = static_cast<Eigen::Index>(dim - psi_dim);
  const auto q = static_cast<Eigen::Index>(psi_dim);
  const auto n = static_cast<Eigen::Index>(joint_sample.size());
  require(n > p + 1 + q, "pseudo-posterior fit needs more draws than parameters");
  Matrix design(n, p + 1);
  Matrix target(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = joint_sample[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design.row(i).tail(p) = x.head(p).transpose();
    target.row(i) = x.tail(q).transpose();
  }
  const Matrix coef = design.colPivHouseholderQr().solve(target);
  const Matrix resid = target - design * coef;
  const Matrix cov = resid.transpose() * resid / static_cast<double>(n - p - 1);
  return gaussian_pseudo_posterior(coef.row(0).transpose(), coef.bottomRows(p).transpose(), cov);
}

EvidenceEstimate bridge_embedded(const BayesModel& model0, const BayesModel& model1, const Vector& psi0,
                                 const PseudoPosterior& omega, const std::vector<Vector>& sample0,
                                 const std::vector<Vector>& sample1, RngStream& rng, const BridgeOptions& options) {
  const std::size_t p = model0.dimension;
  const auto k = static_cast<std::size_t>(psi0.size());
  require(model1.dimension == p + k, "model 1 must extend model 0 by psi");
  require(!sample0.empty(), "bridge_embedded needs a model-0 sample");
  Vector joint0(static_cast<Eigen::Index>(p + k));
  joint0 << sample0.front(), psi0;
  const double l0 = model0.log_likelihood(sample0.front());
  const double l1 = model1.log_likelihood(joint0);
  if (std::isfinite(l0) && std::abs(l0 - l1) > 1e-8 * std::max(1.0, std::abs(l0))) {
    throw Error(ErrorCode::kContract, "model 0 is not the psi = psi0 slice of model 1");
  }
  const auto split = [p, k](const Vector& x) { return std::pair<Vector, Vector>{x.head(p), x.tail(k)}; };
  LogDensity log_q0 = [&model0, &omega, split](const Vector& x) {
    const auto [theta, psi] = split(x);
    const double lp = log_posterior(model0, theta);
    return lp == -kInf ? lp : lp + omega.logpdf(psi, theta);
  };
  LogDensity log_q1 = [&model1](const Vector& x) { return log_posterior(model1, x); };
  std::vector<Vector> completed;
  completed.reserve(sample0.size());
  for (const auto& theta : sample0) {
    Vector x(static_cast<Eigen::Index>(p + k));
    x << theta, omega.draw(theta, rng);
    completed.push_back(std::move(x));
  }
  auto e = bridge_sampling(log_q0, log_q1, completed, sample1, options);
  e.method = "bridge-embedded";
  return e;
}

PhiSpec phi_from_sample(const std::vector<Vector>& sample, double coverage) {
  return {sample_mean(sample), sample_covariance(sample), coverage};
}

EvidenceEstimate harmonic_mean_gd(const LogDensity& log_prior_plus_loglik, const std::vector<Vector>& posterior_sample,
                                  const PhiSpec& phi) {
  require(!posterior_sample.empty(), "harmonic mean needs a posterior sample");
  if (!(phi.coverage > 0.0 && phi.coverage <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "phi coverage must lie in (0, 1]");
  }
  const MvnParams mvn(phi.center, phi.scatter);
  if (mvn.degenerate()) throw Error(ErrorCode::kInvalidParameter, "phi scatter must be positive definite");
  const double radius2 =
      phi.coverage >= 1.0
          ? kInf
          : boost::math::quantile(boost::math::chi_squared(static_cast<double>(phi.center.size())), phi.coverage);
  const double log_alpha = std::log(phi.coverage);
  std::vector<double> terms;
  terms.reserve(posterior_sample.size());
  std::size_t inside = 0;
  for (const auto& theta : posterior_sample) {
    if (mvn.mahalanobis2(theta) > radius2) {
      terms.push_back(-kInf);
      continue;
    }
    ++inside;
    const double f = log_prior_plus_loglik(theta);
    if (!(f > -kInf)) throw Error(ErrorCode::kContract, "phi puts mass where the posterior is zero");
    terms.push_back(mvn.logpdf(theta) - log_alpha - f);
  }
  if (inside < 10) {
    throw Error(ErrorCode::kUnstableEstimate,
                "only " + std::to_string(inside) + " posterior draws fall inside the phi ellipsoid (need 10)");
  }
  EvidenceEstimate e;
  e.method = "harmonic-gd";
  e.n_draws = posterior_sample.size();
  e.log_value = -log_mean_exp(terms);
  e.std_error = batch_log_mean_exp_se(terms);
  e.reliable = std::isfinite(e.std_error);
  return e;
}

EvidenceEstimate newton_raftery_hm(const LogDensity& loglik, const std::vector<Vector>& posterior_sample) {
  require(!posterior_sample.empty(), "harmonic mean needs a posterior sample");
  std::vector<double> terms;
  terms.reserve(posterior_sample.size());
  for (const auto& theta : posterior_sample) terms.push_back(-loglik(theta));
  EvidenceEstimate e;
  e.method = "newton-raftery";
  e.n_draws = posterior_sample.size();
  e.log_value = -log_mean_exp(terms);
  e.std_error = batch_log_mean_exp_se(terms);
  e.reliable = false;
  return e;
}

EvidenceEstimate chib_marginal(const BayesModel& model, const LatentCompletion& completion,
                               const std::vector<Vector>& latents, const Vector& theta_star) {
  require(!latents.empty(), "Chib's method needs latent draws");
  require(static_cast<std::size_t>(theta_star.size()) == model.dimension, "theta* has the wrong dimension");
  const double lp = model.log_prior(theta_star);
  const double ll = model.log_likelihood(theta_star);
  if (!std::isfinite(lp) || !std::isfinite(ll)) {
    throw Error(ErrorCode::kBadThetaStar, "theta* has zero prior or likelihood; choose a point of high posterior density");
  }
  std::vector<double> terms;
  terms.reserve(latents.size());
  for (const auto& z : latents) terms.push_back(completion.log_full_conditional_param(theta_star, z));
  const double ordinate = log_mean_exp(terms);
  if (!std::isfinite(ordinate)) {
    throw Error(ErrorCode::kBadThetaStar,
                "posterior ordinate underflows at theta*; choose a point of higher posterior density");
  }
  EvidenceEstimate e;
  e.method = "chib";
  e.n_draws = latents.size();
  e.log_value = lp + ll - ordinate;
  e.std_error = latents.size() >= 4 ? batch_log_mean_exp_se(terms) : 0.0;
  e.reliable = std::isfinite(e.std_error);
  return e;
}

}  // namespace bayescomp
