#include "bayescomp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bayescomp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt1_2 = 0.70710678118654752440;
}  // namespace

double normal_pdf(double x) { return std::exp(normal_logpdf(x)); }

double normal_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double normal_logcdf(double x) {
  if (x > 8.0) return std::log1p(-0.5 * std::erfc(x * kSqrt1_2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x * kSqrt1_2));
  if (std::isinf(x)) return -kInf;
  // Asymptotic Mills-ratio expansion; the neglected term is below 1e-15 here.
  const double z = 1.0 / (x * x);
  const double series = 1.0 + z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 + z * (-945.0 + z * 10395.0)))));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0)) return p == 0.0 ? -kInf : std::numeric_limits<double>::quiet_NaN();
  if (!(p < 1.0)) return p == 1.0 ? kInf : std::numeric_limits<double>::quiet_NaN();

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -kInf;
  const double m = *std::max_element(v.begin(), v.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

double sample_std_normal_above(double a, RngStream& rng) {
  if (a > 5.0) {
    // Exponential proposal with the optimal rate for this truncation point.
    const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double x = a + rng.exponential() / lambda;
      const double d = x - lambda;
      if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
    }
  }
  const double tail = 0.5 * std::erfc(a * kSqrt1_2);
  for (;;) {
    const double x = -normal_quantile(rng.uniform() * tail);
    if (x > a) return x;
  }
}

double sample_truncated_normal(double mu, double sigma, TruncationSide side, RngStream& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw Error(ErrorCode::kInvalidParameter, "truncated normal needs finite mu and sigma > 0");
  }
  const double a = -mu / sigma;
  for (;;) {
    double z;
    if (side == TruncationSide::kAboveZero) {
      z = mu + sigma * sample_std_normal_above(a, rng);
      if (z > 0.0) return z;
    } else {
      z = mu - sigma * sample_std_normal_above(-a, rng);
      if (z < 0.0) return z;
    }
  }
}

CategoricalTable::CategoricalTable(std::span<const double> log_weights) {
  const double m = log_weights.empty() ? -kInf : *std::max_element(log_weights.begin(), log_weights.end());
  if (!(m > -kInf) || std::isnan(m)) {
    throw Error(ErrorCode::kDegenerateWeights, "all log-weights are -inf");
  }
  if (std::isinf(m)) throw Error(ErrorCode::kDegenerateWeights, "log-weight is +inf");
  cumulative_.reserve(log_weights.size());
  double acc = 0.0;
  for (double w : log_weights) {
    if (std::isnan(w)) throw Error(ErrorCode::kDegenerateWeights, "log-weight is NaN");
    acc += std::exp(w - m);
    cumulative_.push_back(acc);
  }
}

std::size_t CategoricalTable::draw(RngStream& rng) const {
  const double target = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng) {
  return CategoricalTable(log_weights).draw(rng);
}

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw Error(ErrorCode::kInvalidParameter, "gamma shape must be positive");
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double sample_beta(double a, double b, RngStream& rng) {
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  return x / (x + y);
}

double log_binomial_coefficient(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_logpmf(long k, long n, double p) {
  if (n < 0 || k < 0 || k > n || !(p >= 0.0 && p <= 1.0)) return -kInf;
  if (p == 0.0) return k == 0 ? 0.0 : -kInf;
  if (p == 1.0) return k == n ? 0.0 : -kInf;
  return log_binomial_coefficient(static_cast<double>(n), static_cast<double>(k)) + k * std::log(p) +
         (n - k) * std::log1p(-p);
}

Matrix psd_cholesky(const Matrix& cov, double rel_tol) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n) throw Error(ErrorCode::kInvalidParameter, "covariance must be square");
  const double max_diag = n == 0 ? 0.0 : cov.diagonal().cwiseAbs().maxCoeff();
  const double tol = rel_tol * max_diag;
  const double off_tol = std::sqrt(tol * max_diag);
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = cov(j, j) - lower.row(j).head(j).squaredNorm();
    if (d > tol) {
      const double ljj = std::sqrt(d);
      lower(j, j) = ljj;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        lower(i, j) = (cov(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / ljj;
      }
    } else if (d < -tol) {
      throw Error(ErrorCode::kFactorization, "covariance is not positive semidefinite (negative pivot at column " +
                                                 std::to_string(j) + ")");
    } else {
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double r = cov(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j));
        if (std::fabs(r) > off_tol) {
          throw Error(ErrorCode::kFactorization,
                      "covariance is not positive semidefinite (zero pivot with nonzero coupling at column " +
                          std::to_string(j) + ")");
        }
      }
    }
  }
  return lower;
}

MvnParams::MvnParams(Vector mean, Matrix covariance) : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const Eigen::Index p = mean_.size();
  if (cov_.rows() != p || cov_.cols() != p) {
    throw Error(ErrorCode::kInvalidParameter, "covariance shape does not match mean length");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw Error(ErrorCode::kInvalidParameter, "mean and covariance must be finite");
  }
  const double scale = p == 0 ? 0.0 : cov_.cwiseAbs().maxCoeff();
  if (p > 0 && (cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::kInvalidParameter, "covariance is not symmetric");
  }
  cov_ = (0.5 * (cov_ + cov_.transpose())).eval();
  chol_ = psd_cholesky(cov_);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (chol_(j, j) > 0.0) {
      ++rank_;
      log_det_ += 2.0 * std::log(chol_(j, j));
    }
  }
}

Vector MvnParams::sample(RngStream& rng) const {
  Vector z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean_ + chol_.triangularView<Eigen::Lower>() * z;
}

double MvnParams::mahalanobis2(const Vector& x) const {
  if (degenerate()) throw Error(ErrorCode::kFactorization, "density of a degenerate normal is undefined");
  const Vector y = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
  return y.squaredNorm();
}

double MvnParams::logpdf(const Vector& x) const {
  if (x.size() != mean_.size()) throw Error(ErrorCode::kContract, "dimension mismatch in normal density");
  return -0.5 * mahalanobis2(x) - 0.5 * log_det_ - static_cast<double>(mean_.size()) * kLogSqrt2Pi;
}

}  // namespace bayescomp
