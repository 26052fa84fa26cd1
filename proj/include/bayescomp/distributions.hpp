#pragma once

#include "bayescomp/core.hpp"
#include "bayescomp/rng.hpp"

#include <span>

namespace bayescomp {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
double normal_logpdf(double x);
/// Standard normal CDF. Total on finite reals; never negative.
double normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail where Phi itself underflows.
double normal_logcdf(double x);
/// Inverse standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

double log_sum_exp(std::span<const double> v);
inline double log_sum_exp(const Vector& v) { return log_sum_exp(std::span<const double>(v.data(), v.size())); }

/// log of the mean of exp(v), i.e. log_sum_exp(v) - log(n).
double log_mean_exp(std::span<const double> v);

enum class TruncationSide { kBelowZero, kAboveZero };

/// One draw from N(mu, sigma^2) restricted to (0, inf) or (-inf, 0).
/// Inversion for moderate truncation points; exponential-proposal rejection
/// when the truncation point lies more than 5 sd into the tail.
double sample_truncated_normal(double mu, double sigma, TruncationSide side, RngStream& rng);

/// Standard normal conditioned on X > a.
double sample_std_normal_above(double a, RngStream& rng);

/// Index drawn with probability proportional to exp(log_weights[i]).
std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng);

/// Precomputed table for repeated categorical draws from one weight vector.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> log_weights);
  std::size_t draw(RngStream& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

double sample_gamma(double shape, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);

double log_binomial_coefficient(double n, double k);
/// log Binomial(k; n, p); -inf outside the support, including p in {0, 1} edge cases.
double binomial_logpmf(long k, long n, double p);

/// Lower-triangular factor of a symmetric PSD matrix. Pivots below
/// `tol * max(diag)` are treated as exact zeros (semidefinite directions);
/// a significantly negative pivot or inconsistent zero column throws
/// kFactorization.
Matrix psd_cholesky(const Matrix& cov, double rel_tol = 1e-12);

/// Multivariate normal with validated covariance.
class MvnParams {
 public:
  MvnParams(Vector mean, Matrix covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  const Matrix& cholesky() const { return chol_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  bool degenerate() const { return rank_ < dim(); }

  Vector sample(RngStream& rng) const;
  /// Requires a full-rank covariance.
  double logpdf(const Vector& x) const;
  /// (x - mean)' cov^{-1} (x - mean); requires a full-rank covariance.
  double mahalanobis2(const Vector& x) const;

 private:
  Vector mean_;
  Matrix cov_;
  Matrix chol_;
  std::size_t rank_ = 0;
  double log_det_ = 0.0;
};

inline Vector sample_mvn(const MvnParams& params, RngStream& rng) { return params.sample(rng); }

}  // namespace bayescomp
