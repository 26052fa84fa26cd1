#pragma once

#include "bayescomp/distributions.hpp"
#include "bayescomp/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace bayescomp {

/// Probit regression y_i ~ Bernoulli(Phi(x_i' beta)) with the g-prior
/// beta ~ N(0, g (X'X)^{-1}); g defaults to the number of rows.
class ProbitModel {
 public:
  ProbitModel(Matrix design, Vector response, std::vector<std::string> names = {}, double prior_scale = 0.0);

  std::size_t rows() const { return static_cast<std::size_t>(state_->design.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(state_->design.cols()); }
  const Matrix& design() const { return state_->design; }
  const Vector& response() const { return state_->response; }
  const std::vector<std::string>& names() const { return state_->names; }
  double prior_scale() const { return state_->g; }
  const Matrix& xtx() const { return state_->xtx; }
  const Matrix& xtx_inverse() const { return state_->xtx_inv; }
  const MvnParams& gprior() const { return state_->prior; }

  /// Model restricted to the given design columns (same rows, same g rule).
  ProbitModel select_columns(const std::vector<std::size_t>& columns) const;

  double loglik(const Vector& beta) const;
  double gprior_logpdf(const Vector& beta) const;

  /// Target with the g-prior, for the generic samplers and estimators.
  BayesModel bayes_model() const;

 private:
  struct State {
    Matrix design;
    Vector response;
    std::vector<std::string> names;
    double g = 0.0;
    Matrix xtx;
    Matrix xtx_inv;
    MvnParams prior{Vector::Zero(0), Matrix::Zero(0, 0)};
  };
  std::shared_ptr<const State> state_;
};

double probit_loglik(const ProbitModel& model, const Vector& beta);
double gprior_logpdf(const ProbitModel& model, const Vector& beta);

struct ProbitFit {
  Vector beta;
  /// Inverse Fisher information at beta (what glm reports).
  Matrix covariance;
  Vector std_errors;
  int iterations = 0;
  double loglik = 0.0;
  double deviance = 0.0;
  /// Deviance of the zero-coefficient fit (no intercept: Phi(0) = 1/2).
  double null_deviance = 0.0;
};

/// Fisher scoring with step halving; stops when the score's sup-norm drops
/// below 1e-10 or the step no longer moves beta. Throws kSeparation when the
/// response is constant or the coefficients diverge, kNonConvergence after
/// 50 iterations.
ProbitFit probit_mle(const ProbitModel& model);

/// z_i | beta from the sign-truncated normals, beta | z from the exact
/// normal with shrinkage g/(g+1).
LatentCompletion probit_latent_completion(const ProbitModel& model);

/// (Phi(x_i' beta))_i: the predictive summary used by probit ABC.
Vector probit_abc_summary(const ProbitModel& model, const Vector& beta);

struct PimaData {
  Matrix design;  // columns glu, bp, ped; no intercept
  Vector response;
  std::vector<std::string> names;
  std::size_t rows() const { return static_cast<std::size_t>(design.rows()); }
};

/// Reads a comma-separated file with a header containing glu, bp, ped and
/// type (Yes/No). Other columns are ignored. Errors carry file:line and the
/// offending column.
PimaData read_pima_csv(const std::string& path);

/// read_pima_csv followed by model construction (which checks X'X).
ProbitModel load_pima(const std::string& path);

}  // namespace bayescomp
