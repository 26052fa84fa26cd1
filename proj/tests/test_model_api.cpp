#include "bayescomp/distributions.hpp"
#include "bayescomp/model.hpp"
#include "bayescomp/probit.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bayescomp;
using testing_support::code_of;

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

/// Normal likelihood of one observation with a prior supported on theta > 0.
BayesModel half_line_model() {
  BayesModel m;
  m.dimension = 1;
  m.log_prior = [](const Vector& t) { return t(0) > 0 ? -t(0) : kNegInf; };
  m.log_likelihood = [](const Vector& t) { return normal_logpdf(1.3 - t(0)); };
  return m;
}

}  // namespace

TEST_CASE("flat prior gives the likelihood") {
  BayesModel m = half_line_model();
  m.log_prior = [](const Vector&) { return 0.0; };
  for (double t : {-2.0, 0.0, 0.7, 5.0}) {
    CHECK(log_posterior(m, Vector::Constant(1, t)) == m.log_likelihood(Vector::Constant(1, t)));
  }
}

TEST_CASE("outside the prior support the posterior is minus infinity") {
  const BayesModel m = half_line_model();
  CHECK(log_posterior(m, Vector::Constant(1, -1.0)) == kNegInf);
  CHECK(posterior_density(m)(Vector::Constant(1, -1.0)) == kNegInf);
}

TEST_CASE("NaN from a model maps to minus infinity") {
  BayesModel m = half_line_model();
  m.log_likelihood = [](const Vector& t) { return t(0) > 3 ? std::nan("") : 0.0; };
  CHECK(log_posterior(m, Vector::Constant(1, 4.0)) == kNegInf);
  // -inf prior plus +inf likelihood must not produce NaN.
  m.log_likelihood = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  CHECK(log_posterior(m, Vector::Constant(1, -1.0)) == kNegInf);
}

TEST_CASE("dimension mismatch is a contract error") {
  const BayesModel m = half_line_model();
  CHECK(code_of([&] { log_posterior(m, Vector::Zero(2)); }) == ErrorCode::kContract);
}

TEST_CASE("log posterior minus log likelihood is the log prior") {
  const BayesModel m = half_line_model();
  RngStream rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vector t = Vector::Constant(1, 3.0 * rng.uniform());
    CHECK(log_posterior(m, t) - m.log_likelihood(t) == doctest::Approx(m.log_prior(t)).epsilon(1e-14));
  }
}

TEST_CASE("probit posterior at the MLE") {
  const ProbitModel model = load_pima(testing_support::pima_path());
  const BayesModel bm = model.bayes_model();
  Vector beta(3);
  beta << 0.012616, -0.029050, 0.350301;
  // loglik is -386.73 / 2 up to the rounding of the six-digit coefficients.
  CHECK(std::abs(bm.log_likelihood(beta) + 386.73 / 2) < 0.005);
  CHECK(log_posterior(bm, beta) == doctest::Approx(model.loglik(beta) + model.gprior_logpdf(beta)).epsilon(1e-15));
  // The g-prior quadratic form evaluated directly.
  const double n = static_cast<double>(model.rows());
  const Matrix xtx = model.design().transpose() * model.design();
  const double q = beta.dot(xtx * beta) / n;
  const double log_det = std::log((n * xtx.inverse()).determinant());
  CHECK(model.gprior_logpdf(beta) == doctest::Approx(-1.5 * std::log(2 * M_PI) - 0.5 * log_det - 0.5 * q).epsilon(1e-10));
}

TEST_CASE("probit latent conditional is a normalized density") {
  // p = 1 keeps the quadrature one-dimensional.
  Matrix x(4, 1);
  x << 0.5, -1.0, 2.0, 0.3;
  Vector y(4);
  y << 1, 0, 1, 0;
  const ProbitModel model(x, y);
  const auto completion = probit_latent_completion(model);
  RngStream rng(12);
  const Vector z = completion.sample_latents(Vector::Constant(1, 0.4), rng);
  double total = 0.0;
  const double h = 1e-3;
  for (double b = -20.0; b <= 20.0; b += h) total += std::exp(completion.log_full_conditional_param(Vector::Constant(1, b), z)) * h;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}
