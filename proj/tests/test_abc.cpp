#include "bayescomp/abc.hpp"
#include "bayescomp/probit.hpp"
#include "bernoulli_toy.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace bayescomp;
using testing_support::code_of;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<double> first_coord(const std::vector<Vector>& pts) {
  std::vector<double> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p(0));
  return v;
}

/// Weighted mean of the first coordinate and its standard error sd / sqrt(ESS).
std::pair<double, double> weighted_mean_se(const AbcPopulation& pop) {
  const auto [m, s] = weighted_moments(pop.particles, pop.log_weights);
  return {m(0), s(0) / std::sqrt(pop.ess)};
}

AbcConfig tolerance(double eps, std::size_t n) {
  AbcConfig c;
  c.tolerance = eps;
  c.n_output = n;
  return c;
}

MhProposal random_walk(double sd) {
  MhProposal p;
  p.family = "gaussian-random-walk";
  p.scale = sd;
  p.draw = [sd](const Vector& from, RngStream& rng) { return Vector(from.array() + sd * rng.normal()); };
  return p;
}

double se_of_chain_mean(const Chain& chain) {
  const Vector c = chain.coordinate(0);
  std::vector<double> v(c.data(), c.data() + c.size());
  return oracle::sd(v) / std::sqrt(series_diagnostics(c).ess);
}

}  // namespace

TEST_CASE("Euclidean distance and config validation") {
  Vector a(2), b(2);
  a << 1, 2;
  b << 4, 6;
  CHECK(euclidean_distance(a, b) == 5.0);
  CHECK(euclidean_distance(a, a) == 0.0);
  CHECK(euclidean_distance(b, a) == euclidean_distance(a, b));
  AbcConfig both;
  both.tolerance = 1.0;
  both.quantile = 0.1;
  CHECK(code_of([&] { both.validate(); }) == ErrorCode::kConfig);
  AbcConfig neither;
  CHECK(code_of([&] { neither.validate(); }) == ErrorCode::kConfig);
  AbcConfig rising;
  rising.schedule = {1.0, 2.0};
  CHECK(code_of([&] { rising.validate(); }) == ErrorCode::kConfig);
}

TEST_CASE("rejection at infinite tolerance returns the prior") {
  const auto model = bernoulli_toy::model(5);
  RngStream rng(101);
  const auto pop = abc_reject(model, bernoulli_toy::observed(5, 3), tolerance(kInf, 5000), rng);
  CHECK(pop.acceptance_rate() == 1.0);
  std::vector<double> a = first_coord(pop.particles), b(5000);
  for (auto& x : b) x = model.sample_prior(rng)(0);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  // Two-sample KS critical value at level 1e-3.
  CHECK(d < std::sqrt(-0.5 * std::log(5e-4)) * std::sqrt(2.0 / 5000));
}

TEST_CASE("rejection at zero tolerance is exact on the Bernoulli toy") {
  const auto model = bernoulli_toy::model(5);
  RngStream rng(102);
  const auto pop = abc_reject(model, bernoulli_toy::observed(5, 3), tolerance(0.0, 10000), rng);
  REQUIRE(pop.particles.size() == 10000);
  for (double d : pop.distances) REQUIRE(d == 0.0);
  const auto v = first_coord(pop.particles);
  CHECK(std::abs(oracle::mean(v) - 4.0 / 7.0) < 0.01);
  CHECK(oracle::sd(v) == doctest::Approx(bernoulli_toy::beta_sd(4, 3)).epsilon(0.03));
}

TEST_CASE("acceptance probability shrinks with the tolerance") {
  const auto model = bernoulli_toy::model(20);
  const auto y = bernoulli_toy::observed(20, 12);
  double prev = 2.0;
  std::vector<double> sds;
  for (double eps : {8.0, 6.0, 4.0, 2.0, 0.0}) {
    RngStream rng(103);
    const auto pop = abc_reject(model, y, tolerance(eps, 20000), rng);
    CHECK(pop.acceptance_rate() <= prev);
    prev = pop.acceptance_rate();
    sds.push_back(oracle::sd(first_coord(pop.particles)));
  }
  for (std::size_t k = 1; k < sds.size(); ++k) CHECK(sds[k] <= sds[k - 1]);
}

TEST_CASE("quantile mode keeps the closest simulations") {
  const auto model = bernoulli_toy::model(20);
  RngStream rng(104);
  AbcConfig c;
  c.quantile = 0.1;
  c.n_output = 500;
  const auto pop = abc_reject(model, bernoulli_toy::observed(20, 12), c, rng);
  CHECK(pop.particles.size() == 500);
  CHECK(pop.proposals == 5000);
  CHECK(pop.epsilon == *std::max_element(pop.distances.begin(), pop.distances.end()));
}

TEST_CASE("an unreachable tolerance is reported") {
  SimulableModel never = bernoulli_toy::model(5);
  never.simulate = [](const Vector&, RngStream&) { return Vector::Zero(5).eval(); };
  AbcConfig c = tolerance(0.5, 10);
  c.max_proposals = 1000;
  RngStream rng(105);
  CHECK(code_of([&] { abc_reject(never, bernoulli_toy::observed(5, 5), c, rng); }) ==
        ErrorCode::kToleranceTooSmall);
}

TEST_CASE("ABC-MCMC at zero tolerance matches Beta(4, 3)") {
  const auto model = bernoulli_toy::model(5);
  RngStream rng(106);
  const auto chain = abc_mcmc(model, bernoulli_toy::observed(5, 3), tolerance(0.0, 1), random_walk(0.3), 200000, rng);
  const Vector c = chain.coordinate(0);
  const double mean = c.mean();
  CHECK(std::abs(mean - 4.0 / 7.0) < 3 * se_of_chain_mean(chain));
  std::vector<double> v(c.data(), c.data() + c.size());
  CHECK(oracle::sd(v) == doctest::Approx(bernoulli_toy::beta_sd(4, 3)).epsilon(0.03));
  CHECK(chain.acceptance_rate() > 0.0);
  CHECK(chain.acceptance_rate() < 1.0);
}

TEST_CASE("ABC-MCMC without selection samples the prior") {
  const auto model = bernoulli_toy::model(5);
  RngStream rng(107);
  const auto chain = abc_mcmc(model, bernoulli_toy::observed(5, 3), tolerance(kInf, 1), random_walk(0.3), 100000, rng);
  CHECK(std::abs(chain.coordinate(0).mean() - 0.5) < 3 * se_of_chain_mean(chain));

  SimulableModel flat = model;
  flat.log_prior = [](const Vector&) { return 0.0; };
  flat.sample_prior = [](RngStream& r) { return Vector::Constant(1, r.normal()); };
  const auto open = abc_mcmc(flat, bernoulli_toy::observed(5, 3), tolerance(kInf, 1), random_walk(0.3), 1000, rng);
  CHECK(open.acceptance_rate() == 1.0);
}

TEST_CASE("ABC-PMC with a frozen infinite tolerance targets the prior") {
  const auto model = bernoulli_toy::model(5);
  AbcConfig c;
  c.schedule = {kInf};
  c.n_output = 1000;
  RngStream rng(108);
  const auto gens = abc_pmc(model, bernoulli_toy::observed(5, 3), c, 4, rng);
  REQUIRE(gens.size() == 4);
  for (const auto& g : gens) {
    const auto [m, se] = weighted_mean_se(g);
    INFO("generation " << g.t);
    CHECK(std::abs(m - 0.5) < 3 * se);
  }
}

TEST_CASE("ABC-PMC driven to zero tolerance matches Beta(4, 3)") {
  const auto model = bernoulli_toy::model(5);
  AbcConfig c;
  c.schedule = {2.0, 1.0, 0.0};
  c.n_output = 5000;
  RngStream rng(109);
  const auto gens = abc_pmc(model, bernoulli_toy::observed(5, 3), c, 3, rng);
  const auto& last = gens.back();
  CHECK(last.epsilon == 0.0);
  for (double d : last.distances) REQUIRE(d == 0.0);
  const auto [m, se] = weighted_mean_se(last);
  CHECK(std::abs(m - 4.0 / 7.0) < 3 * se);
  const auto [mv, sv] = weighted_moments(last.particles, last.log_weights);
  CHECK(sv(0) == doctest::Approx(bernoulli_toy::beta_sd(4, 3)).epsilon(0.05));
}

TEST_CASE("ABC-PMC quantile schedule strictly decreases") {
  // theta ~ N(0, 1), ten N(theta, 1) observations summarized by their mean.
  SimulableModel m;
  m.sample_prior = [](RngStream& r) { return Vector::Constant(1, r.normal()); };
  m.log_prior = [](const Vector& t) { return -0.5 * t(0) * t(0); };
  m.simulate = [](const Vector& t, RngStream& r) {
    Vector z(10);
    for (int i = 0; i < 10; ++i) z(i) = t(0) + r.normal();
    return z;
  };
  m.summary = [](const Vector& z) { return Vector::Constant(1, z.mean()); };
  AbcConfig c;
  c.quantile = 0.5;
  c.n_output = 1000;
  RngStream rng(110);
  const auto gens = abc_pmc(m, Vector::Constant(10, 0.8), c, 6, rng);
  CHECK(gens.size() == 6);
  for (std::size_t t = 1; t < gens.size(); ++t) {
    CHECK(gens[t].epsilon < gens[t - 1].epsilon);
    for (double d : gens[t].distances) REQUIRE(d <= gens[t].epsilon);
    CHECK(gens[t].t == t);
  }
  // Posterior mean 10 * 0.8 / 11 once epsilon is small.
  const auto [mean, se] = weighted_mean_se(gens.back());
  CHECK(std::abs(mean - 8.0 / 11.0) < 0.1);
}

TEST_CASE("ABC-PMC weights agree with rejection at the same tolerance") {
  const auto model = bernoulli_toy::model(20);
  const auto y = bernoulli_toy::observed(20, 12);
  AbcConfig c;
  c.schedule = {6.0, 3.0, 1.0};
  c.n_output = 3000;
  RngStream r1(111), r2(112);
  const auto gens = abc_pmc(model, y, c, 3, r1);
  const auto [m_pmc, se_pmc] = weighted_mean_se(gens.back());
  const auto rej = abc_reject(model, y, tolerance(1.0, 3000), r2);
  const auto v = first_coord(rej.particles);
  const double se_rej = oracle::sd(v) / std::sqrt(3000.0);
  CHECK(std::abs(m_pmc - oracle::mean(v)) < 3 * std::hypot(se_pmc, se_rej));
}

TEST_CASE("ABC-PMC preconditions") {
  const auto model = bernoulli_toy::model(5);
  AbcConfig c;
  c.quantile = 0.5;
  c.n_output = 50;
  RngStream rng(113);
  CHECK(code_of([&] { abc_pmc(model, bernoulli_toy::observed(5, 3), c, 3, rng); }) == ErrorCode::kContract);
  c.n_output = 200;
  CHECK(code_of([&] { abc_pmc(model, bernoulli_toy::observed(5, 3), c, 1, rng); }) == ErrorCode::kContract);
}

TEST_CASE("probit ABC") {
  const ProbitModel pima = load_pima(testing_support::pima_path());
  const auto fit = probit_mle(pima);
  const auto sim = probit_simulable(pima);
  RngStream rng(114);
  const Vector ref = probit_abc_summary(pima, fit.beta);
  CHECK(euclidean_distance(sim.summary(sim.simulate(fit.beta, rng)), ref) == 0.0);

  AbcConfig all;
  all.quantile = 1.0;
  all.n_output = 1000;
  const auto gens = probit_abc(pima, all, 3, rng);
  const auto [m, s] = weighted_moments(gens.back().particles, gens.back().log_weights);
  const Vector prior_sd = pima.gprior().covariance().diagonal().cwiseSqrt();
  for (int j = 0; j < 3; ++j) {
    CHECK(s(j) / prior_sd(j) >= 0.5);
    CHECK(s(j) / prior_sd(j) <= 1.5);
  }

  AbcConfig c;
  c.quantile = 0.1;
  c.n_output = 500;
  const auto run = probit_abc(pima, c, 4, rng);
  CHECK(run.size() == 4);
  for (std::size_t t = 1; t < run.size(); ++t) CHECK(run[t].epsilon < run[t - 1].epsilon);
}
