#include "bayescomp/capture.hpp"

#include "bayescomp/distributions.hpp"

#include <cmath>
#include <limits>

namespace bayescomp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CaptureModel::CaptureModel(long n1_, long c2_, long c3_, long n_max_)
    : n1(n1_), c2(c2_), c3(c3_), n_max(n_max_ > 0 ? n_max_ : 50 * n1_) {
  if (n1 < 0 || c2 < 0 || c3 < 0) throw Error(ErrorCode::kInvalidParameter, "capture counts must be nonnegative");
  if (c2 > n1) throw Error(ErrorCode::kInvalidParameter, "first recapture c2 exceeds first capture n1");
  if (c3 > n1) throw Error(ErrorCode::kInvalidParameter, "second recapture c3 exceeds n1");
  if (n_max < n1) throw Error(ErrorCode::kInvalidParameter, "n_max must be at least n1");
}

double capture_loglik(const CaptureModel& m, long N, double p, double q, long r1, long r2) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) return kNegInf;
  if (N < m.n1 || r1 < 0 || r2 < 0 || r1 > m.n1) return kNegInf;
  const long stay1 = m.n1 - r1;
  if (m.c2 > stay1 || r2 > stay1) return kNegInf;
  const long stay2 = stay1 - r2;
  if (m.c3 > stay2) return kNegInf;
  return binomial_logpmf(m.n1, N, p) + binomial_logpmf(r1, m.n1, q) + binomial_logpmf(m.c2, stay1, p) +
         binomial_logpmf(r2, stay1, q) + binomial_logpmf(m.c3, stay2, p);
}

std::pair<double, double> CaptureConditionals::p_shapes(const CaptureState& s) const {
  const auto& m = model_;
  return {static_cast<double>(m.n1 + m.c2 + m.c3 + 1),
          static_cast<double>((s.N - m.n1) + (m.n1 - s.r1 - m.c2) + (m.n1 - s.r1 - s.r2 - m.c3) + 1)};
}

std::pair<double, double> CaptureConditionals::q_shapes(const CaptureState& s) const {
  const auto& m = model_;
  return {static_cast<double>(s.r1 + s.r2 + 1), static_cast<double>((m.n1 - s.r1) + (m.n1 - s.r1 - s.r2) + 1)};
}

double CaptureConditionals::sample_p(const CaptureState& s, RngStream& rng) const {
  const auto [a, b] = p_shapes(s);
  return sample_beta(a, b, rng);
}

double CaptureConditionals::sample_q(const CaptureState& s, RngStream& rng) const {
  const auto [a, b] = q_shapes(s);
  return sample_beta(a, b, rng);
}

std::vector<LatentPair> CaptureConditionals::latent_pmf(const CaptureState& s) const {
  const auto& m = model_;
  std::vector<LatentPair> out;
  std::vector<double> logs;
  for (long r1 = 0; r1 + m.c2 <= m.n1; ++r1) {
    for (long r2 = 0; r1 + r2 + m.c3 <= m.n1; ++r2) {
      const double lp = capture_loglik(m, s.N, s.p, s.q, r1, r2);
      if (lp == kNegInf) continue;
      out.push_back({r1, r2, 0.0});
      logs.push_back(lp);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kDegenerateWeights, "(r1, r2) conditional has empty support");
  const double norm = log_sum_exp(logs);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].probability = std::exp(logs[k] - norm);
  return out;
}

LatentPair CaptureConditionals::sample_latents(const CaptureState& s, RngStream& rng) const {
  const auto pmf = latent_pmf(s);
  double u = rng.uniform();
  for (const auto& cell : pmf) {
    u -= cell.probability;
    if (u <= 0.0) return cell;
  }
  return pmf.back();
}

std::vector<double> CaptureConditionals::population_log_pmf(double p) const {
  const auto& m = model_;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(m.n_max - m.n1 + 1));
  // log[C(N, n1) (1-p)^(N-n1) / N], built incrementally in N.
  const double log1mp = std::log1p(-p);
  double log_choose = 0.0;
  for (long N = m.n1; N <= m.n_max; ++N) {
    if (N > m.n1) log_choose += std::log(static_cast<double>(N)) - std::log(static_cast<double>(N - m.n1));
    const double extra = N == m.n1 ? 0.0 : static_cast<double>(N - m.n1) * log1mp;
    logs.push_back(log_choose + extra - std::log(static_cast<double>(N)));
  }
  const double norm = log_sum_exp(logs);
  for (double& l : logs) l -= norm;
  return logs;
}

long CaptureConditionals::sample_population(const CaptureState& s, RngStream& rng, bool* truncated) const {
  const auto logs = population_log_pmf(s.p);
  if (truncated != nullptr) *truncated = std::exp(logs.back()) > 1e-6;
  double u = rng.uniform();
  for (std::size_t k = 0; k < logs.size(); ++k) {
    u -= std::exp(logs[k]);
    if (u <= 0.0) return model_.n1 + static_cast<long>(k);
  }
  return model_.n_max;
}

CaptureChain capture_gibbs_run(const CaptureModel& model, long iterations, RngStream& rng) {
  require(iterations >= 1, "capture Gibbs needs at least one iteration");
  const CaptureConditionals cond(model);
  CaptureState s;
  s.N = 2 * model.n1 + 1;
  s.p = 0.5;
  s.q = 0.1;
  s.r1 = 0;
  s.r2 = 0;
  CaptureChain chain;
  chain.states.reserve(static_cast<std::size_t>(iterations));
  for (long t = 0; t < iterations; ++t) {
    s.p = cond.sample_p(s, rng);
    s.q = cond.sample_q(s, rng);
    const auto latent = cond.sample_latents(s, rng);
    s.r1 = latent.r1;
    s.r2 = latent.r2;
    bool truncated = false;
    s.N = cond.sample_population(s, rng, &truncated);
    if (truncated) ++chain.truncation_warnings;
    chain.states.push_back(s);
  }
  return chain;
}

}  // namespace bayescomp
