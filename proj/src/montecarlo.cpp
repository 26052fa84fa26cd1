#include "bayescomp/montecarlo.hpp"

#include "bayescomp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bayescomp {

Vector WeightedSample::normalized_weights() const {
  require(static_cast<std::size_t>(log_weights.size()) == points.size(), "points and log_weights differ in length");
  require(!points.empty(), "weighted sample is empty");
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    if (std::isnan(log_weights(i))) throw Error(ErrorCode::kDegenerateWeights, "NaN log-weight at index " + std::to_string(i));
  }
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) throw Error(ErrorCode::kDegenerateWeights, "no finite log-weight in sample");
  return log_weights.unaryExpr([norm](double lw) { return std::exp(lw - norm); });
}

std::size_t WeightedSample::zero_weight_count() const {
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    if (std::exp(log_weights(i)) == 0.0) ++zeros;
  }
  return zeros;
}

EstimateReport mc_estimate(const ScalarFunction& h, const std::vector<Vector>& draws) {
  require(!draws.empty(), "mc_estimate needs at least one draw");
  const auto n = draws.size();
  std::vector<double> values(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = h(draws[i]);
    mean += (values[i] - mean) / static_cast<double>(i + 1);
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  EstimateReport r;
  r.value = mean;
  r.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  r.ess = static_cast<double>(n);
  r.n_draws = n;
  return r;
}

WeightedSample importance_sample(const LogDensity& target_logpdf, const LogDensity& proposal_logpdf,
                                 const Sampler& proposal_draw, std::size_t n, RngStream& rng) {
  require(n >= 1, "importance_sample needs N >= 1");
  WeightedSample ws;
  ws.points.reserve(n);
  ws.log_weights.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Vector theta = proposal_draw(rng);
    const double lq = proposal_logpdf(theta);
    if (!(lq > -std::numeric_limits<double>::infinity()) || std::isnan(lq)) {
      throw Error(ErrorCode::kInternal, "proposal density is -inf or NaN at its own draw " + std::to_string(i));
    }
    double lp = target_logpdf(theta);
    if (std::isnan(lp)) lp = -std::numeric_limits<double>::infinity();
    ws.log_weights(static_cast<Eigen::Index>(i)) = lp - lq;
    ws.points.push_back(std::move(theta));
  }
  return ws;
}

EstimateReport snis_estimate(const ScalarFunction& h, const WeightedSample& ws) {
  const Vector w = ws.normalized_weights();
  const auto n = ws.size();
  std::vector<double> values(n, 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w(static_cast<Eigen::Index>(i)) == 0.0) continue;
    values[i] = h(ws.points[i]);
    value += w(static_cast<Eigen::Index>(i)) * values[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w(static_cast<Eigen::Index>(i));
    if (wi == 0.0) continue;
    var += wi * wi * (values[i] - value) * (values[i] - value);
  }
  EstimateReport r;
  r.value = value;
  r.std_error = std::sqrt(var);
  r.ess = 1.0 / w.squaredNorm();
  r.n_draws = n;
  r.degenerate = (w.array() > 0.0).count() <= 1;
  if (r.degenerate) r.ess = 1.0;
  return r;
}

double ess(const WeightedSample& ws) {
  const Vector w = ws.normalized_weights();
  const double e = 1.0 / w.squaredNorm();
  return std::clamp(e, 1.0, static_cast<double>(ws.size()));
}

ResampleResult sir_resample(const WeightedSample& ws, std::size_t m, RngStream& rng) {
  require(m >= 1, "sir_resample needs M >= 1");
  const Vector w = ws.normalized_weights();
  const CategoricalTable table(std::span<const double>(ws.log_weights.data(), ws.log_weights.size()));
  ResampleResult out;
  out.points.reserve(m);
  out.indices.reserve(m);
  for (std::size_t l = 0; l < m; ++l) {
    const auto j = table.draw(rng);
    out.indices.push_back(j);
    out.points.push_back(ws.points[j]);
  }
  out.degenerate = (w.array() > 0.0).count() <= 1;
  return out;
}

}  // namespace bayescomp
