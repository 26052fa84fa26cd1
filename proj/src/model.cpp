#include "bayescomp/model.hpp"

#include <cmath>
#include <limits>

namespace bayescomp {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kFactorization: return "factorization";
    case ErrorCode::kDegenerateWeights: return "degenerate-weights";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kSeparation: return "separation";
    case ErrorCode::kIngestion: return "ingestion";
    case ErrorCode::kStart: return "start";
    case ErrorCode::kProposal: return "proposal";
    case ErrorCode::kOverlap: return "overlap";
    case ErrorCode::kUnstableEstimate: return "unstable-estimate";
    case ErrorCode::kBadThetaStar: return "bad-theta-star";
    case ErrorCode::kToleranceTooSmall: return "tolerance-too-small";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kModelFailure: return "model-failure";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

double log_posterior(const BayesModel& model, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.dimension) {
    throw Error(ErrorCode::kContract, "parameter length " + std::to_string(theta.size()) +
                                          " does not match model dimension " + std::to_string(model.dimension));
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double lp = model.log_prior(theta);
  if (std::isnan(lp) || lp == kNegInf) return kNegInf;
  const double ll = model.log_likelihood(theta);
  if (std::isnan(ll) || ll == kNegInf) return kNegInf;
  return lp + ll;
}

LogDensity posterior_density(const BayesModel& model) {
  return [model](const Vector& theta) { return log_posterior(model, theta); };
}

}  // namespace bayescomp
