#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bayescomp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stable error categories. The numeric values are part of the C API.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidParameter = 1,
  kContract = 2,
  kFactorization = 3,
  kDegenerateWeights = 4,
  kNonConvergence = 5,
  kSeparation = 6,
  kIngestion = 7,
  kStart = 8,
  kProposal = 9,
  kOverlap = 10,
  kUnstableEstimate = 11,
  kBadThetaStar = 12,
  kToleranceTooSmall = 13,
  kConfig = 14,
  kIo = 15,
  kModelFailure = 16,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Throws a contract error when `cond` is false.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kContract, what);
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace bayescomp
