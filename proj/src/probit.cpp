#include "bayescomp/probit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bayescomp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Vector linear_predictor(const Matrix& x, const Vector& beta) { return x * beta; }

}  // namespace

ProbitModel::ProbitModel(Matrix design, Vector response, std::vector<std::string> names, double prior_scale) {
  auto s = std::make_shared<State>();
  const auto n = design.rows();
  const auto p = design.cols();
  if (response.size() != n) throw Error(ErrorCode::kInvalidParameter, "response length does not match design rows");
  if (n == 0 || p == 0) throw Error(ErrorCode::kInvalidParameter, "empty design matrix");
  if (!design.allFinite()) throw Error(ErrorCode::kInvalidParameter, "design contains non-finite values");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response(i) != 0.0 && response(i) != 1.0) {
      throw Error(ErrorCode::kInvalidParameter, "response entries must be 0 or 1 (row " + std::to_string(i) + ")");
    }
  }
  if (names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (names.size() != static_cast<std::size_t>(p)) throw Error(ErrorCode::kInvalidParameter, "one name per column");
  s->g = prior_scale > 0.0 ? prior_scale : static_cast<double>(n);
  s->xtx = design.transpose() * design;
  Eigen::LDLT<Matrix> ldlt(s->xtx);
  const double cond_floor = 1e-12 * s->xtx.diagonal().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= cond_floor) {
    throw Error(ErrorCode::kFactorization, "X'X is singular; the g-prior is undefined");
  }
  s->xtx_inv = ldlt.solve(Matrix::Identity(p, p));
  s->xtx_inv = (0.5 * (s->xtx_inv + s->xtx_inv.transpose())).eval();
  s->prior = MvnParams(Vector::Zero(p), s->g * s->xtx_inv);
  s->design = std::move(design);
  s->response = std::move(response);
  s->names = std::move(names);
  state_ = std::move(s);
}

ProbitModel ProbitModel::select_columns(const std::vector<std::size_t>& columns) const {
  Matrix x(state_->design.rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    require(columns[k] < dim(), "column index out of range");
    x.col(static_cast<Eigen::Index>(k)) = state_->design.col(static_cast<Eigen::Index>(columns[k]));
    names.push_back(state_->names[columns[k]]);
  }
  return ProbitModel(std::move(x), state_->response, std::move(names));
}

double ProbitModel::loglik(const Vector& beta) const {
  require(static_cast<std::size_t>(beta.size()) == dim(), "probit coefficient length mismatch");
  if (!beta.allFinite()) return kNegInf;
  const Vector eta = linear_predictor(state_->design, beta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += state_->response(i) == 1.0 ? normal_logcdf(eta(i)) : normal_logcdf(-eta(i));
  }
  return ll;
}

double ProbitModel::gprior_logpdf(const Vector& beta) const {
  require(static_cast<std::size_t>(beta.size()) == dim(), "probit coefficient length mismatch");
  if (!beta.allFinite()) return kNegInf;
  return state_->prior.logpdf(beta);
}

BayesModel ProbitModel::bayes_model() const {
  BayesModel m;
  m.dimension = dim();
  const ProbitModel self = *this;
  m.log_prior = [self](const Vector& b) { return self.gprior_logpdf(b); };
  m.log_likelihood = [self](const Vector& b) { return self.loglik(b); };
  m.sample_prior = [self](RngStream& rng) { return self.gprior().sample(rng); };
  return m;
}

double probit_loglik(const ProbitModel& model, const Vector& beta) { return model.loglik(beta); }

double gprior_logpdf(const ProbitModel& model, const Vector& beta) { return model.gprior_logpdf(beta); }

ProbitFit probit_mle(const ProbitModel& model) {
  const Matrix& x = model.design();
  const Vector& y = model.response();
  const auto n = x.rows();
  const auto p = x.cols();
  const double successes = y.sum();
  if (successes == 0.0 || successes == static_cast<double>(n)) {
    throw Error(ErrorCode::kSeparation, "probit MLE does not exist: response is constant (complete separation)");
  }

  Vector beta = Vector::Zero(p);
  double ll = model.loglik(beta);
  Vector score(p);
  Matrix info(p, p);

  auto score_and_information = [&](const Vector& b) {
    const Vector eta = x * b;
    score.setZero();
    info.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lphi = normal_logpdf(eta(i));
      const double lup = normal_logcdf(eta(i));
      const double llo = normal_logcdf(-eta(i));
      const double s = y(i) == 1.0 ? std::exp(lphi - lup) : -std::exp(lphi - llo);
      const double w = std::exp(2.0 * lphi - lup - llo);
      score.noalias() += s * x.row(i).transpose();
      info.noalias() += w * x.row(i).transpose() * x.row(i);
    }
  };

  constexpr int kMaxIterations = 50;
  int iteration = 0;
  bool converged = false;
  for (; iteration <= kMaxIterations; ++iteration) {
    score_and_information(beta);
    if (score.cwiseAbs().maxCoeff() < 1e-10) {
      converged = true;
      break;
    }
    if (iteration == kMaxIterations) break;
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
      throw Error(ErrorCode::kSeparation, "Fisher information became singular at iteration " +
                                              std::to_string(iteration) + "; coefficients are diverging (separation)");
    }
    Vector step = ldlt.solve(score);
    double trial_ll = model.loglik(beta + step);
    int halvings = 0;
    while (!(trial_ll >= ll) && halvings < 40) {
      step *= 0.5;
      trial_ll = model.loglik(beta + step);
      ++halvings;
    }
    const bool stalled = (step.cwiseAbs().array() <= 1e-15 * (1.0 + beta.cwiseAbs().array())).all();
    beta += step;
    ll = std::max(ll, trial_ll);
    if (stalled) {
      score_and_information(beta);
      converged = true;
      ++iteration;
      break;
    }
    const double max_eta = (x * beta).cwiseAbs().maxCoeff();
    if (max_eta > 37.0 && ll > -1e-8 * static_cast<double>(n)) {
      throw Error(ErrorCode::kSeparation, "probit MLE does not converge after " + std::to_string(iteration + 1) +
                                              " iterations: fitted probabilities reach 0/1 (separation)");
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNonConvergence,
                "probit Fisher scoring did not converge after " + std::to_string(kMaxIterations) + " iterations");
  }

  ProbitFit fit;
  fit.beta = beta;
  fit.covariance = Eigen::LDLT<Matrix>(info).solve(Matrix::Identity(p, p));
  fit.covariance = (0.5 * (fit.covariance + fit.covariance.transpose())).eval();
  fit.std_errors = fit.covariance.diagonal().cwiseSqrt();
  fit.iterations = iteration;
  fit.loglik = model.loglik(beta);
  fit.deviance = -2.0 * fit.loglik;
  fit.null_deviance = 2.0 * static_cast<double>(n) * std::log(2.0);
  return fit;
}

LatentCompletion probit_latent_completion(const ProbitModel& model) {
  const double shrink = model.prior_scale() / (model.prior_scale() + 1.0);
  const Matrix cov = shrink * model.xtx_inverse();
  const Matrix projection = cov * model.design().transpose();
  const auto conditional = std::make_shared<const MvnParams>(Vector::Zero(model.dim()), cov);
  const auto proj = std::make_shared<const Matrix>(projection);

  LatentCompletion c;
  c.sample_latents = [model](const Vector& beta, RngStream& rng) {
    const Vector eta = model.design() * beta;
    Vector z(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      z(i) = sample_truncated_normal(eta(i), 1.0,
                                     model.response()(i) == 1.0 ? TruncationSide::kAboveZero : TruncationSide::kBelowZero,
                                     rng);
    }
    return z;
  };
  c.sample_params = [conditional, proj](const Vector& z, RngStream& rng) {
    return Vector(*proj * z + conditional->sample(rng));
  };
  c.log_full_conditional_param = [conditional, proj](const Vector& beta, const Vector& z) {
    return conditional->logpdf(beta - *proj * z);
  };
  return c;
}

Vector probit_abc_summary(const ProbitModel& model, const Vector& beta) {
  require(static_cast<std::size_t>(beta.size()) == model.dim(), "probit coefficient length mismatch");
  const Vector eta = model.design() * beta;
  return eta.unaryExpr([](double e) { return normal_cdf(e); });
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      field += ch;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

}  // namespace

PimaData read_pima_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open data file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::kIngestion, path + ": empty file (no header row)");

  const std::vector<std::string> wanted{"glu", "bp", "ped", "type"};
  std::vector<std::size_t> index;
  for (const auto& name : wanted) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::kIngestion, path + ": missing column '" + name + "' in header");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<std::array<double, 3>> rows;
  std::vector<double> response;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kIngestion, path + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    std::array<double, 3> row{};
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string& cell = fields[index[k]];
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (cell.empty() || used != cell.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::kIngestion, path + ":" + std::to_string(line_no) + ": column '" + wanted[k] +
                                               "': non-numeric value '" + cell + "'");
      }
      row[k] = value;
    }
    const std::string& type = fields[index[3]];
    if (type == "Yes") {
      response.push_back(1.0);
    } else if (type == "No") {
      response.push_back(0.0);
    } else {
      throw Error(ErrorCode::kIngestion, path + ":" + std::to_string(line_no) +
                                             ": column 'type': expected Yes or No, found '" + type + "'");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw Error(ErrorCode::kIngestion, path + ": no data rows");

  Matrix x(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = 0; k < 3; ++k) x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  Vector y = Eigen::Map<const Vector>(response.data(), static_cast<Eigen::Index>(response.size()));
  return PimaData{std::move(x), std::move(y), {"glu", "bp", "ped"}};
}

ProbitModel load_pima(const std::string& path) {
  PimaData data = read_pima_csv(path);
  return ProbitModel(std::move(data.design), std::move(data.response), std::move(data.names));
}

}  // namespace bayescomp
