#include "bayescomp/experiment.hpp"

#include "bayescomp/abc.hpp"
#include "bayescomp/capture.hpp"
#include "bayescomp/evidence.hpp"
#include "bayescomp/mcmc.hpp"
#include "bayescomp/mixture.hpp"
#include "bayescomp/pmc.hpp"
#include "bayescomp/probit.hpp"
#include "bayescomp/studies.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#ifndef BAYESCOMP_DATA_DIR
#define BAYESCOMP_DATA_DIR "data"
#endif

namespace bayescomp {

namespace {

using Json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// What one replicate produces.
struct RunOutput {
  Json results = Json::object();
  /// Scalars that become columns of replicates.csv.
  std::vector<std::pair<std::string, double>> scalars;
  CsvTable draws;
  std::string draws_name = "draws.csv";
};

struct Context {
  const Json& cfg;
  std::size_t burn_in;
  std::size_t thin;
};

using Runner = std::function<RunOutput(const Context&, RngStream&)>;

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json named(const std::vector<std::string>& names, const Vector& v) {
  Json o = Json::object();
  for (Eigen::Index i = 0; i < v.size(); ++i) o[names[static_cast<std::size_t>(i)]] = v(i);
  return o;
}

Json estimate_json(const EvidenceEstimate& e) {
  return Json{{"log_value", e.log_value}, {"std_error", e.std_error}, {"method", e.method},
              {"n_draws", e.n_draws},     {"reliable", e.reliable}};
}

std::vector<Vector> retained(const std::vector<Vector>& states, const Context& ctx) {
  std::vector<Vector> out;
  for (std::size_t t = ctx.burn_in; t < states.size(); t += ctx.thin) out.push_back(states[t]);
  if (out.empty()) throw Error(ErrorCode::kConfig, "burn_in leaves no retained draws");
  return out;
}

std::pair<Vector, Vector> moments(const std::vector<Vector>& draws) {
  const Vector m = sample_mean(draws);
  Vector var = Vector::Zero(m.size());
  for (const auto& x : draws) var += (x - m).array().square().matrix();
  var /= static_cast<double>(std::max<std::size_t>(draws.size() - 1, 1));
  return {m, var.cwiseSqrt()};
}

CsvTable chain_table(const Chain& chain, const std::vector<std::string>& names, const Context& ctx) {
  CsvTable t;
  t.header.push_back("iteration");
  t.header.insert(t.header.end(), names.begin(), names.end());
  const bool with_lp = chain.log_posts.size() == chain.states.size();
  if (with_lp) t.header.push_back("log_post");
  for (std::size_t i = ctx.burn_in; i < chain.states.size(); i += ctx.thin) {
    std::vector<double> row{static_cast<double>(i + 1)};
    for (Eigen::Index j = 0; j < chain.states[i].size(); ++j) row.push_back(chain.states[i](j));
    if (with_lp) row.push_back(chain.log_posts[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ProbitModel probit_from_config(const Json& cfg) {
  const PimaData data = read_pima_csv(cfg.at("data_path").get<std::string>());
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  for (const auto& c : cfg.at("columns")) {
    const auto name = c.get<std::string>();
    const auto it = std::find(data.names.begin(), data.names.end(), name);
    if (it == data.names.end()) throw Error(ErrorCode::kConfig, "unknown covariate column '" + name + "'");
    cols.push_back(static_cast<std::size_t>(it - data.names.begin()));
    names.push_back(name);
  }
  if (cols.empty()) throw Error(ErrorCode::kConfig, "columns must name at least one covariate");
  Matrix design(data.design.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) design.col(static_cast<Eigen::Index>(j)) = data.design.col(static_cast<Eigen::Index>(cols[j]));
  return ProbitModel(design, data.response, names);
}

Json posterior_block(const std::vector<Vector>& draws, const std::vector<std::string>& names) {
  const auto [m, s] = moments(draws);
  return Json{{"mean", named(names, m)}, {"sd", named(names, s)}};
}

void add_posterior_scalars(RunOutput& out, const std::vector<Vector>& draws, const std::vector<std::string>& names) {
  const auto [m, s] = moments(draws);
  for (std::size_t j = 0; j < names.size(); ++j) out.scalars.emplace_back("mean_" + names[j], m(static_cast<Eigen::Index>(j)));
  for (std::size_t j = 0; j < names.size(); ++j) out.scalars.emplace_back("sd_" + names[j], s(static_cast<Eigen::Index>(j)));
}

Json diagnostics_json(const Chain& chain, const std::vector<std::string>& names, const Context& ctx) {
  Chain kept = chain;
  kept.states = retained(chain.states, ctx);
  Json d = Json::object();
  if (kept.size() < 100) return d;
  const auto diag = chain_diagnostics(kept);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& c = diag.coordinates[j];
    d[names[j]] = Json{{"iact", c.iact}, {"ess", c.ess}, {"lag1", c.autocorrelation[1]}, {"lag10", c.autocorrelation[10]}};
  }
  return d;
}

// ---------------------------------------------------------------- experiments

RunOutput run_mle(const Context& ctx, RngStream&) {
  const auto model = probit_from_config(ctx.cfg);
  const auto fit = probit_mle(model);
  RunOutput out;
  out.results = Json{{"rows", model.rows()},
                     {"coefficients", named(model.names(), fit.beta)},
                     {"std_errors", named(model.names(), fit.std_errors)},
                     {"loglik", fit.loglik},
                     {"residual_deviance", fit.deviance},
                     {"null_deviance", fit.null_deviance},
                     {"fisher_scoring_iterations", fit.iterations}};
  for (std::size_t j = 0; j < model.dim(); ++j) out.scalars.emplace_back("beta_" + model.names()[j], fit.beta(static_cast<Eigen::Index>(j)));
  out.scalars.emplace_back("residual_deviance", fit.deviance);
  return out;
}

RunOutput run_mh(const Context& ctx, RngStream& rng) {
  const auto model = probit_from_config(ctx.cfg);
  const auto fit = probit_mle(model);
  const double scale = ctx.cfg.at("scale").get<double>();
  const auto chain = rw_mh_run(model.bayes_model(), scale * fit.covariance, fit.beta,
                               ctx.cfg.at("iterations").get<std::size_t>(), rng);
  RunOutput out;
  const auto kept = retained(chain.states, ctx);
  out.results = Json{{"acceptance_rate", chain.acceptance_rate()},
                     {"proposal_scale_multiplier", scale},
                     {"posterior", posterior_block(kept, model.names())},
                     {"diagnostics", diagnostics_json(chain, model.names(), ctx)}};
  out.scalars.emplace_back("acceptance_rate", chain.acceptance_rate());
  add_posterior_scalars(out, kept, model.names());
  out.draws = chain_table(chain, model.names(), ctx);
  return out;
}

RunOutput run_gibbs(const Context& ctx, RngStream& rng) {
  const auto model = probit_from_config(ctx.cfg);
  const auto run = probit_gibbs_run(model, ctx.cfg.at("iterations").get<std::size_t>(), rng);
  RunOutput out;
  const auto kept = retained(run.chain.states, ctx);
  out.results = Json{{"posterior", posterior_block(kept, model.names())},
                     {"diagnostics", diagnostics_json(run.chain, model.names(), ctx)}};
  add_posterior_scalars(out, kept, model.names());
  out.draws = chain_table(run.chain, model.names(), ctx);
  return out;
}

RunOutput run_mwg(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  const auto n = cfg.at("n").get<std::size_t>();
  const double beta_true = cfg.at("beta_true").get<double>();
  RngStream data_rng = rng.split(0);
  Vector x(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = data_rng.normal();
    y(i) = data_rng.uniform() < normal_cdf(x(i) * beta_true) ? 1.0 : 0.0;
  }
  MwgOptions opt;
  opt.log_sigma_spread = cfg.at("log_sigma_spread").get<double>();
  opt.spread_is_variance = cfg.at("spread_is_variance").get<bool>();
  opt.beta_step_sd = cfg.at("beta_step_sd").get<double>();
  RngStream chain_rng = rng.split(1);
  const auto chain = mwg_probit_overparam_run(x, y, cfg.at("iterations").get<std::size_t>(), chain_rng, opt);
  const auto kept = retained(chain.states, ctx);
  double ratio = 0.0;
  for (const auto& s : kept) ratio += s(0) / std::sqrt(s(1));
  ratio /= static_cast<double>(kept.size());
  const std::vector<std::string> names{"beta", "sigma2"};
  RunOutput out;
  out.results = Json{{"acceptance_rate_beta", chain.block_acceptance_rate(0)},
                     {"acceptance_rate_sigma2", chain.block_acceptance_rate(1)},
                     {"posterior", posterior_block(kept, names)},
                     {"posterior_mean_beta_over_sigma", ratio}};
  out.scalars = {{"acceptance_rate_beta", chain.block_acceptance_rate(0)},
                 {"acceptance_rate_sigma2", chain.block_acceptance_rate(1)},
                 {"mean_beta_over_sigma", ratio}};
  out.draws = chain_table(chain, names, ctx);
  return out;
}

RunOutput run_pmc(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  const auto target_name = cfg.at("target").get<std::string>();
  BayesModel target;
  InitialProposal q0;
  std::vector<std::string> names;
  if (target_name == "probit") {
    const auto model = probit_from_config(cfg);
    const auto fit = probit_mle(model);
    target = model.bayes_model();
    q0 = gaussian_proposal(fit.beta, cfg.at("q0_inflation").get<double>() * fit.covariance);
    names = model.names();
  } else if (target_name == "mixture") {
    RngStream data_rng = rng.split(0);
    MixtureTarget mix;
    mix.weight = cfg.at("weight").get<double>();
    mix.sigma2 = 1.0;
    mix.data = simulate_mixture_data(cfg.at("n").get<std::size_t>(), mix.weight, cfg.at("mu1").get<double>(),
                                     cfg.at("mu2").get<double>(), 1.0, data_rng);
    target = mixture_bayes_model(mix);
    q0 = gaussian_proposal(Vector::Zero(2), cfg.at("q0_inflation").get<double>() * Matrix::Identity(2, 2));
    names = {"mu1", "mu2"};
  } else {
    throw Error(ErrorCode::kConfig, "pmc target must be 'probit' or 'mixture'");
  }
  std::vector<double> scales = cfg.at("scales").get<std::vector<double>>();
  KernelBank bank = KernelBank::uniform(scales, Matrix::Identity(static_cast<Eigen::Index>(target.dimension),
                                                                 static_cast<Eigen::Index>(target.dimension)),
                                        cfg.at("weight_floor").get<double>());
  PmcOptions opt;
  opt.particles = cfg.at("particles").get<std::size_t>();
  opt.iterations = cfg.at("iterations").get<std::size_t>();
  const auto density = cfg.at("density").get<std::string>();
  if (density == "conditional") {
    opt.density = PmcDensity::kConditional;
  } else if (density == "full-mixture") {
    opt.density = PmcDensity::kFullMixture;
  } else {
    throw Error(ErrorCode::kConfig, "pmc density must be 'conditional' or 'full-mixture'");
  }
  RngStream run_rng = rng.split(1);
  const auto pops = pmc_run(target, q0, bank, opt, run_rng);
  RunOutput out;
  Json iters = Json::array();
  for (const auto& p : pops) {
    const auto [m, s] = weighted_moments(p.particles, p.log_weights);
    iters.push_back(Json{{"iteration", p.iteration},
                         {"ess", p.ess},
                         {"kernel_weights", vec_json(p.kernel_weights)},
                         {"mean", named(names, m)},
                         {"sd", named(names, s)}});
  }
  out.results = Json{{"iterations", iters}};
  out.scalars.emplace_back("ess_first", pops.front().ess);
  out.scalars.emplace_back("ess_final", pops.back().ess);
  const auto& last = pops.back();
  out.draws.header = {"particle"};
  out.draws.header.insert(out.draws.header.end(), names.begin(), names.end());
  out.draws.header.push_back("log_weight");
  for (std::size_t i = 0; i < last.particles.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (Eigen::Index j = 0; j < last.particles[i].size(); ++j) row.push_back(last.particles[i](j));
    row.push_back(last.log_weights(static_cast<Eigen::Index>(i)));
    out.draws.rows.push_back(std::move(row));
  }
  out.draws_name = "particles.csv";
  return out;
}

RunOutput run_evidence(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  const auto model = probit_from_config(cfg);
  CovariateTestOptions opt;
  opt.draws = cfg.at("draws").get<std::size_t>();
  opt.coverage = cfg.at("coverage").get<double>();
  const auto rule = cfg.at("theta_star").get<std::string>();
  if (rule != "mean" && rule != "mle") throw Error(ErrorCode::kConfig, "theta_star must be 'mean' or 'mle'");
  opt.theta_star_mle = rule == "mle";
  opt.pilot_draws = cfg.at("pilot_draws").get<std::size_t>();
  const auto r = covariate_test_replicate(model, opt, rng);
  RunOutput out;
  out.results = Json{{"tested_covariate", model.names().back()},
                     {"log_B10", Json{{"importance", estimate_json(r.importance)},
                                      {"harmonic-gd", estimate_json(r.harmonic)},
                                      {"chib", estimate_json(r.chib)},
                                      {"bridge-embedded", estimate_json(r.bridge)}}}};
  out.scalars = {{"importance", r.importance.log_value}, {"importance_se", r.importance.std_error},
                 {"harmonic_gd", r.harmonic.log_value},  {"harmonic_gd_se", r.harmonic.std_error},
                 {"chib", r.chib.log_value},             {"chib_se", r.chib.std_error},
                 {"bridge_embedded", r.bridge.log_value}, {"bridge_embedded_se", r.bridge.std_error}};
  return out;
}

RunOutput run_abc(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  const auto model = probit_from_config(cfg);
  AbcConfig abc;
  abc.quantile = cfg.at("quantile").get<double>();
  abc.n_output = cfg.at("particles").get<std::size_t>();
  abc.kernel_scale_rule = cfg.at("kernel_scale").get<double>();
  const auto pops = probit_abc(model, abc, cfg.at("generations").get<std::size_t>(), rng);
  Json gens = Json::array();
  for (const auto& p : pops) {
    const auto [m, s] = weighted_moments(p.particles, p.log_weights);
    gens.push_back(Json{{"generation", p.t},
                        {"epsilon", p.epsilon},
                        {"proposals", p.proposals},
                        {"ess", p.ess},
                        {"mean", named(model.names(), m)},
                        {"sd", named(model.names(), s)}});
  }
  const auto& last = pops.back();
  const auto [m, s] = weighted_moments(last.particles, last.log_weights);
  RunOutput out;
  out.results = Json{{"generations", gens}, {"final_epsilon", last.epsilon}};
  for (std::size_t j = 0; j < model.dim(); ++j) out.scalars.emplace_back("mean_" + model.names()[j], m(static_cast<Eigen::Index>(j)));
  for (std::size_t j = 0; j < model.dim(); ++j) out.scalars.emplace_back("sd_" + model.names()[j], s(static_cast<Eigen::Index>(j)));
  out.draws.header = {"particle"};
  out.draws.header.insert(out.draws.header.end(), model.names().begin(), model.names().end());
  out.draws.header.push_back("log_weight");
  out.draws.header.push_back("distance");
  for (std::size_t i = 0; i < last.particles.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (Eigen::Index j = 0; j < last.particles[i].size(); ++j) row.push_back(last.particles[i](j));
    row.push_back(last.log_weights(static_cast<Eigen::Index>(i)));
    row.push_back(last.distances[i]);
    out.draws.rows.push_back(std::move(row));
  }
  out.draws_name = "particles.csv";
  return out;
}

RunOutput run_capture(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  const CaptureModel model(cfg.at("n1").get<long>(), cfg.at("c2").get<long>(), cfg.at("c3").get<long>(),
                           cfg.at("n_max").get<long>());
  const auto iterations = cfg.at("iterations").get<long>();
  if (iterations < 1) throw Error(ErrorCode::kConfig, "iterations must be positive");
  const auto run = capture_gibbs_run(model, iterations, rng);
  std::vector<Vector> states;
  states.reserve(run.states.size());
  for (const auto& s : run.states) {
    Vector v(5);
    v << static_cast<double>(s.N), s.p, s.q, static_cast<double>(s.r1), static_cast<double>(s.r2);
    states.push_back(std::move(v));
  }
  const std::vector<std::string> names{"N", "p", "q", "r1", "r2"};
  const auto kept = retained(states, ctx);
  RunOutput out;
  out.results = Json{{"n_max", model.n_max},
                     {"posterior", posterior_block(kept, names)},
                     {"truncation_warnings", run.truncation_warnings}};
  add_posterior_scalars(out, kept, names);
  Chain chain;
  chain.states = std::move(states);
  out.draws = chain_table(chain, names, ctx);
  return out;
}

RunOutput run_mixture(const Context& ctx, RngStream& rng) {
  const auto& cfg = ctx.cfg;
  RngStream data_rng = rng.split(0);
  const auto trap = mixture_trap_setup(cfg.at("n").get<std::size_t>(), cfg.at("weight").get<double>(),
                                       cfg.at("mu1").get<double>(), cfg.at("mu2").get<double>(),
                                       cfg.at("sigma2").get<double>(), data_rng);
  RngStream chain_rng = rng.split(1);
  const auto run = mixture_trap_run(trap, cfg.at("tau").get<double>(), cfg.at("iterations").get<std::size_t>(), chain_rng);
  RunOutput out;
  out.results = Json{{"major_mode", vec_json(trap.major)},
                     {"spurious_mode", vec_json(trap.spurious)},
                     {"escaped", run.escape_iteration > 0},
                     {"escape_iteration", run.escape_iteration},
                     {"acceptance_rate", run.chain.acceptance_rate()}};
  out.scalars = {{"escaped", run.escape_iteration > 0 ? 1.0 : 0.0},
                 {"escape_iteration", static_cast<double>(run.escape_iteration)},
                 {"acceptance_rate", run.chain.acceptance_rate()}};
  out.draws = chain_table(run.chain, {"mu1", "mu2"}, ctx);
  return out;
}

// ------------------------------------------------------------ configuration

struct ExperimentSpec {
  Runner run;
  Json defaults;
};

const std::map<std::string, ExperimentSpec>& registry() {
  static const std::map<std::string, ExperimentSpec> r = [] {
    std::map<std::string, ExperimentSpec> m;
    const Json all3 = Json::array({"glu", "bp", "ped"});
    const Json two = Json::array({"glu", "bp"});
    m["mle"] = {run_mle, Json{{"columns", all3}}};
    m["mh"] = {run_mh, Json{{"columns", two}, {"iterations", 10000}, {"scale", 1.0}}};
    m["gibbs"] = {run_gibbs, Json{{"columns", all3}, {"iterations", 10000}}};
    m["mwg"] = {run_mwg, Json{{"n", 1000},
                              {"beta_true", 1.0},
                              {"iterations", 100000},
                              {"beta_step_sd", 1.0},
                              {"log_sigma_spread", 0.04},
                              {"spread_is_variance", true}}};
    m["pmc"] = {run_pmc, Json{{"target", "probit"},
                              {"columns", all3},
                              {"particles", 2000},
                              {"iterations", 10},
                              {"scales", Json::array({0.3, 1.0, 3.0})},
                              {"weight_floor", 1e-3},
                              {"density", "conditional"},
                              {"q0_inflation", 4.0},
                              {"n", 500},
                              {"weight", 0.75},
                              {"mu1", 0.0},
                              {"mu2", 2.75}}};
    m["evidence"] = {run_evidence, Json{{"columns", all3},
                                        {"draws", 10000},
                                        {"coverage", 1.0},
                                        {"theta_star", "mean"},
                                        {"pilot_draws", 2000}}};
    m["abc"] = {run_abc, Json{{"columns", all3},
                              {"particles", 2000},
                              {"generations", 10},
                              {"quantile", 0.1},
                              {"kernel_scale", 2.0}}};
    m["capture"] = {run_capture, Json{{"n1", 22}, {"c2", 11}, {"c3", 6}, {"n_max", 0}, {"iterations", 20000}}};
    m["mixture-demo"] = {run_mixture, Json{{"n", 500},
                                           {"weight", 0.75},
                                           {"mu1", 0.0},
                                           {"mu2", 2.75},
                                           {"sigma2", 1.0},
                                           {"tau", 1.0},
                                           {"iterations", 1000}}};
    return m;
  }();
  return r;
}

Json common_defaults(const std::string& experiment) {
  return Json{{"experiment", experiment},
              {"seed", 1},
              {"data_path", std::string(BAYESCOMP_DATA_DIR) + "/pima_te.csv"},
              {"output_path", "bayescomp_out"},
              {"replicates", 1},
              {"burn_in", 0},
              {"thin", 1}};
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_number_integer() || a.is_number_unsigned()) return b.is_number_integer() || b.is_number_unsigned();
    return true;
  }
  return a.type() == b.type();
}

Json resolve(const std::string& experiment, const Json& given) {
  const auto& spec = registry().at(experiment);
  Json merged = common_defaults(experiment);
  for (const auto& [k, v] : spec.defaults.items()) merged[k] = v;
  if (!given.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  for (const auto& [k, v] : given.items()) {
    if (!merged.contains(k)) throw Error(ErrorCode::kConfig, "unknown config key '" + k + "' for experiment " + experiment);
    if (!same_kind(merged[k], v)) throw Error(ErrorCode::kConfig, "config key '" + k + "' has the wrong type");
    if (k == "experiment" && v.get<std::string>() != experiment) {
      throw Error(ErrorCode::kConfig, "config names experiment '" + v.get<std::string>() + "' but '" + experiment + "' was requested");
    }
    merged[k] = v;
  }
  return merged;
}

std::string error_object(const Error& e) {
  return Json{{"code", static_cast<int>(e.code())}, {"name", error_code_name(e.code())}, {"message", e.what()}}.dump();
}

}  // namespace

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("BAYESCOMP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunReport run_experiment(const std::string& experiment, const std::string& config_json, const RunOverrides& ov) {
  if (!registry().contains(experiment)) throw Error(ErrorCode::kConfig, "unknown experiment '" + experiment + "'");
  Json given;
  try {
    given = config_json.empty() ? Json::object() : Json::parse(config_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  Json cfg = resolve(experiment, given);
  if (ov.seed) cfg["seed"] = *ov.seed;
  if (ov.data_path) cfg["data_path"] = *ov.data_path;
  if (ov.output_path) cfg["output_path"] = *ov.output_path;
  if (ov.replicates) cfg["replicates"] = *ov.replicates;
  if (ov.burn_in) cfg["burn_in"] = *ov.burn_in;
  if (ov.thin) cfg["thin"] = *ov.thin;

  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto replicates = cfg.at("replicates").get<std::size_t>();
  const Context ctx{cfg, cfg.at("burn_in").get<std::size_t>(), cfg.at("thin").get<std::size_t>()};
  if (replicates < 1) throw Error(ErrorCode::kConfig, "replicates must be at least 1");
  if (ctx.thin < 1) throw Error(ErrorCode::kConfig, "thin must be at least 1");
  const auto& runner = registry().at(experiment).run;

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<RunOutput>> outputs(replicates);
  std::vector<std::string> failures(replicates);
  {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t r = next++; r < replicates; r = next++) {
        RngStream rng(seed, r);
        try {
          outputs[r] = runner(ctx, rng);
        } catch (const Error& e) {
          failures[r] = error_object(e);
        } catch (const std::exception& e) {
          failures[r] = error_object(Error(ErrorCode::kInternal, e.what()));
        }
      }
    };
    const std::size_t workers = std::min(worker_count(), replicates);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (replicates == 1 && !outputs[0]) {
    const auto err = Json::parse(failures[0]);
    throw Error(static_cast<ErrorCode>(err.at("code").get<int>()), err.at("message").get<std::string>());
  }

  const std::filesystem::path dir = cfg.at("output_path").get<std::string>();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir.string() + ": " + ec.message());

  RunReport report;
  Json summary{{"schema_version", kSummarySchemaVersion},
               {"experiment", experiment},
               {"seed", seed},
               {"replicates", replicates},
               {"config", cfg},
               {"runtime_seconds", seconds}};
  if (replicates == 1) {
    summary["results"] = outputs[0]->results;
    if (!outputs[0]->draws.header.empty()) {
      const auto path = dir / outputs[0]->draws_name;
      write_csv(path, outputs[0]->draws);
      report.files.push_back(path.string());
    }
  } else {
    CsvTable table;
    table.header = {"replicate", "stream_id", "ok"};
    std::vector<std::string> names;
    for (const auto& o : outputs) {
      if (!o) continue;
      for (const auto& [k, v] : o->scalars) names.push_back(k);
      break;
    }
    table.header.insert(table.header.end(), names.begin(), names.end());
    std::vector<std::vector<double>> columns(names.size());
    Json per = Json::array();
    for (std::size_t r = 0; r < replicates; ++r) {
      std::vector<double> row{static_cast<double>(r), static_cast<double>(r), outputs[r] ? 1.0 : 0.0};
      for (std::size_t j = 0; j < names.size(); ++j) {
        const double v = outputs[r] ? outputs[r]->scalars[j].second : std::nan("");
        row.push_back(v);
        if (outputs[r]) columns[j].push_back(v);
      }
      table.rows.push_back(std::move(row));
      per.push_back(outputs[r] ? Json{{"replicate", r}, {"results", outputs[r]->results}}
                               : Json{{"replicate", r}, {"error", Json::parse(failures[r])}});
    }
    Json across = Json::object();
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto& c = columns[j];
      if (c.empty()) continue;
      const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
      double ss = 0.0;
      for (double v : c) ss += (v - mean) * (v - mean);
      across[names[j]] = Json{{"mean", mean}, {"sd", c.size() > 1 ? std::sqrt(ss / static_cast<double>(c.size() - 1)) : 0.0}};
    }
    summary["across_replicates"] = across;
    summary["per_replicate"] = per;
    const auto path = dir / "replicates.csv";
    write_csv(path, table);
    report.files.push_back(path.string());
  }
  report.summary_json = summary.dump(2);
  const auto spath = dir / "summary.json";
  std::ofstream out(spath, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + spath.string());
  out << report.summary_json << '\n';
  report.files.insert(report.files.begin(), spath.string());
  return report;
}

}  // namespace bayescomp
