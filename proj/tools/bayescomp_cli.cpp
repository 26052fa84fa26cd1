#include "bayescomp.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int fail(int code, const std::string& message) {
  const nlohmann::json err{{"error", {{"code", code}, {"name", bc_error_name(code)}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return code == BC_OK ? 1 : code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian computation experiments"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> thin;
  std::optional<long> n1, c2, c3;
  bool list = false;

  app.add_option("experiment", experiment, std::string("Experiment to run: ") + bc_experiment_list());
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "Root seed");
  app.add_option("--data", data, "Pima CSV file");
  app.add_option("--out", out, "Output directory");
  app.add_option("--replicates", replicates, "Independent replicates");
  app.add_option("--burn-in", burn_in, "Draws discarded from each chain");
  app.add_option("--thin", thin, "Keep every k-th draw");
  app.add_option("--n1", n1, "capture: animals caught in the first period");
  app.add_option("--c2", c2, "capture: recaptures in the second period");
  app.add_option("--c3", c3, "capture: recaptures in the third period");
  app.add_flag("--list", list, "Print the experiment names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(BC_CONFIG, e.what());
  }
  if (list) {
    std::cout << bc_experiment_list() << '\n';
    return 0;
  }
  if (experiment.empty()) return fail(BC_CONFIG, "no experiment given");

  std::string config = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) return fail(BC_IO, "cannot read config " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    config = ss.str();
  }

  if (n1 || c2 || c3) {
    nlohmann::ordered_json cfg;
    try {
      cfg = nlohmann::ordered_json::parse(config);
    } catch (const nlohmann::json::exception& e) {
      return fail(BC_CONFIG, std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) return fail(BC_CONFIG, "config must be a JSON object");
    if (n1) cfg["n1"] = *n1;
    if (c2) cfg["c2"] = *c2;
    if (c3) cfg["c3"] = *c3;
    config = cfg.dump();
  }

  nlohmann::json ov = nlohmann::json::object();
  if (seed) ov["seed"] = *seed;
  if (data) ov["data_path"] = *data;
  if (out) ov["output_path"] = *out;
  if (replicates) ov["replicates"] = *replicates;
  if (burn_in) ov["burn_in"] = *burn_in;
  if (thin) ov["thin"] = *thin;

  bc_result* result = nullptr;
  const int rc = bc_experiment_run(experiment.c_str(), config.c_str(), ov.dump().c_str(), &result);
  if (rc != BC_OK) return fail(rc, bc_last_error());
  std::cout << bc_result_summary(result) << '\n';
  bc_result_destroy(result);
  return 0;
}
