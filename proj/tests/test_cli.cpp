#include "bayescomp.h"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "bayescomp_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

/// Validates the subset of JSON Schema used by docs/summary.schema.json.
bool validates(const json& v, const json& schema, std::string& why) {
  if (schema.contains("type")) {
    const auto t = schema["type"].get<std::string>();
    const bool ok = (t == "object" && v.is_object()) || (t == "array" && v.is_array()) ||
                    (t == "string" && v.is_string()) || (t == "integer" && v.is_number_integer()) ||
                    (t == "number" && v.is_number()) || (t == "boolean" && v.is_boolean());
    if (!ok) return why = "expected " + t, false;
  }
  if (schema.contains("const") && v != schema["const"]) return why = "const mismatch", false;
  if (schema.contains("enum") && std::find(schema["enum"].begin(), schema["enum"].end(), v) == schema["enum"].end()) {
    return why = "value not in enum", false;
  }
  if (schema.contains("required")) {
    for (const auto& k : schema["required"]) {
      if (!v.contains(k.get<std::string>())) return why = "missing " + k.get<std::string>(), false;
    }
  }
  if (schema.contains("properties")) {
    for (const auto& [k, sub] : schema["properties"].items()) {
      if (v.contains(k) && !validates(v[k], sub, why)) return why = k + ": " + why, false;
    }
  }
  if (schema.contains("items")) {
    for (const auto& item : v) {
      if (!validates(item, schema["items"], why)) return false;
    }
  }
  if (schema.contains("oneOf")) {
    int hits = 0;
    std::string ignored;
    for (const auto& sub : schema["oneOf"]) hits += validates(v, sub, ignored);
    if (hits != 1) return why = "oneOf matched " + std::to_string(hits), false;
  }
  return true;
}

json schema() { return json::parse(slurp(fs::path(BAYESCOMP_DATA_DIR).parent_path() / "docs" / "summary.schema.json")); }

json run_ok(const std::string& experiment, const json& config, const json& overrides = json::object()) {
  bc_result* r = nullptr;
  const int rc = bc_experiment_run(experiment.c_str(), config.dump().c_str(), overrides.dump().c_str(), &r);
  INFO(bc_last_error());
  REQUIRE(rc == BC_OK);
  const json out = json::parse(bc_result_summary(r));
  bc_result_destroy(r);
  std::string why;
  INFO(why);
  CHECK(validates(out, schema(), why));
  return out;
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const char* cli = std::getenv("BAYESCOMP_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string("\"") + cli + "\" " + args + " > /dev/null 2> \"" + stderr_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("C API random streams") {
  bc_rng *a = nullptr, *b = nullptr;
  REQUIRE(bc_rng_create(9, 3, &a) == BC_OK);
  REQUIRE(bc_rng_create(9, 3, &b) == BC_OK);
  for (int i = 0; i < 100; ++i) {
    double x = 0, y = 0;
    REQUIRE(bc_rng_uniform(a, &x) == BC_OK);
    REQUIRE(bc_rng_uniform(b, &y) == BC_OK);
    CHECK(x == y);
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  double z = 0;
  CHECK(bc_rng_normal(a, &z) == BC_OK);
  CHECK(bc_rng_normal(nullptr, &z) == BC_INVALID_PARAMETER);
  CHECK(std::string(bc_last_error()).find("null") != std::string::npos);
  bc_rng_destroy(a);
  bc_rng_destroy(b);
}

TEST_CASE("C API dataset and MLE") {
  bc_dataset* d = nullptr;
  REQUIRE(bc_dataset_load_pima(testing_support::pima_path().c_str(), &d) == BC_OK);
  size_t rows = 0;
  CHECK(bc_dataset_rows(d, &rows) == BC_OK);
  CHECK(rows == 332);
  double beta[3], se[3];
  size_t dim = 0;
  REQUIRE(bc_probit_mle(d, beta, se, 3, &dim) == BC_OK);
  CHECK(dim == 3);
  CHECK(std::abs(beta[0] - 0.012616) < 1e-3);
  CHECK(std::abs(beta[2] - 0.350301) < 1e-3);
  CHECK(bc_probit_mle(d, beta, se, 2, &dim) == BC_INVALID_PARAMETER);
  bc_dataset_destroy(d);

  CHECK(bc_dataset_load_pima("/nonexistent.csv", &d) == BC_IO);
  CHECK(std::string(bc_error_name(BC_IO)) == "io");
  CHECK(std::string(bc_error_name(BC_SEPARATION)) == "separation");
}

TEST_CASE("experiment list") {
  const std::string list = bc_experiment_list();
  for (const char* e : {"mle", "mh", "gibbs", "mwg", "pmc", "evidence", "abc", "capture", "mixture-demo"}) {
    CHECK(list.find(e) != std::string::npos);
  }
}

TEST_CASE("mle experiment reports the reference fit") {
  const auto dir = fresh_dir("mle");
  const json s = run_ok("mle", {{"output_path", dir.string()}});
  CHECK(std::abs(s["results"]["coefficients"]["glu"].get<double>() - 0.012616) < 1e-3);
  CHECK(std::abs(s["results"]["coefficients"]["bp"].get<double>() + 0.029050) < 1e-3);
  CHECK(std::abs(s["results"]["coefficients"]["ped"].get<double>() - 0.350301) < 1e-3);
  CHECK(std::abs(s["results"]["std_errors"]["ped"].get<double>() - 0.208806) < 2e-3);
  CHECK(s["config"]["seed"] == 1);
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("mh experiment with a tenfold proposal") {
  const auto dir = fresh_dir("mh10");
  const json s = run_ok("mh", {{"scale", 10.0}, {"output_path", dir.string()}});
  CHECK(std::abs(s["results"]["acceptance_rate"].get<double>() - 0.15) < 0.06);
  const std::string csv = slurp(dir / "draws.csv");
  CHECK(csv.rfind("iteration,glu,bp,log_post\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10001);
}

TEST_CASE("burn-in and thinning shape the draws file") {
  const auto dir = fresh_dir("thin");
  run_ok("gibbs", {{"iterations", 1000}, {"output_path", dir.string()}}, {{"burn_in", 100}, {"thin", 10}});
  const std::string csv = slurp(dir / "draws.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 90);
  CHECK(csv.find("\n101,") != std::string::npos);
}

TEST_CASE("same configuration gives byte-identical outputs") {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  for (const auto& [exp, cfg] : {std::pair<std::string, json>{"mh", {{"iterations", 3000}}},
                                 {"pmc", {{"particles", 300}, {"iterations", 4}}},
                                 {"abc", {{"particles", 200}, {"generations", 3}}}}) {
    json ca = cfg, cb = cfg;
    ca["output_path"] = a.string();
    cb["output_path"] = b.string();
    run_ok(exp, ca);
    run_ok(exp, cb);
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      INFO(exp << " " << entry.path().filename());
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    json sa = json::parse(slurp(a / "summary.json")), sb = json::parse(slurp(b / "summary.json"));
    sa.erase("runtime_seconds");
    sb.erase("runtime_seconds");
    sa["config"].erase("output_path");
    sb["config"].erase("output_path");
    CHECK(sa == sb);
  }
}

TEST_CASE("unknown keys and bad types are rejected") {
  bc_result* r = nullptr;
  CHECK(bc_experiment_run("mle", R"({"colums": ["glu"]})", nullptr, &r) == BC_CONFIG);
  CHECK(std::string(bc_last_error()).find("colums") != std::string::npos);
  CHECK(bc_experiment_run("mh", R"({"iterations": "many"})", nullptr, &r) == BC_CONFIG);
  CHECK(bc_experiment_run("mh", R"({"scale": 1)", nullptr, &r) == BC_CONFIG);
  CHECK(bc_experiment_run("nope", "{}", nullptr, &r) == BC_CONFIG);
  CHECK(bc_experiment_run("mle", "{}", R"({"sed": 3})", &r) == BC_CONFIG);
  CHECK(bc_experiment_run("mle", R"({"experiment": "mh"})", nullptr, &r) == BC_CONFIG);
  CHECK(r == nullptr);
}

TEST_CASE("replicates use distinct streams and record each row") {
  const auto dir = fresh_dir("reps");
  const json s = run_ok("mixture-demo", {{"iterations", 200}, {"output_path", dir.string()}}, {{"replicates", 2}});
  CHECK(s["replicates"] == 2);
  REQUIRE(s["per_replicate"].size() == 2);
  CHECK(s["per_replicate"][0]["results"]["major_mode"] != s["per_replicate"][1]["results"]["major_mode"]);
  CHECK(s["across_replicates"].contains("acceptance_rate"));
  const std::string csv = slurp(dir / "replicates.csv");
  CHECK(csv.rfind("replicate,stream_id,ok,escaped,escape_iteration,acceptance_rate\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  // Identical component means leave no spurious mode, so every replicate fails.
  const auto bad = fresh_dir("reps_bad");
  const json f = run_ok("mixture-demo", {{"mu2", 0.0}, {"output_path", bad.string()}}, {{"replicates", 3}});
  REQUIRE(f["per_replicate"].size() == 3);
  for (const auto& row : f["per_replicate"]) CHECK(row["error"]["name"] == "model-failure");
  const std::string bad_csv = slurp(bad / "replicates.csv");
  CHECK(bad_csv.find("\n2,2,0") != std::string::npos);
}

TEST_CASE("every experiment runs at small scale") {
  const std::vector<std::pair<std::string, json>> runs{
      {"gibbs", {{"iterations", 500}}},
      {"mwg", {{"iterations", 2000}, {"n", 200}}},
      {"pmc", {{"target", "mixture"}, {"particles", 300}, {"iterations", 3}}},
      {"evidence", {{"draws", 1000}, {"pilot_draws", 500}}},
      {"capture", {{"iterations", 2000}}},
  };
  for (const auto& [exp, cfg] : runs) {
    const auto dir = fresh_dir("small_" + exp);
    json c = cfg;
    c["output_path"] = dir.string();
    INFO(exp);
    const json s = run_ok(exp, c);
    CHECK(s.contains("results"));
  }
}

TEST_CASE("command-line tool") {
  const auto dir = fresh_dir("cli");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"iterations": 3000})";
  const auto err = dir / "stderr.txt";
  CHECK(run_cli("capture --config \"" + cfg.string() + "\" --n1 22 --c2 11 --c3 6 --seed 4 --out \"" +
                    (dir / "out").string() + "\"",
                err) == 0);
  const json s = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(s["seed"] == 4);
  CHECK(s["config"]["n1"] == 22);

  std::ofstream(dir / "typo.json") << R"({"iteratons": 5})";
  const int rc = run_cli("capture --config \"" + (dir / "typo.json").string() + "\"", err);
  CHECK(rc == BC_CONFIG);
  const json e = json::parse(slurp(err));
  CHECK(e["error"]["name"] == "config");
  CHECK(e["error"]["message"].get<std::string>().find("iteratons") != std::string::npos);

  CHECK(run_cli("mle --data /nonexistent.csv --out \"" + (dir / "x").string() + "\"", err) == BC_IO);
  CHECK(run_cli("", err) == BC_CONFIG);
}
