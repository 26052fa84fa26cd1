#include "bayescomp.h"

#include "bayescomp/core.hpp"
#include "bayescomp/experiment.hpp"
#include "bayescomp/probit.hpp"
#include "bayescomp/rng.hpp"

#include <json.hpp>

#include <new>
#include <string>

struct bc_rng {
  bayescomp::RngStream stream;
};

struct bc_dataset {
  bayescomp::PimaData data;
};

struct bc_result {
  bayescomp::RunReport report;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return BC_OK;
  } catch (const bayescomp::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BC_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BC_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw bayescomp::Error(bayescomp::ErrorCode::kInvalidParameter, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* bc_version(void) { return "1.0.0"; }

const char* bc_last_error(void) { return last_error.c_str(); }

const char* bc_error_name(int code) { return bayescomp::error_code_name(static_cast<bayescomp::ErrorCode>(code)); }

int bc_rng_create(uint64_t seed, uint64_t stream_id, bc_rng** out) {
  return guarded([&] {
    need(out, "out");
    *out = new bc_rng{bayescomp::RngStream(seed, stream_id)};
  });
}

void bc_rng_destroy(bc_rng* rng) { delete rng; }

int bc_rng_uniform(bc_rng* rng, double* out) {
  return guarded([&] {
    need(rng, "rng");
    need(out, "out");
    *out = rng->stream.uniform();
  });
}

int bc_rng_normal(bc_rng* rng, double* out) {
  return guarded([&] {
    need(rng, "rng");
    need(out, "out");
    *out = rng->stream.normal();
  });
}

int bc_dataset_load_pima(const char* path, bc_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new bc_dataset{bayescomp::read_pima_csv(path)};
  });
}

int bc_dataset_rows(const bc_dataset* data, size_t* out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    *out = data->data.rows();
  });
}

void bc_dataset_destroy(bc_dataset* data) { delete data; }

int bc_probit_mle(const bc_dataset* data, double* beta, double* std_errors, size_t capacity, size_t* dim) {
  return guarded([&] {
    need(data, "data");
    need(dim, "dim");
    const bayescomp::ProbitModel model(data->data.design, data->data.response, data->data.names);
    const auto fit = bayescomp::probit_mle(model);
    *dim = model.dim();
    if (capacity < model.dim()) {
      throw bayescomp::Error(bayescomp::ErrorCode::kInvalidParameter, "output buffers are too small");
    }
    for (std::size_t j = 0; j < model.dim(); ++j) {
      if (beta) beta[j] = fit.beta(static_cast<Eigen::Index>(j));
      if (std_errors) std_errors[j] = fit.std_errors(static_cast<Eigen::Index>(j));
    }
  });
}

const char* bc_experiment_list(void) {
  static const std::string list = [] {
    std::string s;
    for (const auto& n : bayescomp::experiment_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return list.c_str();
}

int bc_experiment_run(const char* experiment, const char* config_json, const char* overrides_json, bc_result** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = nullptr;
    bayescomp::RunOverrides ov;
    if (overrides_json && *overrides_json) {
      nlohmann::json o;
      try {
        o = nlohmann::json::parse(overrides_json);
      } catch (const nlohmann::json::exception& e) {
        throw bayescomp::Error(bayescomp::ErrorCode::kConfig, std::string("overrides are not valid JSON: ") + e.what());
      }
      try {
        for (const auto& [k, v] : o.items()) {
          if (k == "seed") ov.seed = v.get<std::uint64_t>();
          else if (k == "data_path") ov.data_path = v.get<std::string>();
          else if (k == "output_path") ov.output_path = v.get<std::string>();
          else if (k == "replicates") ov.replicates = v.get<std::size_t>();
          else if (k == "burn_in") ov.burn_in = v.get<std::size_t>();
          else if (k == "thin") ov.thin = v.get<std::size_t>();
          else throw bayescomp::Error(bayescomp::ErrorCode::kConfig, "unknown override '" + k + "'");
        }
      } catch (const nlohmann::json::exception& e) {
        throw bayescomp::Error(bayescomp::ErrorCode::kConfig, std::string("bad override: ") + e.what());
      }
    }
    *out = new bc_result{bayescomp::run_experiment(experiment, config_json ? config_json : "", ov)};
  });
}

const char* bc_result_summary(const bc_result* result) { return result ? result->report.summary_json.c_str() : ""; }

size_t bc_result_file_count(const bc_result* result) { return result ? result->report.files.size() : 0; }

const char* bc_result_file(const bc_result* result, size_t index) {
  if (!result || index >= result->report.files.size()) return nullptr;
  return result->report.files[index].c_str();
}

void bc_result_destroy(bc_result* result) { delete result; }

}  // extern "C"
