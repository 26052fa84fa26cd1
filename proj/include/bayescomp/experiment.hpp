#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayescomp {

/// Command-line values that take precedence over the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data_path;
  std::optional<std::string> output_path;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> thin;
};

struct RunReport {
  std::string summary_json;
  std::vector<std::string> files;
};

inline constexpr int kSummarySchemaVersion = 1;

/// Names accepted by run_experiment.
std::vector<std::string> experiment_names();

/// Runs one experiment described by a JSON object. Unknown keys are
/// rejected with kConfig. Writes summary.json plus CSV files into the output
/// directory and returns the summary text.
RunReport run_experiment(const std::string& experiment, const std::string& config_json, const RunOverrides& overrides);

/// Worker count for replicated runs: BAYESCOMP_THREADS when set and
/// positive, otherwise the hardware concurrency.
std::size_t worker_count();

}  // namespace bayescomp
