#pragma once

#include "bayescomp/core.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace testing_support {

/// Runs f and returns the library error code it throws, kOk if none.
template <class F>
bayescomp::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const bayescomp::Error& e) {
    return e.code();
  }
  return bayescomp::ErrorCode::kOk;
}

inline std::string pima_path() { return std::string(BAYESCOMP_DATA_DIR) + "/pima_te.csv"; }

inline std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "bayescomp_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace testing_support
