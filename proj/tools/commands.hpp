#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "abrlab/env.hpp"
#include "abrlab/rl.hpp"

namespace abrlab::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kRuntimeError = 2,
  kVerifyFailed = 3,
};

/// Everything `abrlab train` needs. Relative paths in a config file are
/// resolved against the file's directory.
struct RunConfig {
  Algo algo = Algo::kPpo;
  PpoConfig train;
  std::string qoe = "lin";
  std::filesystem::path trace_dir;
  std::filesystem::path manifest;  // empty: the default synthetic manifest
  std::filesystem::path out_dir;
  LinkConfig link;
  PlayerConfig player;
};

/// Field names mirror RunConfig; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

/// Hash of the training-relevant fields (paths and thread count excluded).
std::string config_hash(const RunConfig& config);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abrlab::cli
