//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalelaw/data_model.hpp"
#include "scalelaw/fitpipes.hpp"
#include "scalelaw/optim.hpp"

namespace scalelaw {

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr const char *kSeedEnvVar = "SCALELAW_SEED";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitError = 2;

/// Contents of the --config document: benchmark registry (overlaid on the
/// defaults), fit settings and holdout rule.
struct CliConfig {
  BenchmarkRegistry registry = BenchmarkRegistry::defaults();
  FitConfig fit;
  HoldoutRule holdout;
};

CliConfig config_from_json(const nlohmann::json &j);
CliConfig load_config(const std::optional<std::filesystem::path> &path);
nlohmann::json fit_config_to_json(const FitConfig &cfg);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> input_paths;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<std::string> outputs;
};

nlohmann::json to_json(const RunManifest &m);

/// Entry point of the scalelaw executable.
int run_cli(int argc, const char *const *argv);

}  // namespace scalelaw
