#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wlf::cli {

/// detector, kms, commutator, wavefront, translate, hadamard, angular.
const std::vector<std::string>& command_names();

/// Parses TOML (or JSON when the text starts with '{') into a JSON document.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config(const std::string& path);

/// Fills defaults and validates; the result reproduces the run. Throws ConfigError.
nlohmann::json resolve_config(const std::string& command, nlohmann::json cfg);

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<Artifact> artifacts;
  /// Nonzero when a check failed after the outputs were produced.
  int status = 0;
  std::string message;
};

/// Runs a resolved config. Nothing is written to disk.
CommandResult run_command(const nlohmann::json& resolved);

/// Writes the artifacts, the resolved config and manifest.json into `dir`.
void write_outputs(const std::string& dir, const nlohmann::json& resolved, const CommandResult& result);

std::string sha256_hex(std::string_view data);
/// Deterministic JSON text: sorted keys, two-space indent, trailing newline.
std::string json_text(const nlohmann::json& j);

/// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 validation failure.
int run(int argc, char** argv);

}  // namespace wlf::cli
