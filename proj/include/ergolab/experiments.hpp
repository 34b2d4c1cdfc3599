#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/serialize.hpp"

namespace ergolab {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind : std::uint8_t {
  simulate,
  exponents,
  sigma,
  clt,
  deviation,
  entropy,
  historical,
  lorenz,
  calibrate
};

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);
std::vector<ExperimentKind> all_experiment_kinds();

/// Full default configuration of a kind. It doubles as the schema: user
/// configs may only contain keys that appear here, with matching types.
Json default_config(ExperimentKind kind);

/// Applies "a.b.c=value"; value is parsed as JSON, falling back to a
/// string. Throws ConfigError on malformed assignments.
void apply_override(Json& config, const std::string& assignment);

/// Merges `user` over the defaults after schema validation. Throws
/// ConfigError naming the offending path (for example "$.ensemble.count").
Json resolve_config(ExperimentKind kind, const Json& user);

/// Parses a config file (JSON; '//' line comments allowed).
Json load_config_file(const std::filesystem::path& path);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ResultBundle {
  std::filesystem::path directory;
  Json manifest;
  std::vector<OutputFile> outputs;
  bool complete = false;
  std::string error;
};

struct RunOptions {
  std::filesystem::path runs_root = "runs";
  /// Writes into this directory instead of runs/<timestamp>-<kind>-<seed>/.
  std::optional<std::filesystem::path> directory;
  bool plots = true;
};

/// Runs one experiment and writes manifest.json, its outputs, digests.json
/// and status.json. Numerical guards and other failures during the run
/// leave a bundle marked incomplete and are rethrown.
ResultBundle run_experiment(ExperimentKind kind, const Json& config, const RunOptions& options = {});

/// Re-runs the experiment recorded in a bundle's manifest.
ResultBundle rerun_manifest(const std::filesystem::path& run_dir, const RunOptions& options = {});

std::string sha256_file(const std::filesystem::path& path);

struct DigestCheck {
  bool ok = true;
  std::vector<std::string> mismatched;  ///< changed or missing files
};

/// Compares digests.json against the files on disk.
DigestCheck verify_bundle(const std::filesystem::path& run_dir);

/// Reads the digests recorded in a bundle.
Json read_digests(const std::filesystem::path& run_dir);

}  // namespace ergolab
