#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dcbats/harness.hpp"

namespace dcbats {

struct OutputOptions {
  std::optional<std::string> dir;
  bool draws = true;        // every DrawSet, full and per subsequence
  bool barycenters = true;  // u, q_bar per parameter and the barycenter DrawSet
};

/// A parsed experiment file: the experiment itself plus output settings.
struct RunConfig {
  ExperimentSpec spec;
  OutputOptions output;
  std::optional<unsigned> threads;
};

/// Parses and validates a JSON experiment document. Unknown keys, wrong types
/// and inconsistent settings raise ConfigError naming the offending key.
/// Relative data paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

/// Reads `path` and parses it; IoError when unreadable.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dcbats
