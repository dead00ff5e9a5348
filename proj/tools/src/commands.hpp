#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hs/core.hpp"

namespace hs::cli {

// Bad input detected after flag parsing; reported with exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunInfo {
  std::string command;
  std::vector<std::string> argv;
  std::string config_text;     // effective options, used for the config hash
  unsigned threads = 1;
};

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source;          // "flag", "HS_SEED", "config" or "default"
};

/// Explicit --seed wins, then HS_SEED, then the config or spec value.
SeedChoice resolve_seed(bool flag_given, std::uint64_t flag_value, std::optional<std::uint64_t> fallback);

/// "x+vi" text with v > 0; "vi" alone means x = 0.
SpectralPoint parse_z(const std::string& text);

struct ProfileOptions {
  std::string profile = "ones";
  std::size_t n = 0;
  std::size_t N = 0;
};

/// CSV path when the file exists, generator spec otherwise.
WeightProfile load_profile(const ProfileOptions& opts, std::uint64_t seed);

/// Payload to `path` (atomically) plus `path.manifest.json`; stdout when
/// `path` is empty.
void emit(const RunInfo& run, const std::string& path, const std::string& payload, nlohmann::json extra = {});

/// Manifest for a set of files already written.
void write_manifest(const RunInfo& run, const std::string& path, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& payloads, nlohmann::json extra);

}  // namespace hs::cli
