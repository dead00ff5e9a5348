#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <regex>

#include "hs/error.hpp"
#include "hs/io.hpp"
#include "hs/profiles.hpp"

#ifndef HS_VERSION
#define HS_VERSION "unknown"
#endif

namespace hs::cli {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SeedChoice resolve_seed(bool flag_given, std::uint64_t flag_value, std::optional<std::uint64_t> fallback) {
  if (flag_given) return {flag_value, "flag"};
  if (const char* env = std::getenv("HS_SEED"); env && *env) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(env, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string(env).size() || env[0] == '-') throw UsageError("HS_SEED must be an unsigned integer");
    return {v, "HS_SEED"};
  }
  if (fallback) return {*fallback, "config"};
  return {0, "default"};
}

SpectralPoint parse_z(const std::string& text) {
  static const std::regex full(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*i\s*$)");
  static const std::regex imag(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*i\s*$)");
  std::smatch m;
  double x = 0.0, v = 0.0;
  if (std::regex_match(text, m, full)) {
    x = std::stod(m[1]);
    v = std::stod(m[3]) * (m[2] == "-" ? -1.0 : 1.0);
  } else if (std::regex_match(text, m, imag)) {
    v = std::stod(m[1]);
  } else {
    throw UsageError("--z: cannot parse '" + text + "', expected x+vi");
  }
  if (!(v > 0.0)) throw UsageError("--z: '" + text + "' must have a positive imaginary part");
  return SpectralPoint(x, v);
}

WeightProfile load_profile(const ProfileOptions& opts, std::uint64_t seed) {
  if (std::filesystem::is_regular_file(opts.profile)) return read_profile_csv(opts.profile);
  ProfileGenerator gen;
  try {
    gen = ProfileGenerator::parse(opts.profile);
  } catch (const Error& e) {
    throw UsageError(std::string("--profile: ") + e.what());
  }
  if (opts.n == 0) throw UsageError("--n is required with a generated profile");
  if (opts.N == 0) throw UsageError("--N is required with a generated profile");
  return gen.generate(opts.n, opts.N, seed);
}

void write_manifest(const RunInfo& run, const std::string& path, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& payloads, nlohmann::json extra) {
  nlohmann::json j;
  j["command"] = run.command;
  j["version"] = HS_VERSION;
  j["argv"] = run.argv;
  j["config_hash"] = hex64(fnv1a64(run.config_text));
  j["threads"] = run.threads;
  j["created_utc"] = utc_now();
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    files.push_back({{"path", outputs[k]}, {"bytes", payloads[k].size()}, {"fnv1a64", hex64(fnv1a64(payloads[k]))}});
  }
  j["outputs"] = files;
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  atomic_write(path, j.dump(2) + "\n");
}

void emit(const RunInfo& run, const std::string& path, const std::string& payload, nlohmann::json extra) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  atomic_write(path, payload);
  write_manifest(run, path + ".manifest.json", {path}, {payload}, std::move(extra));
}

}  // namespace hs::cli
