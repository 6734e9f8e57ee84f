#pragma once
// Shared plumbing for the command-line tool: strict JSON config parsing,
// run manifests, and deterministic CSV/JSON emission.
//
// Config documents are versioned ("schema_version": 1) and unknown fields are
// rejected so that typos fail loudly instead of silently running a different
// experiment.  All floating-point output uses %.17g for lossless round-trips.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "declab/channel.hpp"
#include "declab/coding.hpp"
#include "declab/seeding.hpp"
#include "declab/state.hpp"

namespace declab {

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// UTC timestamp, overridable through SOURCE_DATE_EPOCH for reproducible runs.
inline std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string tool_version = kToolVersion;
  std::string timestamp;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["tool_version"] = tool_version;
    j["timestamp"] = timestamp;
    return j;
  }
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

// ---------- Strict config access ----------

inline void reject_unknown_fields(const nlohmann::json& j,
                                  std::initializer_list<const char*> allowed,
                                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

inline const nlohmann::json& need(const nlohmann::json& j, const char* key,
                                  const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + std::string(key) + "'");
  return j.at(key);
}

inline void require_schema_version(const nlohmann::json& j, const std::string& where) {
  const std::int64_t v = need(j, "schema_version", where).get<std::int64_t>();
  if (v != 1) {
    throw ConfigError(where + ": unsupported schema_version " + std::to_string(v) +
                      " (this tool reads version 1)");
  }
}

// ---------- Channel and input-state specs ----------

// {"family": "identity" | "erasure" | "depolarizing" | "dephasing" |
//  "amplitude_damping" | "random" | "kraus", ...family-specific fields}.
// "random" draws a reproducible channel from the run seed.
inline Channel channel_from_config(const nlohmann::json& j, SeededSource src) {
  const std::string where = "channel";
  const std::string family = need(j, "family", where).get<std::string>();
  if (family == "identity") {
    reject_unknown_fields(j, {"family", "d"}, where);
    return identity_channel(need(j, "d", where).get<std::int64_t>());
  }
  if (family == "erasure") {
    reject_unknown_fields(j, {"family", "d", "p"}, where);
    return erasure_channel(need(j, "d", where).get<std::int64_t>(),
                           need(j, "p", where).get<double>());
  }
  if (family == "depolarizing") {
    reject_unknown_fields(j, {"family", "d", "p"}, where);
    return depolarizing_channel(need(j, "d", where).get<std::int64_t>(),
                                need(j, "p", where).get<double>());
  }
  if (family == "dephasing") {
    reject_unknown_fields(j, {"family", "p"}, where);
    return dephasing_channel(need(j, "p", where).get<double>());
  }
  if (family == "amplitude_damping") {
    reject_unknown_fields(j, {"family", "gamma"}, where);
    return amplitude_damping_channel(need(j, "gamma", where).get<double>());
  }
  if (family == "random") {
    reject_unknown_fields(j, {"family", "in_dim", "out_dim", "kraus_count"}, where);
    Prng rng(src.derive(0x6368616eULL));  // dedicated stream for channel sampling
    return random_channel(need(j, "in_dim", where).get<std::int64_t>(),
                          need(j, "out_dim", where).get<std::int64_t>(),
                          need(j, "kraus_count", where).get<std::int64_t>(), rng);
  }
  if (family == "kraus") {
    nlohmann::json doc = j;
    doc.erase("family");
    return channel_from_json(doc);
  }
  throw ConfigError(where + ": unknown family '" + family + "'");
}

// "maximally_mixed" (default when absent) or a row-major array of d*d
// [re, im] pairs describing a density matrix.
inline DensityOperator phi_from_config(const nlohmann::json& cfg, std::int64_t d,
                                       const std::string& label = "A") {
  const TensorSpace sp = TensorSpace::single(label, d);
  if (!cfg.contains("phi") || (cfg.at("phi").is_string() &&
                               cfg.at("phi").get<std::string>() == "maximally_mixed")) {
    return DensityOperator::maximally_mixed(sp);
  }
  const nlohmann::json& p = cfg.at("phi");
  if (p.is_string()) throw ConfigError("phi: unknown keyword '" + p.get<std::string>() + "'");
  if (!p.is_array() || static_cast<std::int64_t>(p.size()) != d * d) {
    throw ConfigError("phi: expected \"maximally_mixed\" or a row-major array of " +
                      std::to_string(d * d) + " [re, im] pairs");
  }
  MatrixXcd m(d, d);
  std::int64_t idx = 0;
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t k = 0; k < d; ++k, ++idx) {
      const auto& pair = p.at(static_cast<size_t>(idx));
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("phi: entry " + std::to_string(idx) + " is not an [re, im] pair");
      }
      m(i, k) = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
  }
  return DensityOperator(sp, std::move(m));
}

// ---------- CSV ----------

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace declab
