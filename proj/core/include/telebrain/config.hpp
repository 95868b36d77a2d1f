#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "telebrain/audio.hpp"
#include "telebrain/domain.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/timing.hpp"

namespace telebrain {

/// Server settings, read from a JSON file:
///
///   {"http_port": 8080, "bind_address": "0.0.0.0",
///    "osc": {"listen_port": 57121, "default_send_port": 57120},
///    "delay_budget_ms": 200, "data_dir": "data", "timezone": "+01:00",
///    "rng_seed": 42,
///    "tts": {"endpoint": "http://127.0.0.1:5002/speak",
///            "language_map": {"en": "en-US"}, "timeout_ms": 2000}}
///
/// Every key is optional. Without "tts" the offline tone stub renders speech.
struct ServerConfig {
  struct Osc {
    std::uint16_t listen_port = osc::kDefaultListenPort;
    std::uint16_t default_send_port = osc::kDefaultSendPort;
  };

  std::uint16_t http_port = 8080;
  std::string bind_address = "0.0.0.0";
  Osc osc;
  timing::Millis delay_budget_ms = timing::kDefaultDelayBudgetMs;
  std::filesystem::path data_dir = "data";
  std::string timezone = "UTC";
  std::optional<std::uint64_t> rng_seed;
  std::optional<audio::HttpTtsConfig> tts;

  int utc_offset_minutes() const;
};

inline constexpr const char* kDataDirEnv = "TELEBRAIN_DATA_DIR";

/// "UTC", "Z", "+HH:MM" or "-HH:MM" -> minutes east of UTC.
/// Throws Error("invalid") otherwise.
int parse_utc_offset(std::string_view tz);

/// Throws ValidationError-style Error("invalid") listing every bad key.
ServerConfig parse_config(const Json& j);
/// Reads and parses a file, then applies the environment override.
/// Relative data_dir values resolve against the config file's directory.
ServerConfig load_config(const std::filesystem::path& path);
/// TELEBRAIN_DATA_DIR, when set and non-empty, replaces data_dir.
void apply_env(ServerConfig& cfg);

}  // namespace telebrain
