#include "telebrain/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "telebrain/error.hpp"

namespace telebrain {

namespace {

std::uint16_t port(const Json& j, const char* key, Violations& out, std::uint16_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > 65535) {
    out.push_back({key, "port must be an integer in [1, 65535]"});
    return fallback;
  }
  return static_cast<std::uint16_t>(v.get<std::int64_t>());
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& prefix,
                    Violations& out) {
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) out.push_back({prefix + k, "unknown setting"});
  }
}

}  // namespace

int parse_utc_offset(std::string_view tz) {
  if (tz == "UTC" || tz == "Z" || tz == "utc") return 0;
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (tz.size() == 6 && (tz[0] == '+' || tz[0] == '-') && digit(tz[1]) && digit(tz[2]) &&
      tz[3] == ':' && digit(tz[4]) && digit(tz[5])) {
    const int h = (tz[1] - '0') * 10 + (tz[2] - '0');
    const int m = (tz[4] - '0') * 10 + (tz[5] - '0');
    if (h <= 14 && m < 60) return (tz[0] == '-' ? -1 : 1) * (h * 60 + m);
  }
  throw Error("invalid", "timezone must be UTC or +HH:MM / -HH:MM, got '" + std::string(tz) + "'");
}

int ServerConfig::utc_offset_minutes() const { return parse_utc_offset(timezone); }

ServerConfig parse_config(const Json& j) {
  if (!j.is_object()) throw Error("invalid", "config must be a JSON object");
  ServerConfig cfg;
  Violations out;
  reject_unknown(j,
                 {"http_port", "bind_address", "osc", "delay_budget_ms", "data_dir", "timezone",
                  "rng_seed", "tts"},
                 "", out);

  cfg.http_port = port(j, "http_port", out, cfg.http_port);
  if (j.contains("bind_address")) {
    if (j["bind_address"].is_string()) {
      cfg.bind_address = j["bind_address"].get<std::string>();
    } else {
      out.push_back({"bind_address", "must be a string"});
    }
  }
  if (j.contains("osc")) {
    const auto& o = j["osc"];
    if (!o.is_object()) {
      out.push_back({"osc", "must be an object"});
    } else {
      reject_unknown(o, {"listen_port", "default_send_port"}, "osc.", out);
      cfg.osc.listen_port = port(o, "listen_port", out, cfg.osc.listen_port);
      cfg.osc.default_send_port = port(o, "default_send_port", out, cfg.osc.default_send_port);
    }
  }
  if (j.contains("delay_budget_ms")) {
    const auto& v = j["delay_budget_ms"];
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
      out.push_back({"delay_budget_ms", "must be a positive integer"});
    } else {
      cfg.delay_budget_ms = v.get<std::int64_t>();
    }
  }
  if (j.contains("data_dir")) {
    if (j["data_dir"].is_string() && !j["data_dir"].get<std::string>().empty()) {
      cfg.data_dir = j["data_dir"].get<std::string>();
    } else {
      out.push_back({"data_dir", "must be a non-empty string"});
    }
  }
  if (j.contains("timezone")) {
    if (!j["timezone"].is_string()) {
      out.push_back({"timezone", "must be a string"});
    } else {
      cfg.timezone = j["timezone"].get<std::string>();
      try {
        parse_utc_offset(cfg.timezone);
      } catch (const Error& e) {
        out.push_back({"timezone", e.what()});
      }
    }
  }
  if (j.contains("rng_seed")) {
    if (j["rng_seed"].is_number_unsigned()) {
      cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
    } else {
      out.push_back({"rng_seed", "must be a non-negative integer"});
    }
  }
  if (j.contains("tts")) {
    const auto& t = j["tts"];
    if (!t.is_object() || !t.contains("endpoint") || !t["endpoint"].is_string()) {
      out.push_back({"tts", "needs a string 'endpoint'"});
    } else {
      reject_unknown(t, {"endpoint", "language_map", "timeout_ms"}, "tts.", out);
      audio::HttpTtsConfig tts;
      tts.endpoint = t["endpoint"].get<std::string>();
      if (t.contains("language_map")) {
        try {
          tts.language_map = t["language_map"].get<std::map<std::string, std::string>>();
        } catch (const Json::exception&) {
          out.push_back({"tts.language_map", "must map language tags to strings"});
        }
      }
      if (t.contains("timeout_ms")) {
        if (t["timeout_ms"].is_number_integer() && t["timeout_ms"].get<std::int64_t>() > 0) {
          tts.timeout_ms = t["timeout_ms"].get<std::int64_t>();
        } else {
          out.push_back({"tts.timeout_ms", "must be a positive integer"});
        }
      }
      cfg.tts = std::move(tts);
    }
  }
  if (!out.empty()) throw Error("invalid", "config: " + describe(out));
  return cfg;
}

void apply_env(ServerConfig& cfg) {
  if (const char* dir = std::getenv(kDataDirEnv); dir && *dir) cfg.data_dir = dir;
}

ServerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("not-found", "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error("malformed", path.string() + ": " + e.what());
  }
  auto cfg = parse_config(j);
  if (cfg.data_dir.is_relative()) cfg.data_dir = path.parent_path() / cfg.data_dir;
  apply_env(cfg);
  return cfg;
}

}  // namespace telebrain
