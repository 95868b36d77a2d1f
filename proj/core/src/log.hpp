#pragma once

#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace telebrain::detail {

// Diagnostics go to stderr through the "telebrain" logger. An application
// that registers a logger under that name first keeps control of it.
inline std::shared_ptr<spdlog::logger> logger() {
  static const auto instance = [] {
    if (auto existing = spdlog::get("telebrain")) return existing;
    return spdlog::stderr_color_mt("telebrain");
  }();
  return instance;
}

}  // namespace telebrain::detail
