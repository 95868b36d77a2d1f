#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace telebrain {

/// Failure carrying a stable, machine-readable code ("locked", "not-found",
/// "text-too-long", ...). The code is what crosses process and wire
/// boundaries; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace telebrain
