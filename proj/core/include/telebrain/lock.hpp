#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "telebrain/domain.hpp"

namespace telebrain {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Lock with a fresh random 16-byte salt.
LockRecord make_lock(std::string_view passcode);
LockRecord make_lock(std::string_view passcode, std::string salt_hex);

bool verify_passcode(const LockRecord& lock, std::string_view passcode);

}  // namespace telebrain
