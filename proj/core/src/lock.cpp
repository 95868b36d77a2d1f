#include "telebrain/lock.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <vector>

#include "telebrain/error.hpp"

namespace telebrain {
namespace {

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("internal", "SHA-256 digest failed");
  }
  return to_hex(std::span(md.data(), len));
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

LockRecord make_lock(std::string_view passcode) {
  std::array<std::uint8_t, 16> salt{};
  if (RAND_bytes(salt.data(), static_cast<int>(salt.size())) != 1) {
    throw Error("internal", "no entropy for passcode salt");
  }
  return make_lock(passcode, to_hex(salt));
}

LockRecord make_lock(std::string_view passcode, std::string salt_hex) {
  if (passcode.empty()) throw Error("invalid", "passcode must not be empty");
  LockRecord rec;
  rec.digest = sha256_hex(salt_hex + std::string(passcode));
  rec.salt = std::move(salt_hex);
  return rec;
}

bool verify_passcode(const LockRecord& lock, std::string_view passcode) {
  const auto candidate = sha256_hex(lock.salt + std::string(passcode));
  return candidate.size() == lock.digest.size() &&
         CRYPTO_memcmp(candidate.data(), lock.digest.data(), candidate.size()) == 0;
}

}  // namespace telebrain
