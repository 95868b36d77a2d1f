#pragma once

// Shared fixtures and independent reference implementations ("oracles")
// used by the unit and acceptance tests. Nothing here calls into the code
// under test except where a fixture needs to build inputs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "telebrain/catalog.hpp"
#include "telebrain/domain.hpp"

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// --- Audio ------------------------------------------------------------------

/// Minimal RIFF writer for 16-bit PCM, written from the format description
/// rather than from the production encoder.
std::vector<std::uint8_t> make_wav(const std::vector<std::int16_t>& samples, int rate = 44100,
                                   int channels = 1);
std::vector<std::int16_t> random_pcm(std::mt19937_64& rng, std::size_t n);
/// Little-endian bytes of samples.
std::vector<std::uint8_t> pcm_bytes(const std::vector<std::int16_t>& samples);
/// Offset of the first byte of the "data" chunk payload, and its size.
std::pair<std::size_t, std::size_t> wav_data_chunk(const std::vector<std::uint8_t>& wav);
/// round-half-up(samples * 1000 / 44100), integer arithmetic only.
std::int64_t oracle_ms(std::size_t samples);

// --- OSC --------------------------------------------------------------------

struct RefArg {
  char tag;  // 'i', 'f', 's', 'b'
  std::int32_t i = 0;
  float f = 0;
  std::string s;
  std::vector<std::uint8_t> b;
};

/// Byte-level OSC 1.0 encoder following the published layout: padded
/// address, padded ",tags", then big-endian int32/float32, padded strings
/// and size-prefixed padded blobs.
std::vector<std::uint8_t> reference_osc_encode(const std::string& address,
                                               const std::vector<RefArg>& args);
std::vector<std::uint8_t> from_hex(const std::string& hex);
std::string to_hex(const std::vector<std::uint8_t>& bytes);

// --- Bubble sort ------------------------------------------------------------

struct OraclePass {
  std::vector<std::tuple<std::size_t, std::size_t, bool>> comparisons;
  bool flag_up;
  std::vector<double> order;
};

/// Textbook bubble sort over full passes, logging each comparison; stops
/// after the first pass without a swap.
std::vector<OraclePass> oracle_bubble_sort(std::vector<double> values);

// --- Domain fixtures ----------------------------------------------------------

telebrain::ContentObject audio_object(const std::string& id, std::int64_t duration_ms = 1000);
telebrain::ContentObject image_object(const std::string& id);
telebrain::Role role(const std::string& name, telebrain::CapabilitySet caps);
telebrain::CapabilitySet receive_all();

}  // namespace testsupport
