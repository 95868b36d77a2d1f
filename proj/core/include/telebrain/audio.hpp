#pragma once

// PCM handling for the stage server: WAV codec, sentence concatenation with
// offset tables, layer mixing, and text-to-speech adapters.
//
// Everything inside the pipeline is 16-bit mono PCM at 44100 Hz. Inputs at
// other rates or channel counts are normalized at ingestion (decode_wav);
// the render functions themselves never resample.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace telebrain::audio {

inline constexpr int kSampleRate = 44100;
inline constexpr std::size_t kMaxTtsChars = 100;

using Pcm = std::vector<std::int16_t>;
using Bytes = std::vector<std::uint8_t>;

/// Sample count to milliseconds, rounding half up.
std::int64_t samples_to_ms(std::size_t samples);
/// Milliseconds to the first sample at or after that instant's floor.
std::int64_t ms_to_samples(std::int64_t ms);

/// Scale one sample by a linear volume, rounding half away from zero.
std::int32_t scale_sample(std::int16_t sample, double volume);
std::int16_t saturate(std::int64_t v);

// --- WAV / MP3 ------------------------------------------------------------

/// RIFF PCM16 mono 44100 Hz.
Bytes encode_wav(std::span<const std::int16_t> samples);

/// Decodes PCM (8/16/24/32-bit) or IEEE float WAV of any channel count and
/// sample rate into 16-bit mono at kSampleRate. Throws Error("bad-audio").
Pcm decode_wav(std::span<const std::uint8_t> bytes);

bool looks_like_wav(std::span<const std::uint8_t> bytes);
bool looks_like_mp3(std::span<const std::uint8_t> bytes);

/// Duration of an MPEG audio stream measured from its frame headers, or
/// nullopt when no valid frame is found.
std::optional<std::int64_t> mp3_duration_ms(std::span<const std::uint8_t> bytes);

Pcm resample_linear(std::span<const std::int16_t> in, int from_rate, int to_rate);

// --- Sentences ------------------------------------------------------------

struct AudioClip {
  std::string id;
  std::span<const std::int16_t> samples;
};

struct SentenceRender {
  std::vector<std::string> member_ids;
  std::vector<std::int64_t> offsets_ms;       // prefix sums of member durations
  std::vector<std::int64_t> offsets_samples;  // exact slice points into pcm
  std::int64_t total_duration_ms = 0;
  Pcm pcm;
};

/// Concatenates member PCM in order. Throws Error("empty-sentence") for no
/// members and Error("zero-duration") for a silent-length member.
SentenceRender concatenate_sentence(std::span<const AudioClip> members);

/// Recovers member k's samples from a rendered sentence.
std::span<const std::int16_t> slice_member(const SentenceRender& render, std::size_t k);

// --- Layers ---------------------------------------------------------------

struct LayerInput {
  std::string id;
  std::span<const std::int16_t> samples;
  std::int64_t start_ms = 0;
  double volume = 1.0;
};

struct LayerRender {
  Pcm pcm;
  std::int64_t duration_ms = 0;  // max(start + duration) over entries
};

/// out[t] = clamp(sum_i round(volume_i * s_i[t - start_i])), silence outside
/// each entry's span. Throws Error("invalid-volume") / Error("empty-layer").
LayerRender mix_layers(std::span<const LayerInput> entries);

// --- Text to speech -------------------------------------------------------

/// Number of Unicode scalar values in a UTF-8 string. Throws on malformed UTF-8.
std::size_t utf8_length(std::string_view text);

class TtsAdapter {
 public:
  virtual ~TtsAdapter() = default;
  /// 16-bit mono PCM at kSampleRate.
  virtual Pcm render(std::string_view text, std::string_view language) = 0;
  virtual bool deterministic() const = 0;
  virtual std::string name() const = 0;
};

/// Offline adapter: each character becomes a 50 ms sine tone whose
/// frequency is derived from its code point. No network, fully repeatable.
class ToneStubTts final : public TtsAdapter {
 public:
  static constexpr int kToneMs = 50;
  static constexpr int kToneSamples = kSampleRate * kToneMs / 1000;
  static constexpr double kAmplitude = 8000.0;

  static double frequency_for(char32_t code_point);

  Pcm render(std::string_view text, std::string_view language) override;
  bool deterministic() const override { return true; }
  std::string name() const override { return "tone-stub"; }
};

struct HttpTtsConfig {
  std::string endpoint;                             // http://host:port/path
  std::map<std::string, std::string> language_map;  // tag -> service voice/language
  std::int64_t timeout_ms = 2000;
};

/// POSTs {"text","language"} as JSON and expects a WAV body back.
class HttpTtsAdapter final : public TtsAdapter {
 public:
  explicit HttpTtsAdapter(HttpTtsConfig config);

  Pcm render(std::string_view text, std::string_view language) override;
  bool deterministic() const override { return false; }
  std::string name() const override { return "http"; }

 private:
  HttpTtsConfig config_;
};

struct TtsRender {
  Pcm pcm;
  std::int64_t duration_ms = 0;
};

/// Validates the text (1..100 characters) before calling the adapter and
/// wraps adapter failures as Error("tts-failed") with the adapter diagnostic.
TtsRender render_tts(std::string_view text, std::string_view language, TtsAdapter& adapter);

}  // namespace telebrain::audio
