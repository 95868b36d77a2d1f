#include "telebrain/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "telebrain/error.hpp"

namespace telebrain::audio {
namespace {

std::uint32_t read_le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t read_le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

void put_le32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(Bytes& out, const char (&tag)[5]) { out.insert(out.end(), tag, tag + 4); }

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return at + 4 <= b.size() && std::memcmp(b.data() + at, tag, 4) == 0;
}

std::int16_t float_to_pcm16(double v) {
  return saturate(static_cast<std::int64_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0)));
}

}  // namespace

std::int64_t samples_to_ms(std::size_t samples) {
  return static_cast<std::int64_t>((samples * 1000 + kSampleRate / 2) / kSampleRate);
}

std::int64_t ms_to_samples(std::int64_t ms) { return ms * kSampleRate / 1000; }

std::int32_t scale_sample(std::int16_t sample, double volume) {
  return static_cast<std::int32_t>(std::round(static_cast<double>(sample) * volume));
}

std::int16_t saturate(std::int64_t v) {
  return static_cast<std::int16_t>(std::clamp<std::int64_t>(v, INT16_MIN, INT16_MAX));
}

// ---------------------------------------------------------------------------

Bytes encode_wav(std::span<const std::int16_t> samples) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  Bytes out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_le32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_le32(out, 16);
  put_le16(out, 1);  // PCM
  put_le16(out, 1);  // mono
  put_le32(out, kSampleRate);
  put_le32(out, kSampleRate * 2);
  put_le16(out, 2);
  put_le16(out, 16);
  put_tag(out, "data");
  put_le32(out, data_bytes);
  for (auto s : samples) put_le16(out, static_cast<std::uint16_t>(s));
  return out;
}

bool looks_like_wav(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 12 && tag_is(bytes, 0, "RIFF") && tag_is(bytes, 8, "WAVE");
}

Pcm decode_wav(std::span<const std::uint8_t> bytes) {
  if (!looks_like_wav(bytes)) throw Error("bad-audio", "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_fmt = false, have_data = false;

  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const auto size = read_le32(bytes, at + 4);
    const auto body = at + 8;
    if (size > bytes.size() - body) {
      // Streams written before their length was known: take what is there.
      if (tag_is(bytes, at, "data")) {
        data = bytes.subspan(body);
        have_data = true;
      }
      break;
    }
    if (tag_is(bytes, at, "fmt ")) {
      if (size < 16) throw Error("bad-audio", "fmt chunk too short");
      format = read_le16(bytes, body);
      channels = read_le16(bytes, body + 2);
      rate = read_le32(bytes, body + 4);
      bits = read_le16(bytes, body + 14);
      if (format == 0xFFFE) {
        if (size < 26) throw Error("bad-audio", "extensible fmt chunk too short");
        format = read_le16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, at, "data")) {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    at = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw Error("bad-audio", "WAV lacks fmt or data chunk");
  if (channels == 0 || rate == 0) throw Error("bad-audio", "WAV has zero channels or rate");

  const bool is_float = format == 3;
  if (!(format == 1 || is_float)) {
    throw Error("bad-audio", "unsupported WAV encoding " + std::to_string(format));
  }
  if (is_float ? (bits != 32 && bits != 64) : (bits != 8 && bits != 16 && bits != 24 && bits != 32)) {
    throw Error("bad-audio", "unsupported WAV sample width " + std::to_string(bits));
  }

  const std::size_t width = bits / 8;
  const std::size_t frame = width * channels;
  const std::size_t frames = data.size() / frame;

  auto sample_at = [&](std::size_t offset) -> double {
    const auto* p = data.data() + offset;
    if (is_float) {
      if (bits == 32) {
        float f;
        std::memcpy(&f, p, 4);
        return f;
      }
      double d;
      std::memcpy(&d, p, 8);
      return d;
    }
    switch (bits) {
      case 8:
        return (static_cast<int>(p[0]) - 128) / 128.0;
      case 16:
        return static_cast<std::int16_t>(p[0] | p[1] << 8) / 32768.0;
      case 24: {
        std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
        if (v & 0x800000) v -= 0x1000000;
        return v / 8388608.0;
      }
      default: {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v / 2147483648.0;
      }
    }
  };

  Pcm mono;
  mono.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    if (!is_float && bits == 16 && channels == 1) {
      const auto* p = data.data() + f * 2;
      mono.push_back(static_cast<std::int16_t>(p[0] | p[1] << 8));
      continue;
    }
    double acc = 0;
    for (std::size_t c = 0; c < channels; ++c) acc += sample_at(f * frame + c * width);
    mono.push_back(float_to_pcm16(acc / channels));
  }
  if (rate != kSampleRate) return resample_linear(mono, static_cast<int>(rate), kSampleRate);
  return mono;
}

Pcm resample_linear(std::span<const std::int16_t> in, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw Error("bad-audio", "sample rates must be positive");
  if (from_rate == to_rate || in.empty()) return Pcm(in.begin(), in.end());
  const auto out_len = static_cast<std::size_t>(
      static_cast<std::uint64_t>(in.size()) * static_cast<std::uint64_t>(to_rate) /
      static_cast<std::uint64_t>(from_rate));
  Pcm out(out_len);
  const double step = static_cast<double>(from_rate) / to_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = i * step;
    const auto left = static_cast<std::size_t>(pos);
    const auto right = std::min(left + 1, in.size() - 1);
    const double frac = pos - static_cast<double>(left);
    const double v = in[left] + (in[right] - in[left]) * frac;
    out[i] = saturate(std::lround(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MPEG audio frame scanning

namespace {

struct MpegFrame {
  std::size_t length = 0;
  int samples = 0;
  int rate = 0;
};

std::optional<MpegFrame> parse_mpeg_header(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 4 > b.size()) return std::nullopt;
  if (b[at] != 0xFF || (b[at + 1] & 0xE0) != 0xE0) return std::nullopt;
  const int version = (b[at + 1] >> 3) & 3;  // 0: 2.5, 1: reserved, 2: 2, 3: 1
  const int layer = (b[at + 1] >> 1) & 3;    // 1: III, 2: II, 3: I
  const int bitrate_idx = b[at + 2] >> 4;
  const int rate_idx = (b[at + 2] >> 2) & 3;
  const int padding = (b[at + 2] >> 1) & 1;
  if (version == 1 || layer == 0 || bitrate_idx == 0 || bitrate_idx == 15 || rate_idx == 3) {
    return std::nullopt;
  }

  static constexpr int kBitrates[5][15] = {
      {0, 32, 64, 96, 128, 160, 192, 224, 256, 288, 320, 352, 384, 416, 448},  // v1 L1
      {0, 32, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320, 384},     // v1 L2
      {0, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320},      // v1 L3
      {0, 32, 48, 56, 64, 80, 96, 112, 128, 144, 160, 176, 192, 224, 256},     // v2 L1
      {0, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160},          // v2 L2/L3
  };
  static constexpr int kRates[3][3] = {{44100, 48000, 32000}, {22050, 24000, 16000},
                                       {11025, 12000, 8000}};

  const bool v1 = version == 3;
  const int layer_no = 4 - layer;  // 1, 2, 3
  const int row = v1 ? layer_no - 1 : (layer_no == 1 ? 3 : 4);
  const int bitrate = kBitrates[row][bitrate_idx] * 1000;
  const int rate = kRates[v1 ? 0 : (version == 2 ? 1 : 2)][rate_idx];

  MpegFrame f;
  f.rate = rate;
  if (layer_no == 1) {
    f.samples = 384;
    f.length = static_cast<std::size_t>((12 * bitrate / rate + padding) * 4);
  } else if (layer_no == 2 || v1) {
    f.samples = 1152;
    f.length = static_cast<std::size_t>(144 * bitrate / rate + padding);
  } else {
    f.samples = 576;
    f.length = static_cast<std::size_t>(72 * bitrate / rate + padding);
  }
  if (f.length < 4) return std::nullopt;
  return f;
}

std::size_t skip_id3v2(std::span<const std::uint8_t> b) {
  if (b.size() < 10 || std::memcmp(b.data(), "ID3", 3) != 0) return 0;
  const std::size_t size = (b[6] & 0x7F) << 21 | (b[7] & 0x7F) << 14 | (b[8] & 0x7F) << 7 |
                           (b[9] & 0x7F);
  const std::size_t footer = (b[5] & 0x10) ? 10 : 0;
  return 10 + size + footer;
}

}  // namespace

bool looks_like_mp3(std::span<const std::uint8_t> bytes) {
  return parse_mpeg_header(bytes, std::min(skip_id3v2(bytes), bytes.size())).has_value();
}

std::optional<std::int64_t> mp3_duration_ms(std::span<const std::uint8_t> bytes) {
  std::size_t at = skip_id3v2(bytes);
  std::uint64_t total_samples = 0;
  int rate = 0;
  while (auto frame = parse_mpeg_header(bytes, at)) {
    if (at + frame->length > bytes.size()) break;
    if (rate == 0) rate = frame->rate;
    total_samples += static_cast<std::uint64_t>(frame->samples);
    at += frame->length;
  }
  if (rate == 0 || total_samples == 0) return std::nullopt;
  return static_cast<std::int64_t>((total_samples * 1000 + rate / 2) / rate);
}

// ---------------------------------------------------------------------------

SentenceRender concatenate_sentence(std::span<const AudioClip> members) {
  if (members.empty()) throw Error("empty-sentence", "an audio sentence needs at least one member");

  SentenceRender out;
  std::size_t total = 0;
  for (const auto& m : members) {
    if (m.samples.empty()) throw Error("zero-duration", "member '" + m.id + "' has no samples");
    total += m.samples.size();
  }
  out.pcm.reserve(total);

  std::int64_t ms = 0;
  for (const auto& m : members) {
    out.member_ids.push_back(m.id);
    out.offsets_ms.push_back(ms);
    out.offsets_samples.push_back(static_cast<std::int64_t>(out.pcm.size()));
    out.pcm.insert(out.pcm.end(), m.samples.begin(), m.samples.end());
    ms += samples_to_ms(m.samples.size());
  }
  out.total_duration_ms = ms;
  return out;
}

std::span<const std::int16_t> slice_member(const SentenceRender& render, std::size_t k) {
  if (k >= render.offsets_samples.size()) throw Error("out-of-range", "no such sentence member");
  const auto begin = static_cast<std::size_t>(render.offsets_samples[k]);
  const auto end = k + 1 < render.offsets_samples.size()
                       ? static_cast<std::size_t>(render.offsets_samples[k + 1])
                       : render.pcm.size();
  return std::span(render.pcm).subspan(begin, end - begin);
}

LayerRender mix_layers(std::span<const LayerInput> entries) {
  if (entries.empty()) throw Error("empty-layer", "an audio layer needs at least one entry");

  std::size_t length = 0;
  std::int64_t duration = 0;
  for (const auto& e : entries) {
    if (!(e.volume >= 0.0 && e.volume <= 1.0)) {
      throw Error("invalid-volume", "volume for '" + e.id + "' must be in [0,1]");
    }
    if (e.start_ms < 0) throw Error("invalid-start", "start time for '" + e.id + "' is negative");
    const auto start = static_cast<std::size_t>(ms_to_samples(e.start_ms));
    length = std::max(length, start + e.samples.size());
    duration = std::max(duration, e.start_ms + samples_to_ms(e.samples.size()));
  }

  std::vector<std::int64_t> acc(length, 0);
  for (const auto& e : entries) {
    const auto start = static_cast<std::size_t>(ms_to_samples(e.start_ms));
    for (std::size_t i = 0; i < e.samples.size(); ++i) {
      acc[start + i] += scale_sample(e.samples[i], e.volume);
    }
  }

  LayerRender out;
  out.duration_ms = duration;
  out.pcm.resize(length);
  std::transform(acc.begin(), acc.end(), out.pcm.begin(), saturate);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (n == 0 || i + n > text.size()) throw Error("bad-text", "text is not valid UTF-8");
    for (std::size_t k = 1; k < n; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        throw Error("bad-text", "text is not valid UTF-8");
      }
    }
    i += n;
    ++count;
  }
  return count;
}

namespace {

std::vector<char32_t> code_points(std::string_view text) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
    char32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; k < n; ++k) cp = cp << 6 | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    out.push_back(cp);
    i += n;
  }
  return out;
}

}  // namespace

double ToneStubTts::frequency_for(char32_t code_point) {
  return 220.0 + static_cast<double>(code_point % 64) * 20.0;
}

Pcm ToneStubTts::render(std::string_view text, std::string_view /*language*/) {
  utf8_length(text);  // validates
  const auto cps = code_points(text);
  Pcm out;
  out.reserve(cps.size() * kToneSamples);
  for (char32_t cp : cps) {
    const double w = 2.0 * std::numbers::pi * frequency_for(cp) / kSampleRate;
    for (int n = 0; n < kToneSamples; ++n) {
      out.push_back(static_cast<std::int16_t>(std::lround(kAmplitude * std::sin(w * n))));
    }
  }
  return out;
}

TtsRender render_tts(std::string_view text, std::string_view language, TtsAdapter& adapter) {
  const auto length = utf8_length(text);
  if (length == 0) throw Error("text-empty", "text-to-speech text must not be empty");
  if (length > kMaxTtsChars) {
    throw Error("text-too-long", "text-to-speech text is limited to 100 characters, got " +
                                     std::to_string(length));
  }
  Pcm pcm;
  try {
    pcm = adapter.render(text, language);
  } catch (const Error& e) {
    throw Error("tts-failed", adapter.name() + " adapter: " + e.what());
  } catch (const std::exception& e) {
    throw Error("tts-failed", adapter.name() + " adapter: " + e.what());
  }
  if (pcm.empty()) throw Error("tts-failed", adapter.name() + " adapter returned no audio");
  TtsRender r;
  r.duration_ms = samples_to_ms(pcm.size());
  r.pcm = std::move(pcm);
  return r;
}

}  // namespace telebrain::audio
