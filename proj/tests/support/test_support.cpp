#include "test_support.hpp"

#include <cstring>
#include <stdexcept>

namespace testsupport {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() / ("tb-test-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

void pad4(std::vector<std::uint8_t>& out) {
  while (out.size() % 4 != 0) out.push_back(0);
}
void osc_string(std::vector<std::uint8_t>& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
  out.push_back(0);
  pad4(out);
}
void be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<std::uint8_t> make_wav(const std::vector<std::int16_t>& samples, int rate,
                                   int channels) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(rate));
  put_u32(out, static_cast<std::uint32_t>(rate * channels * 2));
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  const auto bytes = pcm_bytes(samples);
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

std::vector<std::int16_t> random_pcm(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-32768, 32767);
  std::vector<std::int16_t> out(n);
  for (auto& s : out) s = static_cast<std::int16_t>(d(rng));
  return out;
}

std::vector<std::uint8_t> pcm_bytes(const std::vector<std::int16_t>& samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (auto s : samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::pair<std::size_t, std::size_t> wav_data_chunk(const std::vector<std::uint8_t>& wav) {
  std::size_t pos = 12;
  while (pos + 8 <= wav.size()) {
    const std::uint32_t size = wav[pos + 4] | (wav[pos + 5] << 8) | (wav[pos + 6] << 16) |
                               (static_cast<std::uint32_t>(wav[pos + 7]) << 24);
    if (std::memcmp(&wav[pos], "data", 4) == 0) return {pos + 8, size};
    pos += 8 + size + (size & 1);
  }
  throw std::runtime_error("no data chunk");
}

std::int64_t oracle_ms(std::size_t samples) {
  return static_cast<std::int64_t>((2 * samples * 1000 + 44100) / (2 * 44100));
}

std::vector<std::uint8_t> reference_osc_encode(const std::string& address,
                                               const std::vector<RefArg>& args) {
  std::vector<std::uint8_t> out;
  osc_string(out, address);
  std::string tags = ",";
  for (const auto& a : args) tags += a.tag;
  osc_string(out, tags);
  for (const auto& a : args) {
    switch (a.tag) {
      case 'i':
        be32(out, static_cast<std::uint32_t>(a.i));
        break;
      case 'f': {
        std::uint32_t bits;
        std::memcpy(&bits, &a.f, 4);
        be32(out, bits);
        break;
      }
      case 's':
        osc_string(out, a.s);
        break;
      case 'b':
        be32(out, static_cast<std::uint32_t>(a.b.size()));
        out.insert(out.end(), a.b.begin(), a.b.end());
        pad4(out);
        break;
      default:
        throw std::runtime_error("bad tag");
    }
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

std::vector<OraclePass> oracle_bubble_sort(std::vector<double> values) {
  std::vector<OraclePass> passes;
  while (true) {
    OraclePass pass{{}, true, {}};
    for (std::size_t i = 1; i < values.size(); ++i) {
      bool swapped = false;
      if (values[i - 1] > values[i]) {
        const double t = values[i - 1];
        values[i - 1] = values[i];
        values[i] = t;
        swapped = true;
        pass.flag_up = false;
      }
      pass.comparisons.emplace_back(i - 1, i, swapped);
    }
    pass.order = values;
    passes.push_back(pass);
    if (pass.flag_up) return passes;
  }
}

telebrain::ContentObject audio_object(const std::string& id, std::int64_t duration_ms) {
  telebrain::ContentObject c;
  c.id = id;
  c.name = id;
  c.kind = telebrain::ContentKind::AudioUpload;
  c.blob_id = "blob-" + id;
  c.mime = "audio/wav";
  c.duration_ms = duration_ms;
  return c;
}

telebrain::ContentObject image_object(const std::string& id) {
  telebrain::ContentObject c;
  c.id = id;
  c.name = id;
  c.kind = telebrain::ContentKind::ImageUpload;
  c.blob_id = "blob-" + id;
  c.mime = "image/png";
  return c;
}

telebrain::Role role(const std::string& name, telebrain::CapabilitySet caps) {
  telebrain::Role r;
  r.name = name;
  r.capabilities = caps;
  return r;
}

telebrain::CapabilitySet receive_all() {
  using telebrain::Capability;
  return {Capability::ReceiveText, Capability::ReceiveTtsLive, Capability::ReceiveImage,
          Capability::ReceiveAudio, Capability::ReceiveInterface, Capability::ReceiveOsc};
}

}  // namespace testsupport
