// Outbound HTTP: web media fetches and the network TTS adapter.
#include <httplib.h>

#include <fstream>

#include "telebrain/audio.hpp"
#include "telebrain/content_store.hpp"
#include "url.hpp"

namespace telebrain {

namespace {

httplib::Client make_client(const detail::Url& url, std::int64_t timeout_ms) {
  httplib::Client cli(url.host, url.port);
  const auto sec = static_cast<time_t>(timeout_ms / 1000);
  const auto usec = static_cast<time_t>((timeout_ms % 1000) * 1000);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  cli.set_follow_location(true);
  return cli;
}

}  // namespace

FetchResult HttpFetcher::fetch(const std::string& url) {
  const auto parsed = detail::parse_url(url);
  if (!parsed) throw Error("unreachable", "malformed URL '" + url + "'");

  if (parsed->scheme == "file") {
    std::ifstream in(parsed->path, std::ios::binary);
    if (!in) throw Error("unreachable", "cannot open " + parsed->path);
    FetchResult r;
    r.status = 200;
    r.body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
  }
  if (parsed->scheme != "http") {
    throw Error("unreachable", "unsupported URL scheme '" + parsed->scheme + "' (use http or file)");
  }

  auto cli = make_client(*parsed, timeout_ms_);
  auto res = cli.Get(parsed->path);
  if (!res) {
    throw Error("unreachable", url + ": " + httplib::to_string(res.error()));
  }
  FetchResult r;
  r.status = res->status;
  r.content_type = res->get_header_value("Content-Type");
  r.body.assign(res->body.begin(), res->body.end());
  return r;
}

namespace audio {

HttpTtsAdapter::HttpTtsAdapter(HttpTtsConfig config) : config_(std::move(config)) {
  if (!detail::parse_url(config_.endpoint)) {
    throw Error("invalid", "TTS endpoint '" + config_.endpoint + "' is not a URL");
  }
  if (config_.timeout_ms <= 0) throw Error("invalid", "TTS timeout must be > 0");
}

// POST {"text": ..., "language": ...} and expect a WAV body back.
Pcm HttpTtsAdapter::render(std::string_view text, std::string_view language) {
  const auto url = *detail::parse_url(config_.endpoint);
  if (url.scheme != "http") throw Error("tts-failed", "TTS endpoint must be http://");
  std::string voice(language);
  if (auto it = config_.language_map.find(voice); it != config_.language_map.end()) {
    voice = it->second;
  }
  const Json body{{"text", std::string(text)}, {"language", voice}};

  auto cli = make_client(url, config_.timeout_ms);
  auto res = cli.Post(url.path, body.dump(), "application/json");
  if (!res) throw Error("tts-failed", "TTS service: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error("tts-failed", "TTS service answered HTTP " + std::to_string(res->status) + ": " +
                                  res->body.substr(0, 200));
  }
  const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
  if (!looks_like_wav(bytes)) throw Error("tts-failed", "TTS service did not return WAV audio");
  return decode_wav(bytes);
}

}  // namespace audio
}  // namespace telebrain
