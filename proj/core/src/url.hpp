#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace telebrain::detail {

struct Url {
  std::string scheme;  // lower-case
  std::string host;
  int port = 0;
  std::string path;  // includes query, always starts with '/'

  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }
};

inline std::optional<Url> parse_url(std::string_view text) {
  Url u;
  const auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  for (char c : text.substr(0, sep)) {
    u.scheme.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  }
  auto rest = text.substr(sep + 3);
  if (u.scheme == "file") {
    u.path = std::string(rest);
    return u.path.empty() ? std::nullopt : std::optional(u);
  }
  const auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (authority.empty()) return std::nullopt;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    u.host = std::string(authority.substr(0, colon));
    try {
      u.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (...) {
      return std::nullopt;
    }
  } else {
    u.host = std::string(authority);
    u.port = u.scheme == "https" ? 443 : 80;
  }
  if (u.host.empty() || u.port <= 0 || u.port > 65535) return std::nullopt;
  return u;
}

}  // namespace telebrain::detail
