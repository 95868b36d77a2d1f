#pragma once

// OSC 1.0 messages (no bundles): codec, literal-address inbound bindings and
// a UDP sender for outbound traffic to performers' local addresses.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "telebrain/domain.hpp"
#include "telebrain/error.hpp"

namespace telebrain::osc {

inline constexpr std::uint16_t kDefaultListenPort = 57121;
inline constexpr std::uint16_t kDefaultSendPort = 57120;

struct Blob {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const Blob&, const Blob&) = default;
};

using Argument = std::variant<std::int32_t, float, std::string, Blob>;

struct Message {
  std::string address;
  std::vector<Argument> args;

  /// Floats compare by bit pattern so NaN payloads round-trip as equal.
  friend bool operator==(const Message& a, const Message& b);
};

char type_tag(const Argument& arg);

class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& message)
      : Error("osc-decode", message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Throws Error("osc-invalid") for an address not starting with '/' or a
/// string containing NUL.
std::vector<std::uint8_t> encode(const Message& msg);
/// Throws DecodeError on malformed or truncated input or unknown type tags.
Message decode(std::span<const std::uint8_t> bytes);

// --- Bindings -------------------------------------------------------------

struct InboundAction {
  std::string target_id;
  Designation designation;
  friend bool operator==(const InboundAction&, const InboundAction&) = default;
};

/// Literal address matching; several bindings on one address fire in the
/// order they were registered.
class Router {
 public:
  using TargetCheck = std::function<bool(const std::string&)>;

  Router() = default;
  explicit Router(TargetCheck target_exists) : target_exists_(std::move(target_exists)) {}

  /// Throws Error("osc-invalid") for a bad address, Error("not-found") when
  /// the target does not resolve.
  void bind(const std::string& address, InboundAction action);
  std::vector<InboundAction> dispatch(const Message& msg);

  std::size_t binding_count() const { return bindings_.size(); }
  const std::vector<std::string>& dropped() const { return dropped_; }

 private:
  TargetCheck target_exists_;
  std::vector<std::pair<std::string, InboundAction>> bindings_;
  std::vector<std::string> dropped_;
};

// --- UDP ------------------------------------------------------------------

struct Endpoint {
  std::string host;
  std::uint16_t port = kDefaultSendPort;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Throws Error("no-local-ip") when the performer registered no local address.
Endpoint outbound_endpoint(const std::optional<std::string>& local_ip, std::uint16_t port);

class UdpSender {
 public:
  UdpSender();
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;

  /// Throws Error("osc-send") on resolution or socket failure.
  void send(const Endpoint& to, const Message& msg);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace telebrain::osc
