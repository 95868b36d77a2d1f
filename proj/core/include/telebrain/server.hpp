#pragma once

#include <cstdint>
#include <memory>

#include "telebrain/config.hpp"

namespace telebrain::server {

/// HTTP + WebSocket front end and the OSC UDP listener, all on one I/O
/// thread:
///   GET /performances   live performance list (JSON)
///   GET /blob/<id>      media bytes
///   WS  /perform        wire-protocol session
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds sockets; after this the ports below are final (a configured 0
  /// picks an ephemeral port).
  void start();
  /// Runs the I/O loop until stop().
  void run();
  /// Thread-safe.
  void stop();

  std::uint16_t http_port() const;
  std::uint16_t osc_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace telebrain::server
