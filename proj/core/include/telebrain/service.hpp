#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "telebrain/content_store.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/timing.hpp"
#include "telebrain/venue_runtime.hpp"
#include "telebrain/wire.hpp"

namespace telebrain::server {

using runtime::ConnectionId;

/// A frame to write to one connection.
struct Outbound {
  ConnectionId to = 0;
  std::string frame;
  bool close = false;  // close after writing (protocol violation)
};

/// Protocol state machine behind the WebSocket endpoint. It never touches a
/// socket: the transport feeds it frames and writes back what it returns,
/// which is how tests drive whole sessions without a network.
///
/// Not internally sharded: the transport calls it from one thread at a time
/// (the mutex only guards against accidental concurrent use).
class StageService {
 public:
  struct Options {
    timing::Millis default_delay_budget_ms = timing::kDefaultDelayBudgetMs;
    int utc_offset_minutes = 0;
    std::uint16_t osc_send_port = osc::kDefaultSendPort;
    std::optional<std::uint64_t> seed;
    std::string blob_prefix = "/blob/";
    int malformed_limit = 3;  // consecutive malformed frames before closing
  };
  using OscSink = std::function<void(const osc::Endpoint&, const osc::Message&)>;

  struct AckStats {
    std::size_t acks = 0;
    std::size_t late = 0;
    std::size_t errors = 0;
  };

  StageService(ContentStore& store, const timing::Clock& clock, Options options,
               OscSink osc_sink = {});

  void connect(ConnectionId c);
  std::vector<Outbound> on_frame(ConnectionId c, std::string_view text);
  std::vector<Outbound> disconnect(ConnectionId c);
  /// Inbound OSC: every literal-address binding fires in every live performance.
  std::vector<Outbound> on_osc(const osc::Message& msg);

  /// Body of GET /performances.
  Json performances() const;
  AckStats ack_stats() const;

 private:
  struct Connection {
    wire::SeqTracker in;
    wire::SeqCounter out;
    std::optional<std::string> performance;
    std::string nickname;
    int malformed = 0;
  };

  Outbound frame(ConnectionId to, wire::MessageType type, Json payload);
  Outbound error_frame(ConnectionId to, const Error& e, std::optional<std::uint64_t> ref_seq);
  void broadcast(const runtime::Performance& perf, wire::MessageType type, const Json& payload,
                 std::vector<Outbound>& out, std::optional<ConnectionId> except = std::nullopt);
  runtime::Performance& performance_of(const Connection& c);
  Venue lookup_venue(const std::string& name_or_id) const;

  void handle(ConnectionId id, Connection& c, const wire::WireMessage& msg,
              std::vector<Outbound>& out);
  void on_join(ConnectionId id, Connection& c, const Json& payload, std::vector<Outbound>& out);
  void on_leave(ConnectionId id, Connection& c, std::vector<Outbound>& out);
  void on_send(Connection& c, const Json& payload, std::vector<Outbound>& out);
  void on_functionality(Connection& c, const Json& payload, std::vector<Outbound>& out);
  void on_test_toggle(ConnectionId id, Connection& c, const Json& payload,
                      std::vector<Outbound>& out);
  void deliver(runtime::Performance& perf, const runtime::DispatchResult& result,
               const runtime::Outgoing& what, std::vector<Outbound>& out);

  ContentStore& store_;
  const timing::Clock& clock_;
  Options options_;
  OscSink osc_sink_;
  runtime::PerformanceRegistry registry_;
  std::map<ConnectionId, Connection> connections_;
  AckStats acks_;
  mutable std::recursive_mutex mutex_;
};

}  // namespace telebrain::server
