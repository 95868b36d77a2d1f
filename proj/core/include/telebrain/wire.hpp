#pragma once

// Client <-> server frames: UTF-8 JSON text, one message per frame.
//
//   {"type": "<tag>", "seq": <uint>, "payload": {...}, ...}
//
// Top-level fields other than type/seq/payload are kept verbatim so newer
// peers can add them without breaking older ones.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "telebrain/domain.hpp"
#include "telebrain/error.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/timing.hpp"
#include "telebrain/venue_runtime.hpp"

namespace telebrain::wire {

enum class MessageType {
  Join,
  JoinAck,
  Leave,
  RosterUpdate,
  Cue,
  CueAck,
  ClockPing,
  ClockPong,
  ActivityUpdate,
  SendRequest,
  Error,
  FunctionalityChange,
  TestToggle,
};

inline constexpr std::array kAllMessageTypes{
    MessageType::Join,         MessageType::JoinAck,        MessageType::Leave,
    MessageType::RosterUpdate, MessageType::Cue,            MessageType::CueAck,
    MessageType::ClockPing,    MessageType::ClockPong,      MessageType::ActivityUpdate,
    MessageType::SendRequest,  MessageType::Error,          MessageType::FunctionalityChange,
    MessageType::TestToggle,
};

std::string_view to_string(MessageType t);
std::optional<MessageType> message_type_from_string(std::string_view tag);

struct WireMessage {
  MessageType type = MessageType::Error;
  std::uint64_t seq = 0;
  Json payload = Json::object();
  Json extra = Json::object();  // unknown top-level fields

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

/// Compact JSON with keys in sorted order, so equal messages give equal bytes.
std::string serialize(const WireMessage& msg);
/// Throws Error("malformed") or Error("unknown-type").
WireMessage deserialize(std::string_view frame);

/// Outgoing sequence numbers for one connection and direction: 1, 2, 3...
class SeqCounter {
 public:
  std::uint64_t next() { return ++last_; }
  std::uint64_t last() const { return last_; }

 private:
  std::uint64_t last_ = 0;
};

/// Receiver-side check of a peer's sequence numbers (expected start: 1).
class SeqTracker {
 public:
  enum class Verdict { InOrder, Gap, Regression };

  struct Observation {
    Verdict verdict = Verdict::InOrder;
    std::uint64_t expected = 0;
    std::uint64_t got = 0;
    std::uint64_t missing = 0;  // gap size
  };

  Observation observe(std::uint64_t seq);
  std::uint64_t expected() const { return next_; }
  std::size_t gaps() const { return gaps_; }

 private:
  std::uint64_t next_ = 1;
  std::size_t gaps_ = 0;
};

// ---------------------------------------------------------------------------
// Payload codecs. Each *_payload builds the JSON object for one message
// type; parse_* reads the client->server ones and throws
// Error("missing-field") or Error("malformed").

struct JoinPayload {
  std::string performance;
  std::string nickname;
  std::string role;
  std::optional<std::string> passcode;
  std::optional<std::string> local_ip;
  std::optional<std::string> venue;  // set to start a new performance
  std::optional<timing::Millis> t0;  // client clock at send, for the first clock_pong
};

struct SendRequestPayload {
  Designation designation;
  std::optional<std::string> content_id;
  std::optional<std::string> text;       // live text
  std::optional<std::string> tts_text;   // live text-to-speech
  std::string language = "en";
  std::optional<osc::Message> osc;
};

struct FunctionalityPayload {
  std::optional<std::string> role;     // change own role
  std::optional<std::string> target;   // performer whose flags change (default: self)
  std::optional<CapabilitySet> capabilities;
};

struct CueAckPayload {
  std::string cue_id;
  bool late = false;
  std::optional<timing::Millis> fired_at;  // server time
  std::optional<std::string> error;
};

Json join_payload(const JoinPayload& p);
JoinPayload parse_join(const Json& payload);

Json send_request_payload(const SendRequestPayload& p);
SendRequestPayload parse_send_request(const Json& payload);

Json functionality_payload(const FunctionalityPayload& p);
FunctionalityPayload parse_functionality(const Json& payload);

Json cue_ack_payload(const CueAckPayload& p);
CueAckPayload parse_cue_ack(const Json& payload);

Json designation_json(const Designation& d);
Designation parse_designation(const Json& j);

Json osc_message_json(const osc::Message& m);
osc::Message parse_osc_message(const Json& j);

Json roster_json(const runtime::Performance& perf);
Json clock_pong_payload(timing::Millis t0, timing::Millis t1, timing::Millis t2);
Json join_ack_payload(const runtime::Performance& perf, const runtime::Performer& me,
                      const Json& clock_pong);
Json roster_update_payload(const runtime::Performance& perf);
Json activity_payload(const runtime::ActivityEntry& e, std::string_view scope);
Json error_payload(std::string_view code, std::string_view message,
                   const std::vector<runtime::Rejection>& reasons = {},
                   std::optional<std::uint64_t> ref_seq = std::nullopt);

/// Media is never inlined: blobs travel as "<blob_prefix><blob id>".
Json cue_payload(const runtime::CueEnvelope& env, const runtime::Delivery& d,
                 std::string_view blob_prefix = "/blob/");

}  // namespace telebrain::wire
