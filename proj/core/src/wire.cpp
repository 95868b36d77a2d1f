#include "telebrain/wire.hpp"

#include <algorithm>

namespace telebrain::wire {

namespace {

constexpr std::array<std::string_view, kAllMessageTypes.size()> kTags{
    "join",         "join_ack",  "leave",      "roster_update",  "cue",
    "cue_ack",      "clock_ping", "clock_pong", "activity_update", "send_request",
    "error",        "functionality_change",    "test_toggle",
};

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    throw Error("missing-field", std::string("payload needs '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const Json::exception&) {
    throw Error("malformed", std::string("payload field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key);
}

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::vector<std::uint8_t> unhex(const std::string& s) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (s.size() % 2) throw Error("malformed", "blob hex has odd length");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    const int hi = nibble(s[i]);
    const int lo = nibble(s[i + 1]);
    if (hi < 0 || lo < 0) throw Error("malformed", "blob is not hex");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

CapabilitySet parse_caps(const Json& j) {
  CapabilitySet caps;
  if (j.is_object()) {
    for (const auto& [token, on] : j.items()) {
      auto c = capability_from_string(token);
      if (!c) throw Error("malformed", "unknown capability flag '" + token + "'");
      if (!on.is_boolean()) throw Error("malformed", "capability flags are booleans");
      caps.set(*c, on.get<bool>());
    }
    return caps;
  }
  if (j.is_array()) return j.get<CapabilitySet>();
  throw Error("malformed", "capabilities must be a flag map or a token list");
}

}  // namespace

std::string_view to_string(MessageType t) { return kTags[static_cast<std::size_t>(t)]; }

std::optional<MessageType> message_type_from_string(std::string_view tag) {
  for (std::size_t i = 0; i < kTags.size(); ++i) {
    if (kTags[i] == tag) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

std::string serialize(const WireMessage& msg) {
  Json j = msg.extra.is_object() ? msg.extra : Json::object();
  j["type"] = to_string(msg.type);
  j["seq"] = msg.seq;
  j["payload"] = msg.payload;
  return j.dump();
}

WireMessage deserialize(std::string_view frame) {
  Json j;
  try {
    j = Json::parse(frame);
  } catch (const Json::parse_error& e) {
    throw Error("malformed", std::string("frame is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("malformed", "frame must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) {
    throw Error("malformed", "frame needs a string 'type'");
  }
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
    throw Error("malformed", "frame needs a non-negative integer 'seq'");
  }
  const auto tag = j["type"].get<std::string>();
  auto type = message_type_from_string(tag);
  if (!type) throw Error("unknown-type", "unknown message type '" + tag + "'");

  WireMessage msg;
  msg.type = *type;
  msg.seq = j["seq"].get<std::uint64_t>();
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw Error("malformed", "'payload' must be an object");
    msg.payload = j["payload"];
  }
  j.erase("type");
  j.erase("seq");
  j.erase("payload");
  msg.extra = std::move(j);
  return msg;
}

SeqTracker::Observation SeqTracker::observe(std::uint64_t seq) {
  Observation o;
  o.expected = next_;
  o.got = seq;
  if (seq == next_) {
    o.verdict = Verdict::InOrder;
    ++next_;
  } else if (seq > next_) {
    o.verdict = Verdict::Gap;
    o.missing = seq - next_;
    ++gaps_;
    next_ = seq + 1;
  } else {
    o.verdict = Verdict::Regression;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Client -> server payloads

Json join_payload(const JoinPayload& p) {
  Json j{{"performance", p.performance}, {"nickname", p.nickname}, {"role", p.role}};
  if (p.passcode) j["passcode"] = *p.passcode;
  if (p.local_ip) j["local_ip"] = *p.local_ip;
  if (p.venue) j["venue"] = *p.venue;
  if (p.t0) j["t0"] = *p.t0;
  return j;
}

JoinPayload parse_join(const Json& j) {
  JoinPayload p;
  p.performance = get<std::string>(j, "performance");
  p.nickname = get<std::string>(j, "nickname");
  p.role = get<std::string>(j, "role");
  p.passcode = get_opt<std::string>(j, "passcode");
  p.local_ip = get_opt<std::string>(j, "local_ip");
  p.venue = get_opt<std::string>(j, "venue");
  p.t0 = get_opt<timing::Millis>(j, "t0");
  return p;
}

Json designation_json(const Designation& d) { return Json(d); }

Designation parse_designation(const Json& j) {
  if (!j.is_object()) throw Error("malformed", "designation must be an object");
  try {
    return j.get<Designation>();
  } catch (const Json::exception& e) {
    throw Error("malformed", std::string("designation: ") + e.what());
  }
}

Json osc_message_json(const osc::Message& m) {
  Json args = Json::array();
  for (const auto& a : m.args) {
    Json arg{{"type", std::string(1, osc::type_tag(a))}};
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, osc::Blob>) {
            arg["value"] = hex(v.bytes);
          } else {
            arg["value"] = v;
          }
        },
        a);
    args.push_back(std::move(arg));
  }
  return Json{{"address", m.address}, {"args", std::move(args)}};
}

osc::Message parse_osc_message(const Json& j) {
  osc::Message m;
  m.address = get<std::string>(j, "address");
  if (!j.contains("args")) return m;
  if (!j["args"].is_array()) throw Error("malformed", "osc.args must be an array");
  for (const auto& a : j["args"]) {
    const auto type = get<std::string>(a, "type");
    if (type == "i") {
      m.args.emplace_back(get<std::int32_t>(a, "value"));
    } else if (type == "f") {
      m.args.emplace_back(get<float>(a, "value"));
    } else if (type == "s") {
      m.args.emplace_back(get<std::string>(a, "value"));
    } else if (type == "b") {
      m.args.emplace_back(osc::Blob{unhex(get<std::string>(a, "value"))});
    } else {
      throw Error("malformed", "unsupported OSC argument type '" + type + "'");
    }
  }
  return m;
}

Json send_request_payload(const SendRequestPayload& p) {
  Json j{{"designation", designation_json(p.designation)}};
  if (p.content_id) j["content_id"] = *p.content_id;
  if (p.text) j["text"] = *p.text;
  if (p.tts_text) {
    j["tts_text"] = *p.tts_text;
    j["language"] = p.language;
  }
  if (p.osc) j["osc"] = osc_message_json(*p.osc);
  return j;
}

SendRequestPayload parse_send_request(const Json& j) {
  SendRequestPayload p;
  p.designation = parse_designation(field(j, "designation"));
  p.content_id = get_opt<std::string>(j, "content_id");
  p.text = get_opt<std::string>(j, "text");
  p.tts_text = get_opt<std::string>(j, "tts_text");
  if (auto lang = get_opt<std::string>(j, "language")) p.language = *lang;
  if (j.contains("osc") && !j["osc"].is_null()) p.osc = parse_osc_message(j["osc"]);
  const int sources = (p.content_id ? 1 : 0) + (p.text ? 1 : 0) + (p.tts_text ? 1 : 0) +
                      (p.osc ? 1 : 0);
  const bool assignment = p.designation.algorithm || p.designation.fraction ||
                          p.designation.multi_role;
  if (sources > 1) {
    throw Error("malformed", "send one of content_id, text, tts_text or osc");
  }
  if (sources == 0 && !assignment) {
    throw Error("missing-field", "payload needs content_id, text, tts_text or osc");
  }
  return p;
}

Json functionality_payload(const FunctionalityPayload& p) {
  Json j = Json::object();
  if (p.role) j["role"] = *p.role;
  if (p.target) j["target"] = *p.target;
  if (p.capabilities) j["capabilities"] = capability_map(*p.capabilities);
  return j;
}

FunctionalityPayload parse_functionality(const Json& j) {
  FunctionalityPayload p;
  p.role = get_opt<std::string>(j, "role");
  p.target = get_opt<std::string>(j, "target");
  if (j.contains("capabilities") && !j["capabilities"].is_null()) {
    p.capabilities = parse_caps(j["capabilities"]);
  }
  if (!p.role && !p.capabilities) {
    throw Error("missing-field", "payload needs 'role' or 'capabilities'");
  }
  return p;
}

Json cue_ack_payload(const CueAckPayload& p) {
  Json j{{"cue_id", p.cue_id}, {"late", p.late}};
  if (p.fired_at) j["fired_at"] = *p.fired_at;
  if (p.error) j["error"] = *p.error;
  return j;
}

CueAckPayload parse_cue_ack(const Json& j) {
  CueAckPayload p;
  p.cue_id = get<std::string>(j, "cue_id");
  p.late = get_opt<bool>(j, "late").value_or(false);
  p.fired_at = get_opt<timing::Millis>(j, "fired_at");
  p.error = get_opt<std::string>(j, "error");
  return p;
}

// ---------------------------------------------------------------------------
// Server -> client payloads

Json roster_json(const runtime::Performance& perf) {
  Json roster = Json::array();
  for (const auto& p : perf.roster()) {
    roster.push_back({{"nickname", p.nickname},
                      {"role", p.role_name},
                      {"present", p.present},
                      {"test_mode", p.test_mode}});
  }
  return roster;
}

Json clock_pong_payload(timing::Millis t0, timing::Millis t1, timing::Millis t2) {
  return Json{{"t0", t0}, {"t1", t1}, {"t2", t2}};
}

Json join_ack_payload(const runtime::Performance& perf, const runtime::Performer& me,
                      const Json& clock_pong) {
  Json roles = Json::array();
  for (const auto& vr : perf.venue().roles) {
    Json r{{"name", vr.role.name}, {"audio_required", vr.role.audio_required}};
    if (vr.capacity) r["capacity"] = *vr.capacity;
    roles.push_back(std::move(r));
  }
  return Json{{"performance", perf.name()},
              {"venue", perf.venue().name},
              {"nickname", me.nickname},
              {"role", me.role_name},
              {"capabilities", capability_map(me.capabilities)},
              {"roles", std::move(roles)},
              {"roster", roster_json(perf)},
              {"delay_budget_ms", perf.delay_budget_ms()},
              {"clock_pong", clock_pong}};
}

Json roster_update_payload(const runtime::Performance& perf) {
  return Json{{"performance", perf.name()}, {"roster", roster_json(perf)}};
}

Json activity_payload(const runtime::ActivityEntry& e, std::string_view scope) {
  return Json{{"scope", scope},
              {"entry",
               {{"seq", e.seq},
                {"timestamp_ms", e.timestamp_ms},
                {"sender", e.sender},
                {"verb", e.verb},
                {"content_name", e.content_name},
                {"receivers", e.receivers},
                {"test", e.test},
                {"display_time", e.display_time},
                {"line", e.line()}}}};
}

Json error_payload(std::string_view code, std::string_view message,
                   const std::vector<runtime::Rejection>& reasons,
                   std::optional<std::uint64_t> ref_seq) {
  Json j{{"code", code}, {"message", message}};
  if (!reasons.empty()) {
    Json list = Json::array();
    for (const auto& r : reasons) list.push_back({{"nickname", r.nickname}, {"reason", r.reason}});
    j["reasons"] = std::move(list);
  }
  if (ref_seq) j["ref_seq"] = *ref_seq;
  return j;
}

Json cue_payload(const runtime::CueEnvelope& env, const runtime::Delivery& d,
                 std::string_view blob_prefix) {
  Json parts = Json::array();
  for (const auto& p : d.parts) {
    Json part{{"kind", runtime::to_string(p.kind)}, {"name", p.name}};
    if (!p.content_id.empty()) part["content_id"] = p.content_id;
    if (!p.blob_id.empty()) part["blob_url"] = std::string(blob_prefix) + p.blob_id;
    if (p.duration_ms > 0) part["duration_ms"] = p.duration_ms;
    if (!p.offsets_ms.empty()) part["offsets_ms"] = p.offsets_ms;
    if (!p.text.empty()) part["text"] = p.text;
    if (!p.steps.empty()) {
      Json steps = Json::array();
      for (std::size_t i = 0; i < p.steps.size(); ++i) {
        Json step{{"content_id", p.steps[i]}};
        if (i < p.step_blobs.size() && !p.step_blobs[i].empty()) {
          step["blob_url"] = std::string(blob_prefix) + p.step_blobs[i];
        }
        steps.push_back(std::move(step));
      }
      part["steps"] = std::move(steps);
    }
    if (p.osc) part["osc"] = osc_message_json(*p.osc);
    parts.push_back(std::move(part));
  }
  return Json{{"cue_id", env.cue_id},
              {"sender", env.sender},
              {"verb", env.verb},
              {"content_name", env.content_name},
              {"issue_at", env.schedule.issue_at},
              {"execute_at", d.execute_at},
              {"delay_budget_ms", env.schedule.delay_budget},
              {"test", env.test},
              {"parts", std::move(parts)}};
}

}  // namespace telebrain::wire
