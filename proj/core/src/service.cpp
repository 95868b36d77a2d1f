#include "telebrain/service.hpp"

#include "log.hpp"

#include <algorithm>

namespace telebrain::server {

using wire::MessageType;

StageService::StageService(ContentStore& store, const timing::Clock& clock, Options options,
                           OscSink osc_sink)
    : store_(store),
      clock_(clock),
      options_(std::move(options)),
      osc_sink_(std::move(osc_sink)),
      registry_(store, clock, options_.seed) {}

void StageService::connect(ConnectionId c) {
  std::lock_guard guard(mutex_);
  connections_.try_emplace(c);
}

Outbound StageService::frame(ConnectionId to, MessageType type, Json payload) {
  auto& c = connections_[to];
  wire::WireMessage msg;
  msg.type = type;
  msg.seq = c.out.next();
  msg.payload = std::move(payload);
  return {to, wire::serialize(msg), false};
}

Outbound StageService::error_frame(ConnectionId to, const Error& e,
                                   std::optional<std::uint64_t> ref_seq) {
  std::vector<runtime::Rejection> reasons;
  if (const auto* r = dynamic_cast<const runtime::RoutingError*>(&e)) reasons = r->reasons();
  return frame(to, MessageType::Error, wire::error_payload(e.code(), e.what(), reasons, ref_seq));
}

void StageService::broadcast(const runtime::Performance& perf, MessageType type,
                             const Json& payload, std::vector<Outbound>& out,
                             std::optional<ConnectionId> except) {
  for (const auto& p : perf.roster()) {
    if (except && p.connection == *except) continue;
    if (!connections_.contains(p.connection)) continue;
    out.push_back(frame(p.connection, type, payload));
  }
}

runtime::Performance& StageService::performance_of(const Connection& c) {
  if (!c.performance) throw Error("not-joined", "join a performance first");
  return registry_.live(*c.performance);
}

Venue StageService::lookup_venue(const std::string& name_or_id) const {
  std::optional<Venue> venue;
  if (auto obj = store_.find(name_or_id)) {
    if (auto* v = std::get_if<Venue>(&*obj)) venue = *v;
  }
  if (!venue) {
    if (auto obj = store_.find_by_name("venue", name_or_id)) venue = std::get<Venue>(*obj);
  }
  if (!venue) throw Error("not-found", "no venue '" + name_or_id + "'");
  if (!venue->delay_budget_ms) venue->delay_budget_ms = options_.default_delay_budget_ms;
  if (venue->utc_offset_minutes == 0) venue->utc_offset_minutes = options_.utc_offset_minutes;
  return *venue;
}

// ---------------------------------------------------------------------------

std::vector<Outbound> StageService::on_frame(ConnectionId id, std::string_view text) {
  std::lock_guard guard(mutex_);
  auto& c = connections_[id];
  std::vector<Outbound> out;

  wire::WireMessage msg;
  try {
    msg = wire::deserialize(text);
  } catch (const Error& e) {
    if (e.code() == "unknown-type") {
      // Still a well-formed frame: count its seq so the stream stays contiguous.
      try {
        const auto j = Json::parse(text);
        c.in.observe(j.at("seq").get<std::uint64_t>());
      } catch (const Json::exception&) {
      }
      c.malformed = 0;
      out.push_back(error_frame(id, e, std::nullopt));
      return out;
    }
    ++c.malformed;
    out.push_back(error_frame(id, e, std::nullopt));
    if (c.malformed >= options_.malformed_limit) {
      out.back().close = true;
      detail::logger()->warn("connection {}: closing after {} malformed frames", id, c.malformed);
    }
    return out;
  }
  c.malformed = 0;

  const auto seen = c.in.observe(msg.seq);
  if (seen.verdict == wire::SeqTracker::Verdict::Regression) {
    out.push_back(error_frame(
        id,
        Error("seq-regression", "seq " + std::to_string(seen.got) + " after " +
                                    std::to_string(seen.expected - 1)),
        msg.seq));
    out.back().close = true;
    return out;
  }
  if (seen.verdict == wire::SeqTracker::Verdict::Gap) {
    out.push_back(error_frame(id,
                              Error("seq-gap", std::to_string(seen.missing) +
                                                   " frame(s) missing before seq " +
                                                   std::to_string(seen.got)),
                              msg.seq));
  }

  try {
    handle(id, c, msg, out);
  } catch (const Error& e) {
    out.push_back(error_frame(id, e, msg.seq));
  }
  return out;
}

void StageService::handle(ConnectionId id, Connection& c, const wire::WireMessage& msg,
                          std::vector<Outbound>& out) {
  switch (msg.type) {
    case MessageType::Join:
      return on_join(id, c, msg.payload, out);
    case MessageType::Leave:
      return on_leave(id, c, out);
    case MessageType::ClockPing: {
      const auto& t0 = msg.payload.contains("t0") ? msg.payload["t0"] : Json();
      if (!t0.is_number_integer()) throw Error("missing-field", "clock_ping needs integer 't0'");
      if (c.performance && msg.payload.contains("offset_ms") &&
          msg.payload["offset_ms"].is_number_integer()) {
        performance_of(c).set_clock_offset(c.nickname, msg.payload["offset_ms"].get<timing::Millis>());
      }
      const auto now = clock_.now();
      out.push_back(frame(id, MessageType::ClockPong,
                          wire::clock_pong_payload(t0.get<timing::Millis>(), now, now)));
      return;
    }
    case MessageType::SendRequest:
      return on_send(c, msg.payload, out);
    case MessageType::CueAck: {
      const auto ack = wire::parse_cue_ack(msg.payload);
      ++acks_.acks;
      if (ack.late) ++acks_.late;
      if (ack.error) {
        ++acks_.errors;
        detail::logger()->warn("cue {} failed on {}: {}", ack.cue_id, c.nickname, *ack.error);
      }
      return;
    }
    case MessageType::FunctionalityChange:
      return on_functionality(c, msg.payload, out);
    case MessageType::TestToggle:
      return on_test_toggle(id, c, msg.payload, out);
    case MessageType::JoinAck:
    case MessageType::RosterUpdate:
    case MessageType::Cue:
    case MessageType::ClockPong:
    case MessageType::ActivityUpdate:
    case MessageType::Error:
      throw Error("unexpected-type",
                  std::string(wire::to_string(msg.type)) + " is sent by the server only");
  }
}

void StageService::on_join(ConnectionId id, Connection& c, const Json& payload,
                           std::vector<Outbound>& out) {
  if (c.performance) throw Error("already-joined", "this connection already joined");
  const auto p = wire::parse_join(payload);
  runtime::JoinRequest req{p.nickname, p.role, p.passcode, p.local_ip, id};

  runtime::Performance* perf = nullptr;
  if (p.venue) {
    perf = &registry_.start(lookup_venue(*p.venue), p.performance, req);
  } else {
    perf = &registry_.live(p.performance);
    perf->join(req);
  }
  c.performance = perf->name();
  c.nickname = p.nickname;

  const auto now = clock_.now();
  const auto pong = wire::clock_pong_payload(p.t0.value_or(0), now, now);
  out.push_back(frame(id, MessageType::JoinAck, wire::join_ack_payload(*perf, *perf->find(p.nickname), pong)));
  broadcast(*perf, MessageType::RosterUpdate, wire::roster_update_payload(*perf), out, id);
}

void StageService::on_leave(ConnectionId id, Connection& c, std::vector<Outbound>& out) {
  auto& perf = performance_of(c);
  const bool destroyed = perf.leave(c.nickname);
  out.push_back(frame(id, MessageType::Leave,
                      Json{{"performance", perf.name()}, {"destroyed", destroyed}}));
  if (!destroyed) broadcast(perf, MessageType::RosterUpdate, wire::roster_update_payload(perf), out);
  c.performance.reset();
  c.nickname.clear();
}

void StageService::on_send(Connection& c, const Json& payload, std::vector<Outbound>& out) {
  auto& perf = performance_of(c);
  const auto req = wire::parse_send_request(payload);

  runtime::Outgoing what;
  if (req.content_id) {
    what = runtime::Outgoing::stored(*req.content_id);
  } else if (req.text) {
    what = runtime::Outgoing::live_text(*req.text);
  } else if (req.tts_text) {
    const auto* me = perf.find(c.nickname);
    if (me && !me->can(Capability::SendTtsLive)) {
      throw Error("capability", c.nickname + " lacks send-tts-live");
    }
    const auto rendered = store_.save_tts(*req.tts_text, req.language);
    what = runtime::Outgoing::live_tts(rendered.id, *req.tts_text);
  } else if (req.osc) {
    what = runtime::Outgoing::osc_message(*req.osc);
  }
  const auto result = perf.dispatch(c.nickname, req.designation, what);
  deliver(perf, result, what, out);
}

void StageService::deliver(runtime::Performance& perf, const runtime::DispatchResult& result,
                           const runtime::Outgoing& what, std::vector<Outbound>& out) {
  // Outbound OSC bindings attached to the content being sent.
  std::vector<osc::Message> bound;
  if (what.kind == runtime::Outgoing::Kind::Stored && !what.content_id.empty()) {
    ListFilter f;
    f.type = "algorithm";
    for (const auto& id : store_.list(f)) {
      const auto alg = store_.get_as<AlgorithmObject>(id);
      const auto* spec = std::get_if<OscBindingSpec>(&alg.spec);
      if (spec && spec->direction == OscDirection::Out && spec->target_id == what.content_id) {
        bound.push_back({spec->address, {std::string(result.envelope.content_name)}});
      }
    }
  }

  for (const auto& d : result.envelope.deliveries) {
    runtime::Delivery media = d;
    std::erase_if(media.parts, [](const runtime::CuePart& p) {
      return p.kind == runtime::CuePart::Kind::Osc;
    });
    const auto* performer = perf.find(d.nickname);
    auto send_osc = [&](const osc::Message& m) {
      if (!osc_sink_ || !performer) return;
      try {
        osc_sink_(osc::outbound_endpoint(performer->local_ip, options_.osc_send_port), m);
      } catch (const Error& e) {
        detail::logger()->warn("OSC to {} not sent: {}", d.nickname, e.what());
      }
    };
    for (const auto& p : d.parts) {
      if (p.osc) send_osc(*p.osc);
    }
    if (performer && performer->local_ip) {
      for (const auto& m : bound) send_osc(m);
    }
    if (!media.parts.empty() && connections_.contains(d.connection)) {
      out.push_back(frame(d.connection, MessageType::Cue,
                          wire::cue_payload(result.envelope, media, options_.blob_prefix)));
    }
  }

  const auto& e = result.entry;
  for (const auto& p : perf.roster()) {
    if (!connections_.contains(p.connection)) continue;
    if (p.can(Capability::GlobalActivityLog)) {
      out.push_back(frame(p.connection, MessageType::ActivityUpdate, wire::activity_payload(e, "global")));
    } else if (p.can(Capability::PerformerActivityLog) &&
               (e.sender == p.nickname ||
                std::find(e.receivers.begin(), e.receivers.end(), p.nickname) != e.receivers.end())) {
      out.push_back(frame(p.connection, MessageType::ActivityUpdate, wire::activity_payload(e, "performer")));
    }
  }
}

void StageService::on_functionality(Connection& c, const Json& payload,
                                    std::vector<Outbound>& out) {
  auto& perf = performance_of(c);
  const auto fp = wire::parse_functionality(payload);
  std::string target = c.nickname;
  if (fp.role) perf.change_role(c.nickname, *fp.role);
  if (fp.capabilities) {
    target = fp.target.value_or(c.nickname);
    perf.change_functionality(c.nickname, target, *fp.capabilities);
  }
  const auto* p = perf.find(target);
  if (p && connections_.contains(p->connection)) {
    out.push_back(frame(p->connection, MessageType::FunctionalityChange,
                        Json{{"nickname", p->nickname},
                             {"role", p->role_name},
                             {"capabilities", capability_map(p->capabilities)}}));
  }
  broadcast(perf, MessageType::RosterUpdate, wire::roster_update_payload(perf), out);
}

void StageService::on_test_toggle(ConnectionId id, Connection& c, const Json& payload,
                                  std::vector<Outbound>& out) {
  auto& perf = performance_of(c);
  if (!payload.contains("on") || !payload["on"].is_boolean()) {
    throw Error("missing-field", "test_toggle needs boolean 'on'");
  }
  const bool on = payload["on"].get<bool>();
  perf.set_test_mode(c.nickname, on);
  out.push_back(frame(id, MessageType::TestToggle, Json{{"on", on}}));
}

std::vector<Outbound> StageService::disconnect(ConnectionId id) {
  std::lock_guard guard(mutex_);
  std::vector<Outbound> out;
  auto it = connections_.find(id);
  if (it == connections_.end()) return out;
  if (it->second.performance) {
    try {
      auto& perf = registry_.live(*it->second.performance);
      if (!perf.leave(it->second.nickname)) {
        broadcast(perf, MessageType::RosterUpdate, wire::roster_update_payload(perf), out, id);
      }
    } catch (const Error& e) {
      detail::logger()->debug("disconnect {}: {}", id, e.what());
    }
  }
  connections_.erase(id);
  return out;
}

std::vector<Outbound> StageService::on_osc(const osc::Message& msg) {
  std::lock_guard guard(mutex_);
  std::vector<Outbound> out;

  osc::Router router([this](const std::string& id) { return store_.find(id).has_value(); });
  ListFilter f;
  f.type = "algorithm";
  for (const auto& id : store_.list(f)) {
    const auto alg = store_.get_as<AlgorithmObject>(id);
    const auto* spec = std::get_if<OscBindingSpec>(&alg.spec);
    if (!spec || spec->direction != OscDirection::In) continue;
    Designation d;
    const auto target = store_.find(spec->target_id);
    if (!target) continue;
    if (std::holds_alternative<AlgorithmObject>(*target)) {
      d.algorithm = spec->target_id;
    } else if (std::holds_alternative<FractionalAssignment>(*target)) {
      d.fraction = spec->target_id;
    } else if (std::holds_alternative<MultiRoleAssignment>(*target)) {
      d.multi_role = spec->target_id;
    } else {
      d.all = true;
    }
    router.bind(spec->address, {spec->target_id, d});
  }

  for (const auto& action : router.dispatch(msg)) {
    for (const auto& name : registry_.live_names()) {
      auto& perf = registry_.live(name);
      const auto what = runtime::Outgoing::stored(action.target_id);
      try {
        const auto result = perf.dispatch_external("OSC " + msg.address, action.designation, what);
        deliver(perf, result, what, out);
      } catch (const Error& e) {
        detail::logger()->info("OSC {} in '{}': {}", msg.address, name, e.what());
      }
    }
  }
  return out;
}

Json StageService::performances() const {
  std::lock_guard guard(mutex_);
  Json list = Json::array();
  for (const auto& name : registry_.live_names()) {
    const auto* perf = registry_.latest(name);
    Json roles = Json::array();
    for (const auto& vr : perf->venue().roles) {
      Json r{{"name", vr.role.name}, {"present", perf->role_count(vr.role.name)}};
      if (vr.capacity) r["capacity"] = *vr.capacity;
      roles.push_back(std::move(r));
    }
    list.push_back({{"name", perf->name()},
                    {"venue", perf->venue().name},
                    {"performers", perf->roster().size()},
                    {"passcode_required", perf->venue().passcode.has_value() ||
                                              perf->venue().needs(JoinRequirement::Passcode)},
                    {"roles", std::move(roles)}});
  }
  return list;
}

StageService::AckStats StageService::ack_stats() const {
  std::lock_guard guard(mutex_);
  return acks_;
}

}  // namespace telebrain::server
