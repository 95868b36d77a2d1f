#include "telebrain/venue_runtime.hpp"

#include "log.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "telebrain/lock.hpp"

namespace telebrain::runtime {

namespace {

std::string join_reasons(const std::vector<Rejection>& reasons) {
  if (reasons.empty()) return "no performers selected";
  std::string out;
  for (const auto& r : reasons) {
    if (!out.empty()) out += "; ";
    out += r.nickname + ": " + r.reason;
  }
  return out;
}

template <typename T, typename S>
bool contains(const std::vector<T>& v, const S& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// Activity log

std::string ActivityEntry::text() const { return sender + ": " + verb + ": " + content_name; }

std::string ActivityEntry::line() const { return text() + "\t" + display_time; }

std::string format_hh_mm(Millis epoch_ms, int utc_offset_minutes) {
  auto minutes = epoch_ms / 60000;
  if (epoch_ms % 60000 < 0) --minutes;  // floor for pre-epoch instants
  auto of_day = (minutes + utc_offset_minutes) % 1440;
  if (of_day < 0) of_day += 1440;
  char buf[6];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(of_day / 60),
                static_cast<int>(of_day % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Cue parts

std::string_view to_string(CuePart::Kind k) {
  switch (k) {
    case CuePart::Kind::Audio: return "audio";
    case CuePart::Kind::Image: return "image";
    case CuePart::Kind::Phrase: return "phrase";
    case CuePart::Kind::Text: return "text";
    case CuePart::Kind::Tts: return "tts";
    case CuePart::Kind::Interface: return "interface";
    case CuePart::Kind::Osc: return "osc";
  }
  return "audio";
}

Capability receive_capability(CuePart::Kind k) {
  switch (k) {
    case CuePart::Kind::Audio: return Capability::ReceiveAudio;
    case CuePart::Kind::Image:
    case CuePart::Kind::Phrase: return Capability::ReceiveImage;
    case CuePart::Kind::Text: return Capability::ReceiveText;
    case CuePart::Kind::Tts: return Capability::ReceiveTtsLive;
    case CuePart::Kind::Interface: return Capability::ReceiveInterface;
    case CuePart::Kind::Osc: return Capability::ReceiveOsc;
  }
  return Capability::ReceiveAudio;
}

RoutingError::RoutingError(std::vector<Rejection> reasons)
    : Error("no-receivers", "no performer can receive this cue: " + join_reasons(reasons)),
      reasons_(std::move(reasons)) {}

// ---------------------------------------------------------------------------
// Fractions

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw Error("invalid", "bounded_draw needs n > 0");
  const auto limit = std::numeric_limits<std::uint64_t>::max() -
                     std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

void seeded_shuffle(std::vector<std::string>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = bounded_draw(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

Partition balanced_chunks(const std::vector<std::string>& items, std::size_t k) {
  if (k == 0) throw Error("invalid", "need at least one fraction");
  Partition out(k);
  const auto base = items.size() / k;
  const auto extra = items.size() % k;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto n = base + (i < extra ? 1 : 0);
    out[i].assign(items.begin() + static_cast<std::ptrdiff_t>(pos),
                  items.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Performance

Performance::Performance(std::string name, Venue venue, const Catalog& catalog,
                         const timing::Clock& clock, std::uint64_t seed)
    : name_(std::move(name)),
      venue_(std::move(venue)),
      catalog_(catalog),
      clock_(clock),
      seed_(seed),
      rng_(seed) {}

void Performance::require_live() const {
  if (!live()) throw Error("gone", "performance '" + name_ + "' has ended");
}

Performer& Performance::require_performer(std::string_view nickname) {
  for (auto& p : roster_) {
    if (p.nickname == nickname) return p;
  }
  throw Error("not-found", "no performer '" + std::string(nickname) + "' in '" + name_ + "'");
}

const Performer* Performance::find(std::string_view nickname) const {
  for (const auto& p : roster_) {
    if (p.nickname == nickname) return &p;
  }
  return nullptr;
}

std::optional<std::string> Performance::nickname_for(ConnectionId c) const {
  for (const auto& p : roster_) {
    if (p.connection == c) return p.nickname;
  }
  return std::nullopt;
}

std::size_t Performance::role_count(std::string_view role) const {
  return static_cast<std::size_t>(std::count_if(
      roster_.begin(), roster_.end(), [&](const Performer& p) { return p.role_name == role; }));
}

std::vector<const Performer*> Performance::present() const {
  std::vector<const Performer*> out;
  for (const auto& p : roster_) out.push_back(&p);
  return out;
}

const Performer& Performance::join(const JoinRequest& req) {
  require_live();
  if (req.nickname.empty()) throw Error("missing-field", "a nickname is required to join");
  if (venue_.needs(JoinRequirement::Passcode) || venue_.passcode) {
    if (!req.passcode) throw Error("passcode", "this performance requires a passcode");
    if (!venue_.passcode || !verify_passcode(*venue_.passcode, *req.passcode)) {
      throw Error("passcode", "wrong passcode");
    }
  }
  if (venue_.needs(JoinRequirement::LocalIp) && (!req.local_ip || req.local_ip->empty())) {
    throw Error("missing-field", "this venue requires a local IP address");
  }
  const auto* vr = venue_.find_role(req.role);
  if (!vr) throw Error("unknown-role", "venue has no role '" + req.role + "'");
  if (find(req.nickname)) {
    throw Error("nickname-taken", "nickname '" + req.nickname + "' is already in use");
  }
  if (vr->capacity && role_count(req.role) >= static_cast<std::size_t>(*vr->capacity)) {
    throw Error("capacity", "role '" + req.role + "' is full");
  }
  Performer p;
  p.nickname = req.nickname;
  p.role_name = req.role;
  p.connection = req.connection;
  p.local_ip = req.local_ip;
  p.capabilities = vr->role.capabilities;
  roster_.push_back(std::move(p));
  return roster_.back();
}

bool Performance::leave(std::string_view nickname) {
  require_live();
  auto it = std::find_if(roster_.begin(), roster_.end(),
                         [&](const Performer& p) { return p.nickname == nickname; });
  if (it == roster_.end()) {
    throw Error("not-found", "no performer '" + std::string(nickname) + "' in '" + name_ + "'");
  }
  roster_.erase(it);
  if (roster_.empty()) {
    state_ = PerformanceState::Destroyed;
    return true;
  }
  return false;
}

void Performance::set_clock_offset(std::string_view nickname, Millis offset_ms) {
  require_performer(nickname).clock_offset_ms = offset_ms;
}

// --- content ----------------------------------------------------------------

std::string Performance::display_name(const std::string& id) const {
  if (auto obj = catalog_.find(id)) return object_name(*obj);
  return id;
}

std::vector<CuePart> Performance::parts_for(const std::string& id) const {
  auto obj = catalog_.find(id);
  if (!obj) throw Error("not-found", "no content '" + id + "'");
  CuePart part;
  part.content_id = id;
  part.name = object_name(*obj);
  if (const auto* c = std::get_if<ContentObject>(&*obj)) {
    if (is_audio(c->kind)) {
      part.kind = CuePart::Kind::Audio;
      part.blob_id = c->blob_id;
      part.duration_ms = c->duration_ms;
    } else if (is_image(c->kind)) {
      part.kind = CuePart::Kind::Image;
      part.blob_id = c->blob_id;
    } else {
      part.kind = CuePart::Kind::Text;
      part.text = c->teleprompt ? c->teleprompt->text : std::string{};
    }
    return {part};
  }
  if (const auto* c = std::get_if<Collection>(&*obj)) {
    switch (c->kind) {
      case CollectionKind::AudioSentence:
      case CollectionKind::AudioLayer:
        part.kind = CuePart::Kind::Audio;
        part.blob_id = c->blob_id;
        part.duration_ms = c->duration_ms;
        part.offsets_ms = c->offsets_ms;
        return {part};
      case CollectionKind::ImagePhrase:
        part.kind = CuePart::Kind::Phrase;
        for (const auto& m : c->members) {
          part.steps.push_back(m);
          auto member = catalog_.find_as<ContentObject>(m);
          part.step_blobs.push_back(member ? member->blob_id : std::string{});
        }
        return {part};
      case CollectionKind::AudioImagePair: {
        std::vector<CuePart> out;
        for (const auto& m : c->members) {
          auto sub = parts_for(m);
          out.insert(out.end(), sub.begin(), sub.end());
        }
        // Audio first so clients can start decoding early.
        std::stable_sort(out.begin(), out.end(), [](const CuePart& a, const CuePart& b) {
          return a.kind == CuePart::Kind::Audio && b.kind != CuePart::Kind::Audio;
        });
        return out;
      }
      case CollectionKind::Folder:
        break;
    }
    throw Error("wrong-type", "folders cannot be performed");
  }
  if (std::holds_alternative<InterfaceObject>(*obj)) {
    part.kind = CuePart::Kind::Interface;
    return {part};
  }
  throw Error("wrong-type", "'" + part.name + "' is a " + std::string(object_type(*obj)) +
                                ", not performable content");
}

std::string Performance::verb_for(const Outgoing& what) const {
  switch (what.kind) {
    case Outgoing::Kind::Text: return "show text";
    case Outgoing::Kind::Tts: return "play tts";
    case Outgoing::Kind::Osc: return "send osc";
    case Outgoing::Kind::Stored: break;
  }
  auto obj = catalog_.find(what.content_id);
  if (!obj) return "send";
  if (const auto* c = std::get_if<ContentObject>(&*obj)) {
    if (c->kind == ContentKind::AudioTts) return "play tts";
    if (is_audio(c->kind)) return "play audio";
    if (is_image(c->kind)) return "show image";
    return "show text";
  }
  switch (catalog_.media_class(what.content_id).value_or(MediaClass::Other)) {
    case MediaClass::Audio: return "play audio";
    case MediaClass::Image: return "show image";
    case MediaClass::Pair: return "play audio/show image";
    case MediaClass::Interface: return "show interface";
    default: return "send";
  }
}

// --- routing ----------------------------------------------------------------

void Performance::check_send_capability(const Performer& sender, const Designation& d,
                                        const Outgoing& what) const {
  auto need = [&](Capability c) {
    if (!sender.can(c)) {
      throw Error("capability", sender.nickname + " lacks " + std::string(to_string(c)));
    }
  };
  if (d.algorithm) return need(Capability::SendAlgorithm);
  if (d.fraction) return need(Capability::SendFraction);
  if (d.multi_role) return need(Capability::SendAssociation);
  switch (what.kind) {
    case Outgoing::Kind::Text: return need(Capability::SendText);
    case Outgoing::Kind::Tts: return need(Capability::SendTtsLive);
    case Outgoing::Kind::Osc: return need(Capability::SendOsc);
    case Outgoing::Kind::Stored: break;
  }
  const auto cls = catalog_.media_class(what.content_id);
  if (!cls) throw Error("not-found", "no content '" + what.content_id + "'");
  switch (*cls) {
    case MediaClass::Audio: return need(Capability::SendAudio);
    case MediaClass::Image: return need(Capability::SendImage);
    case MediaClass::Teleprompt: return need(Capability::SendText);
    case MediaClass::Pair: return need(Capability::SendAssociation);
    case MediaClass::Interface: return need(Capability::ChangeInterface);
    case MediaClass::Folder:
    case MediaClass::Other: break;
  }
  throw Error("wrong-type", "'" + display_name(what.content_id) + "' cannot be sent");
}

std::vector<const Performer*> Performance::group_for(const Designation& d,
                                                     std::vector<Rejection>& rejected) const {
  std::vector<const Performer*> out;
  if (!d.performers.empty()) {
    for (const auto& nick : d.performers) {
      if (const auto* p = find(nick)) {
        if (!contains(out, p)) out.push_back(p);
      } else {
        rejected.push_back({nick, "not present"});
      }
    }
    return out;
  }
  if (!d.roles.empty()) {
    for (const auto& p : roster_) {
      if (contains(d.roles, p.role_name)) out.push_back(&p);
    }
    for (const auto& r : d.roles) {
      if (!venue_.find_role(r)) rejected.push_back({r, "no such role"});
    }
    return out;
  }
  return present();
}

void Performance::route_content(RoutingPlan& plan, const std::vector<const Performer*>& to,
                                const Outgoing& what, Millis offset) const {
  std::vector<CuePart> parts;
  std::string content_id = what.content_id;
  switch (what.kind) {
    case Outgoing::Kind::Stored:
      parts = parts_for(what.content_id);
      break;
    case Outgoing::Kind::Text: {
      CuePart p;
      p.kind = CuePart::Kind::Text;
      p.text = what.text;
      p.name = what.text;
      parts.push_back(std::move(p));
      break;
    }
    case Outgoing::Kind::Tts: {
      auto audio = parts_for(what.content_id);
      for (auto& p : audio) {
        p.kind = CuePart::Kind::Tts;
        p.text = what.text;
      }
      parts = std::move(audio);
      break;
    }
    case Outgoing::Kind::Osc: {
      CuePart p;
      p.kind = CuePart::Kind::Osc;
      p.name = what.osc.address;
      p.osc = what.osc;
      parts.push_back(std::move(p));
      break;
    }
  }

  for (const auto* p : to) {
    std::vector<CuePart> mine;
    std::vector<std::string> missing;
    for (const auto& part : parts) {
      const auto cap = receive_capability(part.kind);
      if (!p->can(cap)) {
        missing.emplace_back(to_string(cap));
      } else if (part.kind == CuePart::Kind::Osc && !p->local_ip) {
        missing.emplace_back("local-ip");
      } else {
        mine.push_back(part);
      }
    }
    if (mine.empty()) {
      std::string reason = "lacks";
      for (std::size_t i = 0; i < missing.size(); ++i) reason += (i ? ", " : " ") + missing[i];
      plan.rejected.push_back({p->nickname, reason});
      continue;
    }
    Delivery d;
    d.connection = p->connection;
    d.nickname = p->nickname;
    d.content_id = content_id;
    d.parts = std::move(mine);
    d.offset_ms = offset;
    plan.deliveries.push_back(std::move(d));
  }
}

void Performance::route_step(RoutingPlan& plan, const Performer& sender,
                             const DistributionStep& step, Millis offset) {
  Designation d = step.designation;
  if (auto f = catalog_.find_as<FractionalAssignment>(step.target_id); f && !d.fraction) {
    d.fraction = step.target_id;
  } else if (auto m = catalog_.find_as<MultiRoleAssignment>(step.target_id); m && !d.multi_role) {
    d.multi_role = step.target_id;
  }
  if (d.empty()) d.all = true;
  route(plan, sender, std::move(d), Outgoing::stored(step.target_id), offset, false);
}

void Performance::route_algorithm(RoutingPlan& plan, const Performer& sender,
                                  const AlgorithmObject& alg) {
  if (const auto* dist = std::get_if<DistributionOrganizationSpec>(&alg.spec)) {
    for (const auto& step : dist->steps) route_step(plan, sender, step, 0);
    return;
  }
  if (const auto* timed = std::get_if<TimedOrganizationSpec>(&alg.spec)) {
    for (const auto& entry : timed->entries) {
      auto trigger = catalog_.find_as<AlgorithmObject>(entry.trigger_id);
      if (!trigger) throw Error("not-found", "no trigger '" + entry.trigger_id + "'");
      if (const auto* timer = std::get_if<TimerSpec>(&trigger->spec)) {
        route_step(plan, sender, entry.action, timing::timer_fire(*timer, 0));
      } else if (const auto* metro = std::get_if<MetronomeSpec>(&trigger->spec)) {
        const auto ticks = timing::metronome_ticks(
            0, metro->interval_ms, static_cast<std::size_t>(std::max(entry.repeat, 1)));
        for (auto t : ticks) route_step(plan, sender, entry.action, t);
      } else {
        throw Error("wrong-type", "'" + trigger->name + "' is not a timer or metronome");
      }
    }
    return;
  }
  throw Error("wrong-type", "'" + alg.name + "' (" + std::string(algorithm_kind(alg.spec)) +
                                ") only triggers other algorithms and cannot be sent");
}

void Performance::route(RoutingPlan& plan, const Performer& sender, Designation d,
                        const Outgoing& what, Millis offset, bool top_level) {
  auto set_mechanism = [&](const char* m) {
    if (top_level) plan.mechanism = m;
  };

  if (d.algorithm) {
    set_mechanism("algorithm");
    auto alg = catalog_.find_as<AlgorithmObject>(*d.algorithm);
    if (!alg) throw Error("not-found", "no algorithm '" + *d.algorithm + "'");
    route_algorithm(plan, sender, *alg);
    return;
  }
  if (d.fraction) {
    set_mechanism("fraction");
    auto a = catalog_.find_as<FractionalAssignment>(*d.fraction);
    if (!a) throw Error("not-found", "no fractional assignment '" + *d.fraction + "'");
    const auto partition = resolve_fraction(*a);
    for (std::size_t i = 0; i < partition.size(); ++i) {
      std::vector<const Performer*> group;
      for (const auto& nick : partition[i]) {
        if (const auto* p = find(nick)) group.push_back(p);
      }
      route_content(plan, group, Outgoing::stored(a->fractions[i]), offset);
    }
    return;
  }
  if (d.multi_role) {
    set_mechanism("multi-role");
    auto a = catalog_.find_as<MultiRoleAssignment>(*d.multi_role);
    if (!a) throw Error("not-found", "no multi-role assignment '" + *d.multi_role + "'");
    if (!venue_.id.empty() && a->venue_id != venue_.id) {
      throw Error("invalid", "'" + a->name + "' belongs to a different venue");
    }
    for (const auto& p : roster_) {
      auto it = a->bindings.find(p.role_name);
      if (it == a->bindings.end()) {
        plan.rejected.push_back({p.nickname, "role '" + p.role_name + "' has no assignment"});
        continue;
      }
      route_content(plan, {&p}, Outgoing::stored(it->second), offset);
    }
    return;
  }

  if (d.empty()) {
    if (top_level) throw Error("missing-field", "select receivers: ALL, roles or performers");
    d.all = true;
  }
  if (!d.performers.empty()) {
    set_mechanism("performers");
  } else if (!d.roles.empty()) {
    set_mechanism("roles");
  } else {
    set_mechanism("all");
  }
  const auto group = group_for(d, plan.rejected);
  route_content(plan, group, what, offset);
}

RoutingPlan Performance::resolve_targets(std::string_view sender_nick, const Designation& d,
                                         const Outgoing& what) {
  require_live();
  const auto& sender = require_performer(sender_nick);
  check_send_capability(sender, d, what);

  RoutingPlan plan;
  if (sender.test_mode) {
    if (!d.algorithm && !d.fraction && !d.multi_role) {
      route_content(plan, {&sender}, what, 0);
    } else {
      route(plan, sender, d, what, 0, true);
      std::erase_if(plan.deliveries,
                    [&](const Delivery& del) { return del.nickname != sender.nickname; });
      std::erase_if(plan.rejected,
                    [&](const Rejection& r) { return r.nickname != sender.nickname; });
      if (plan.deliveries.empty() && plan.rejected.empty()) {
        plan.rejected.push_back({sender.nickname, "not addressed by this designation"});
      }
    }
    plan.mechanism = "self";
  } else {
    route(plan, sender, d, what, 0, true);
  }
  if (plan.deliveries.empty()) throw RoutingError(plan.rejected);
  return plan;
}

Partition Performance::resolve_fraction(const FractionalAssignment& a) {
  require_live();
  if (a.fractions.size() < 2) throw Error("invalid", "a fractional assignment needs >= 2 fractions");
  std::vector<std::string> group;
  for (const auto& p : roster_) {
    if (a.target_roles.empty() || contains(a.target_roles, p.role_name)) {
      group.push_back(p.nickname);
    }
  }
  if (group.empty()) throw Error("no-receivers", "'" + a.name + "' targets nobody present");

  if (a.mode == FractionMode::Dynamic) {
    seeded_shuffle(group, rng_);
    return balanced_chunks(group, a.fractions.size());
  }

  auto it = fraction_memory_.find(a.id);
  if (it == fraction_memory_.end()) {
    seeded_shuffle(group, rng_);
    it = fraction_memory_.emplace(a.id, balanced_chunks(group, a.fractions.size())).first;
  } else {
    auto& memory = it->second;
    for (const auto& nick : group) {
      const bool known = std::any_of(memory.begin(), memory.end(),
                                     [&](const auto& f) { return contains(f, nick); });
      if (known) continue;
      // Newcomer joins the fraction with the fewest present members.
      std::size_t best = 0;
      std::size_t best_size = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const auto n = static_cast<std::size_t>(std::count_if(
            memory[i].begin(), memory[i].end(), [&](const auto& m) { return contains(group, m); }));
        if (n < best_size) {
          best = i;
          best_size = n;
        }
      }
      memory[best].push_back(nick);
    }
  }

  Partition present_only(it->second.size());
  for (std::size_t i = 0; i < it->second.size(); ++i) {
    for (const auto& nick : it->second[i]) {
      if (contains(group, nick)) present_only[i].push_back(nick);
    }
  }
  return present_only;
}

DispatchResult Performance::dispatch(std::string_view sender, const Designation& d,
                                     const Outgoing& what) {
  auto plan = resolve_targets(sender, d, what);
  return finish(*find(sender), std::move(plan), d, what);
}

DispatchResult Performance::dispatch_external(const std::string& label, const Designation& d,
                                              const Outgoing& what) {
  require_live();
  Performer source;
  source.nickname = label;
  source.capabilities = CapabilitySet::all();
  RoutingPlan plan;
  route(plan, source, d, what, 0, true);
  if (plan.deliveries.empty()) throw RoutingError(plan.rejected);
  return finish(source, std::move(plan), d, what);
}

DispatchResult Performance::finish(const Performer& who, RoutingPlan plan, const Designation& d,
                                   const Outgoing& what) {
  const auto now = clock_.now();

  DispatchResult out;
  auto& env = out.envelope;
  env.cue_id = name_ + "/" + std::to_string(next_cue_++);
  env.sender = who.nickname;
  env.test = who.test_mode;
  env.schedule = timing::schedule_cue(now, delay_budget_ms());
  if (d.algorithm) {
    env.verb = "run algorithm";
    env.content_name = display_name(*d.algorithm);
  } else if (d.fraction) {
    env.verb = "send fraction";
    env.content_name = display_name(*d.fraction);
  } else if (d.multi_role) {
    env.verb = "send multi-role";
    env.content_name = display_name(*d.multi_role);
  } else {
    env.verb = verb_for(what);
    env.content_name = what.kind == Outgoing::Kind::Stored ? display_name(what.content_id)
                       : what.kind == Outgoing::Kind::Osc  ? what.osc.address
                                                           : what.text;
  }
  env.deliveries = std::move(plan.deliveries);
  for (auto& del : env.deliveries) del.execute_at = env.schedule.execute_at + del.offset_ms;

  auto& e = out.entry;
  e.seq = log_.size() + 1;
  e.timestamp_ms = std::max(now, last_log_ms_);
  last_log_ms_ = e.timestamp_ms;
  e.sender = env.sender;
  e.verb = env.verb;
  e.content_name = env.content_name;
  e.test = env.test;
  for (const auto& del : env.deliveries) {
    if (!contains(e.receivers, del.nickname)) e.receivers.push_back(del.nickname);
  }
  e.display_time = format_hh_mm(e.timestamp_ms, venue_.utc_offset_minutes);
  log_.push_back(e);
  return out;
}

void Performance::change_role(std::string_view nickname, std::string_view new_role) {
  require_live();
  auto& p = require_performer(nickname);
  if (!p.can(Capability::ChangeRole)) {
    throw Error("capability", p.nickname + " lacks change-role");
  }
  const auto* vr = venue_.find_role(new_role);
  if (!vr) throw Error("unknown-role", "venue has no role '" + std::string(new_role) + "'");
  if (p.role_name == new_role) return;
  if (vr->capacity && role_count(new_role) >= static_cast<std::size_t>(*vr->capacity)) {
    throw Error("capacity", "role '" + std::string(new_role) + "' is full");
  }
  p.role_name = std::string(new_role);
  p.capabilities = vr->role.capabilities;
}

void Performance::change_functionality(std::string_view actor, std::string_view target,
                                       CapabilitySet flags) {
  require_live();
  const auto& a = require_performer(actor);
  if (!a.can(Capability::ChangeFunctionality)) {
    throw Error("capability", a.nickname + " lacks change-functionality");
  }
  require_performer(target).capabilities = flags;
}

void Performance::set_test_mode(std::string_view nickname, bool on) {
  require_live();
  auto& p = require_performer(nickname);
  if (on && !p.can(Capability::TestFunctionality)) {
    throw Error("capability", p.nickname + " lacks test-functionality");
  }
  p.test_mode = on;
}

std::vector<ActivityEntry> Performance::performer_log(std::string_view nickname) const {
  std::vector<ActivityEntry> out;
  for (const auto& e : log_) {
    if (e.sender == nickname || contains(e.receivers, nickname)) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry

PerformanceRegistry::PerformanceRegistry(const Catalog& catalog, const timing::Clock& clock,
                                         std::optional<std::uint64_t> seed)
    : catalog_(catalog), clock_(clock), seed_(seed) {}

Performance& PerformanceRegistry::start(const Venue& venue, std::string name,
                                        const JoinRequest& first) {
  if (name.empty()) throw Error("missing-field", "a performance name is required");
  for (const auto& p : all_) {
    if (p->live() && p->name() == name) {
      throw Error("duplicate-name", "a live performance named '" + name + "' already exists");
    }
  }
  const std::uint64_t seed =
      seed_ ? *seed_ + started_
            : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  auto perf = std::make_unique<Performance>(name, venue, catalog_, clock_, seed);
  perf->join(first);
  ++started_;
  detail::logger()->info("performance '{}' started from venue '{}' (rng seed {})", name, venue.name, seed);
  all_.push_back(std::move(perf));
  return *all_.back();
}

Performance& PerformanceRegistry::live(std::string_view name) {
  bool seen = false;
  for (auto it = all_.rbegin(); it != all_.rend(); ++it) {
    if ((*it)->name() != name) continue;
    if ((*it)->live()) return **it;
    seen = true;
  }
  if (seen) throw Error("gone", "performance '" + std::string(name) + "' has ended");
  throw Error("not-found", "no performance '" + std::string(name) + "'");
}

std::vector<std::string> PerformanceRegistry::live_names() const {
  std::vector<std::string> out;
  for (const auto& p : all_) {
    if (p->live()) out.push_back(p->name());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Performance* PerformanceRegistry::latest(std::string_view name) const {
  for (auto it = all_.rbegin(); it != all_.rend(); ++it) {
    if ((*it)->name() == name) return it->get();
  }
  return nullptr;
}

}  // namespace telebrain::runtime
