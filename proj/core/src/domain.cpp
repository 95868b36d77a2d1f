#include "telebrain/domain.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "telebrain/error.hpp"

namespace telebrain {
namespace {

template <typename E, std::size_t N>
std::string_view token_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, s] : table) {
    if (e == value) return s;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> parse_token(const std::array<std::pair<E, std::string_view>, N>& table,
                             std::string_view token) {
  for (const auto& [e, s] : table) {
    if (s == token) return e;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<ContentKind, std::string_view>, 6> kContentKinds{{
    {ContentKind::AudioWeb, "audio-web"},
    {ContentKind::AudioUpload, "audio-upload"},
    {ContentKind::AudioTts, "audio-tts"},
    {ContentKind::ImageWeb, "image-web"},
    {ContentKind::ImageUpload, "image-upload"},
    {ContentKind::Teleprompt, "teleprompt"},
}};

constexpr std::array<std::pair<CollectionKind, std::string_view>, 5> kCollectionKinds{{
    {CollectionKind::Folder, "folder"},
    {CollectionKind::AudioImagePair, "audio-image-pair"},
    {CollectionKind::AudioSentence, "audio-sentence"},
    {CollectionKind::AudioLayer, "audio-layer"},
    {CollectionKind::ImagePhrase, "image-phrase"},
}};

constexpr std::array<std::pair<JoinRequirement, std::string_view>, 3> kJoinRequirements{{
    {JoinRequirement::Nickname, "nickname"},
    {JoinRequirement::LocalIp, "local-ip"},
    {JoinRequirement::Passcode, "passcode"},
}};

constexpr std::array<std::pair<WidgetKind, std::string_view>, 4> kWidgetKinds{{
    {WidgetKind::Button, "button"},
    {WidgetKind::Pulldown, "pulldown"},
    {WidgetKind::TextInput, "text-input"},
    {WidgetKind::DisplayArea, "display-area"},
}};

constexpr std::array<std::pair<FractionMode, std::string_view>, 2> kFractionModes{{
    {FractionMode::Persistent, "persistent"},
    {FractionMode::Dynamic, "dynamic"},
}};

constexpr std::array<std::pair<MediaOrigin::Kind, std::string_view>, 4> kOriginKinds{{
    {MediaOrigin::Kind::WebCopy, "web-copy"},
    {MediaOrigin::Kind::Upload, "upload"},
    {MediaOrigin::Kind::Tts, "tts"},
    {MediaOrigin::Kind::Rendered, "rendered"},
}};

template <typename E, std::size_t N>
E require_token(const std::array<std::pair<E, std::string_view>, N>& table, const Json& j,
                const char* what) {
  const auto s = j.get<std::string>();
  if (auto e = parse_token(table, s)) return *e;
  throw Error("malformed", std::string("unknown ") + what + " '" + s + "'");
}

void add(Violations& out, std::string field, std::string message) {
  out.push_back({std::move(field), std::move(message)});
}

void check_rgb(Violations& out, const std::string& field, const Rgb& c) {
  for (int v : {c.r, c.g, c.b}) {
    if (v < 0 || v > 255) {
      add(out, field, "color components must be 8-bit (0..255)");
      return;
    }
  }
}

template <typename T>
void put_lock(Json& j, const std::optional<T>& lock) {
  if (lock) j["lock"] = *lock;
}

template <typename T>
void get_opt(const Json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->template get<T>();
  } else {
    out.reset();
  }
}

template <typename T>
void get_or(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------

const std::array<std::string_view, kCapabilityCount> kCapabilityTokens{
    "send-text",        "send-tts-live",        "send-image",          "send-audio",
    "send-association", "send-fraction",        "send-osc",            "send-algorithm",
    "receive-text",     "receive-tts-live",     "receive-image",       "receive-audio",
    "receive-interface", "receive-osc",         "show-menu",           "show-title",
    "role-list",        "performer-list",       "performer-activity-log", "global-activity-log",
    "change-role",      "change-interface",     "change-functionality", "test-functionality",
};

std::string_view to_string(ContentKind kind) { return token_of(kContentKinds, kind); }
std::optional<ContentKind> content_kind_from_string(std::string_view t) {
  return parse_token(kContentKinds, t);
}
std::string_view to_string(CollectionKind kind) { return token_of(kCollectionKinds, kind); }
std::optional<CollectionKind> collection_kind_from_string(std::string_view t) {
  return parse_token(kCollectionKinds, t);
}
std::string_view to_string(JoinRequirement r) { return token_of(kJoinRequirements, r); }
std::optional<JoinRequirement> join_requirement_from_string(std::string_view t) {
  return parse_token(kJoinRequirements, t);
}
std::string_view to_string(WidgetKind k) { return token_of(kWidgetKinds, k); }
std::optional<WidgetKind> widget_kind_from_string(std::string_view t) {
  return parse_token(kWidgetKinds, t);
}
std::string_view to_string(FractionMode m) { return token_of(kFractionModes, m); }
std::optional<FractionMode> fraction_mode_from_string(std::string_view t) {
  return parse_token(kFractionModes, t);
}

std::string_view to_string(Capability c) { return kCapabilityTokens[static_cast<std::size_t>(c)]; }

std::optional<Capability> capability_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kCapabilityCount; ++i) {
    if (kCapabilityTokens[i] == token) return static_cast<Capability>(i);
  }
  return std::nullopt;
}

std::vector<Capability> CapabilitySet::list() const {
  std::vector<Capability> out;
  for (std::size_t i = 0; i < kCapabilityCount; ++i) {
    if (bits_.test(i)) out.push_back(static_cast<Capability>(i));
  }
  return out;
}

const VenueRole* Venue::find_role(std::string_view role_name) const {
  for (const auto& r : roles) {
    if (r.role.name == role_name) return &r;
  }
  return nullptr;
}

bool Venue::needs(JoinRequirement r) const {
  return std::find(join_requirements.begin(), join_requirements.end(), r) !=
         join_requirements.end();
}

std::string_view algorithm_kind(const AlgorithmSpec& spec) {
  struct {
    std::string_view operator()(const TimerSpec&) const { return "timer"; }
    std::string_view operator()(const MetronomeSpec&) const { return "metronome"; }
    std::string_view operator()(const OscBindingSpec&) const { return "osc-binding"; }
    std::string_view operator()(const TimedOrganizationSpec&) const { return "timed-organization"; }
    std::string_view operator()(const DistributionOrganizationSpec&) const {
      return "distribution-organization";
    }
  } visitor;
  return std::visit(visitor, spec);
}

// ---------------------------------------------------------------------------
// Validation

Violations validate(const TelepromptSpec& t) {
  Violations out;
  if (t.text.empty()) add(out, "teleprompt.text", "text must not be empty");
  if (t.font.empty()) add(out, "teleprompt.font", "font must not be empty");
  if (!(t.size_pt > 0)) add(out, "teleprompt.size", "size must be positive");
  check_rgb(out, "teleprompt.text_color", t.text_color);
  check_rgb(out, "teleprompt.background_color", t.background_color);
  return out;
}

Violations validate(const ContentObject& c) {
  Violations out;
  if (c.name.empty()) add(out, "name", "name must not be empty");
  if (is_audio(c.kind)) {
    if (c.duration_ms <= 0) add(out, "duration_ms", "audio duration must be > 0");
    if (c.blob_id.empty()) add(out, "blob_id", "audio content needs a media blob");
  } else if (c.duration_ms != 0) {
    add(out, "duration_ms", "only audio content carries a duration");
  }
  if (is_image(c.kind) && c.blob_id.empty()) {
    add(out, "blob_id", "image content needs a media blob");
  }
  if (c.kind == ContentKind::Teleprompt) {
    if (!c.blob_id.empty()) add(out, "blob_id", "teleprompt has no media blob");
    if (!c.teleprompt) {
      add(out, "teleprompt", "teleprompt spec missing");
    } else {
      auto inner = validate(*c.teleprompt);
      out.insert(out.end(), inner.begin(), inner.end());
    }
  } else if (c.teleprompt) {
    add(out, "teleprompt", "only teleprompt content carries a teleprompt spec");
  }
  return out;
}

Violations validate(const Collection& c) {
  Violations out;
  if (c.name.empty()) add(out, "name", "name must not be empty");
  switch (c.kind) {
    case CollectionKind::Folder:
      break;
    case CollectionKind::AudioImagePair:
      if (c.members.size() != 2) {
        add(out, "members", "pair needs exactly one audio and one image member");
      }
      break;
    case CollectionKind::AudioSentence: {
      if (c.members.empty()) add(out, "members", "sentence needs at least one member");
      if (!c.blob_id.empty() || !c.offsets_ms.empty()) {
        if (c.offsets_ms.size() != c.members.size()) {
          add(out, "offsets_ms", "offset list length must equal member list length");
        } else if (!c.offsets_ms.empty()) {
          if (c.offsets_ms.front() != 0) add(out, "offsets_ms", "offsets must start at 0");
          if (!std::is_sorted(c.offsets_ms.begin(), c.offsets_ms.end())) {
            add(out, "offsets_ms", "offsets must be nondecreasing");
          }
        }
        if (c.offsets_samples.size() != c.offsets_ms.size()) {
          add(out, "offsets_samples", "sample offsets must parallel ms offsets");
        }
      }
      break;
    }
    case CollectionKind::AudioLayer:
      if (c.layers.empty()) add(out, "layers", "layer needs at least one entry");
      for (std::size_t i = 0; i < c.layers.size(); ++i) {
        const auto& e = c.layers[i];
        const auto field = "layers[" + std::to_string(i) + "]";
        if (!(e.volume >= 0.0 && e.volume <= 1.0)) add(out, field + ".volume", "volume in [0,1]");
        if (e.start_ms < 0) add(out, field + ".start_ms", "start time must be >= 0");
        if (e.audio_id.empty()) add(out, field + ".audio_id", "audio id missing");
      }
      break;
    case CollectionKind::ImagePhrase:
      if (c.members.empty()) add(out, "members", "phrase needs at least one image");
      break;
  }
  if (c.kind != CollectionKind::AudioLayer && !c.layers.empty()) {
    add(out, "layers", "only audio layers carry layer entries");
  }
  return out;
}

Violations validate(const Role& r) {
  Violations out;
  if (r.name.empty()) add(out, "name", "role name must not be empty");
  return out;
}

Violations validate(const Venue& v) {
  Violations out;
  if (v.name.empty()) add(out, "name", "venue name must not be empty");
  if (v.roles.empty()) add(out, "roles", "at least one role");
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < v.roles.size(); ++i) {
    const auto& vr = v.roles[i];
    const auto field = "roles[" + std::to_string(i) + "]";
    for (const auto& inner : validate(vr.role)) add(out, field + "." + inner.field, inner.message);
    if (vr.capacity && *vr.capacity < 1) add(out, field + ".capacity", "capacity must be >= 1");
    ++seen[vr.role.name];
  }
  std::vector<std::string> dups;
  for (const auto& [name, n] : seen) {
    if (n > 1) dups.push_back(name);
  }
  if (!dups.empty()) {
    std::string list;
    for (const auto& d : dups) list += (list.empty() ? "" : ", ") + d;
    add(out, "roles", "duplicate role names: " + list);
  }
  if (v.delay_budget_ms && *v.delay_budget_ms <= 0) add(out, "delay_budget_ms", "delay budget must be > 0");
  if (v.needs(JoinRequirement::Passcode) && !v.passcode) {
    add(out, "passcode", "passcode required but none set");
  }
  if (v.utc_offset_minutes < -14 * 60 || v.utc_offset_minutes > 14 * 60) {
    add(out, "utc_offset_minutes", "offset out of range");
  }
  return out;
}

Violations validate(const InterfaceObject& i) {
  Violations out;
  if (i.name.empty()) add(out, "name", "name must not be empty");
  for (std::size_t k = 0; k < i.elements.size(); ++k) {
    if (i.elements[k].bound_target.empty()) {
      add(out, "elements[" + std::to_string(k) + "].bound_target", "bound target missing");
    }
  }
  return out;
}

Violations validate(const MultiRoleAssignment& a) {
  Violations out;
  if (a.name.empty()) add(out, "name", "name must not be empty");
  if (a.venue_id.empty()) add(out, "venue_id", "multi-role assignment needs a venue");
  if (a.bindings.empty()) add(out, "bindings", "at least one role binding");
  for (const auto& [role, target] : a.bindings) {
    if (target.empty()) add(out, "bindings." + role, "bound content missing");
  }
  return out;
}

Violations validate(const FractionalAssignment& a) {
  Violations out;
  if (a.name.empty()) add(out, "name", "name must not be empty");
  if (a.fractions.size() < 2) add(out, "fractions", "at least 2 fractions");
  for (std::size_t i = 0; i < a.fractions.size(); ++i) {
    if (a.fractions[i].empty()) {
      add(out, "fractions[" + std::to_string(i) + "]", "fraction content missing");
    }
  }
  return out;
}

namespace {

void check_step(Violations& out, const std::string& field, const DistributionStep& s) {
  if (s.target_id.empty() && !s.designation.multi_role && !s.designation.fraction) {
    add(out, field + ".target_id", "step needs content or an assignment");
  }
  if (s.designation.algorithm) add(out, field + ".designation", "steps cannot nest algorithms");
  if (s.designation.empty()) add(out, field + ".designation", "step needs a designation");
}

}  // namespace

Violations validate(const AlgorithmObject& a) {
  Violations out;
  if (a.name.empty()) add(out, "name", "name must not be empty");
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, TimerSpec>) {
          if (spec.duration_ms <= 0) add(out, "duration_ms", "timer duration must be > 0");
        } else if constexpr (std::is_same_v<T, MetronomeSpec>) {
          if (spec.interval_ms <= 0) add(out, "interval_ms", "metronome interval must be > 0");
        } else if constexpr (std::is_same_v<T, OscBindingSpec>) {
          if (spec.address.empty() || spec.address.front() != '/') {
            add(out, "address", "address pattern must begin with '/'");
          }
          if (spec.target_id.empty()) add(out, "target_id", "binding target missing");
        } else if constexpr (std::is_same_v<T, TimedOrganizationSpec>) {
          if (spec.entries.empty()) add(out, "entries", "at least one timed entry");
          for (std::size_t i = 0; i < spec.entries.size(); ++i) {
            const auto f = "entries[" + std::to_string(i) + "]";
            if (spec.entries[i].trigger_id.empty()) add(out, f + ".trigger_id", "trigger missing");
            if (spec.entries[i].repeat < 1) add(out, f + ".repeat", "repeat must be >= 1");
            check_step(out, f + ".action", spec.entries[i].action);
          }
        } else {
          if (spec.steps.empty()) add(out, "steps", "at least one distribution step");
          for (std::size_t i = 0; i < spec.steps.size(); ++i) {
            check_step(out, "steps[" + std::to_string(i) + "]", spec.steps[i]);
          }
        }
      },
      a.spec);
  return out;
}

std::string describe(const Violations& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << "; ";
    os << v[i].field << ": " << v[i].message;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const Rgb& v) { j = Json::array({v.r, v.g, v.b}); }
void from_json(const Json& j, Rgb& v) {
  if (!j.is_array() || j.size() != 3) throw Error("malformed", "color must be [r,g,b]");
  v = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

void to_json(Json& j, const TelepromptSpec& v) {
  j = Json{{"text", v.text},
           {"font", v.font},
           {"size", v.size_pt},
           {"text_color", v.text_color},
           {"background_color", v.background_color}};
}
void from_json(const Json& j, TelepromptSpec& v) {
  v = {};
  v.text = j.at("text").get<std::string>();
  get_or(j, "font", v.font);
  get_or(j, "size", v.size_pt);
  get_or(j, "text_color", v.text_color);
  get_or(j, "background_color", v.background_color);
}

void to_json(Json& j, const LockRecord& v) { j = Json{{"salt", v.salt}, {"digest", v.digest}}; }
void from_json(const Json& j, LockRecord& v) {
  v.salt = j.at("salt").get<std::string>();
  v.digest = j.at("digest").get<std::string>();
}

void to_json(Json& j, const MediaOrigin& v) {
  j = Json{{"kind", token_of(kOriginKinds, v.kind)}};
  if (!v.url.empty()) j["url"] = v.url;
  if (!v.language.empty()) j["language"] = v.language;
  if (!v.text.empty()) j["text"] = v.text;
  if (!v.rendered.empty()) j["rendered"] = v.rendered;
}
void from_json(const Json& j, MediaOrigin& v) {
  v = {};
  v.kind = require_token(kOriginKinds, j.at("kind"), "origin kind");
  get_or(j, "url", v.url);
  get_or(j, "language", v.language);
  get_or(j, "text", v.text);
  get_or(j, "rendered", v.rendered);
}

void to_json(Json& j, const ContentObject& v) {
  j = Json{{"id", v.id}, {"kind", to_string(v.kind)}, {"name", v.name}};
  if (!v.blob_id.empty()) j["blob_id"] = v.blob_id;
  if (!v.source_url.empty()) j["source_url"] = v.source_url;
  if (!v.mime.empty()) j["mime"] = v.mime;
  if (v.origin) j["origin"] = *v.origin;
  if (v.teleprompt) j["teleprompt"] = *v.teleprompt;
  if (is_audio(v.kind) || v.duration_ms != 0) j["duration_ms"] = v.duration_ms;
  put_lock(j, v.lock);
}
void from_json(const Json& j, ContentObject& v) {
  v = {};
  get_or(j, "id", v.id);
  v.kind = require_token(kContentKinds, j.at("kind"), "content kind");
  get_or(j, "name", v.name);
  get_or(j, "blob_id", v.blob_id);
  get_or(j, "source_url", v.source_url);
  get_or(j, "mime", v.mime);
  get_opt(j, "origin", v.origin);
  get_opt(j, "teleprompt", v.teleprompt);
  get_or(j, "duration_ms", v.duration_ms);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const LayerEntry& v) {
  j = Json{{"audio_id", v.audio_id}, {"start_ms", v.start_ms}, {"volume", v.volume}};
}
void from_json(const Json& j, LayerEntry& v) {
  v = {};
  v.audio_id = j.at("audio_id").get<std::string>();
  get_or(j, "start_ms", v.start_ms);
  get_or(j, "volume", v.volume);
}

void to_json(Json& j, const Collection& v) {
  j = Json{{"id", v.id}, {"kind", to_string(v.kind)}, {"name", v.name}};
  if (v.kind != CollectionKind::AudioLayer) j["members"] = v.members;
  if (v.kind == CollectionKind::AudioLayer) j["layers"] = v.layers;
  if (v.kind == CollectionKind::AudioSentence) {
    j["offsets_ms"] = v.offsets_ms;
    j["offsets_samples"] = v.offsets_samples;
  }
  if (!v.blob_id.empty()) j["blob_id"] = v.blob_id;
  if (renders_audio(v.kind)) j["duration_ms"] = v.duration_ms;
  put_lock(j, v.lock);
}
void from_json(const Json& j, Collection& v) {
  v = {};
  get_or(j, "id", v.id);
  v.kind = require_token(kCollectionKinds, j.at("kind"), "collection kind");
  get_or(j, "name", v.name);
  get_or(j, "members", v.members);
  get_or(j, "layers", v.layers);
  get_or(j, "offsets_ms", v.offsets_ms);
  get_or(j, "offsets_samples", v.offsets_samples);
  get_or(j, "blob_id", v.blob_id);
  get_or(j, "duration_ms", v.duration_ms);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const CapabilitySet& v) {
  j = Json::array();
  for (auto c : v.list()) j.push_back(to_string(c));
}
void from_json(const Json& j, CapabilitySet& v) {
  v = {};
  for (const auto& t : j) {
    const auto s = t.get<std::string>();
    auto c = capability_from_string(s);
    if (!c) throw Error("malformed", "unknown capability flag '" + s + "'");
    v.set(*c);
  }
}

Json capability_map(const CapabilitySet& caps) {
  Json j = Json::object();
  for (std::size_t i = 0; i < kCapabilityCount; ++i) {
    j[std::string(kCapabilityTokens[i])] = caps.has(static_cast<Capability>(i));
  }
  return j;
}

void to_json(Json& j, const Role& v) {
  j = Json{{"name", v.name}, {"capabilities", v.capabilities}, {"audio_required", v.audio_required}};
  if (!v.id.empty()) j["id"] = v.id;
  put_lock(j, v.lock);
}
void from_json(const Json& j, Role& v) {
  v = {};
  get_or(j, "id", v.id);
  v.name = j.at("name").get<std::string>();
  get_or(j, "capabilities", v.capabilities);
  get_or(j, "audio_required", v.audio_required);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const VenueRole& v) {
  j = Json{{"role", v.role}};
  if (v.capacity) j["capacity"] = *v.capacity;
}
void from_json(const Json& j, VenueRole& v) {
  v = {};
  v.role = j.at("role").get<Role>();
  get_opt(j, "capacity", v.capacity);
}

void to_json(Json& j, const Venue& v) {
  j = Json{{"id", v.id},
           {"name", v.name},
           {"roles", v.roles},
           {"utc_offset_minutes", v.utc_offset_minutes}};
  Json reqs = Json::array();
  for (auto r : v.join_requirements) reqs.push_back(to_string(r));
  j["join_requirements"] = reqs;
  if (v.delay_budget_ms) j["delay_budget_ms"] = *v.delay_budget_ms;
  if (v.passcode) j["passcode"] = *v.passcode;
  put_lock(j, v.lock);
}
void from_json(const Json& j, Venue& v) {
  v = {};
  get_or(j, "id", v.id);
  v.name = j.at("name").get<std::string>();
  get_or(j, "roles", v.roles);
  if (auto it = j.find("join_requirements"); it != j.end()) {
    v.join_requirements.clear();
    for (const auto& t : *it) {
      v.join_requirements.push_back(require_token(kJoinRequirements, t, "join requirement"));
    }
  }
  if (auto it = j.find("passcode"); it != j.end() && it->is_object()) {
    v.passcode = it->get<LockRecord>();
  }
  get_opt(j, "delay_budget_ms", v.delay_budget_ms);
  get_or(j, "utc_offset_minutes", v.utc_offset_minutes);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const InterfaceElement& v) {
  j = Json{{"widget", to_string(v.widget)}, {"bound_target", v.bound_target}};
}
void from_json(const Json& j, InterfaceElement& v) {
  v.widget = require_token(kWidgetKinds, j.at("widget"), "widget kind");
  v.bound_target = j.at("bound_target").get<std::string>();
}

void to_json(Json& j, const InterfaceObject& v) {
  j = Json{{"id", v.id}, {"name", v.name}, {"elements", v.elements}};
  put_lock(j, v.lock);
}
void from_json(const Json& j, InterfaceObject& v) {
  v = {};
  get_or(j, "id", v.id);
  get_or(j, "name", v.name);
  get_or(j, "elements", v.elements);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const Designation& v) {
  j = Json::object();
  if (v.all) j["all"] = true;
  if (!v.roles.empty()) j["roles"] = v.roles;
  if (!v.performers.empty()) j["performers"] = v.performers;
  if (v.multi_role) j["multi_role"] = *v.multi_role;
  if (v.fraction) j["fraction"] = *v.fraction;
  if (v.algorithm) j["algorithm"] = *v.algorithm;
}
void from_json(const Json& j, Designation& v) {
  v = {};
  get_or(j, "all", v.all);
  get_or(j, "roles", v.roles);
  get_or(j, "performers", v.performers);
  get_opt(j, "multi_role", v.multi_role);
  get_opt(j, "fraction", v.fraction);
  get_opt(j, "algorithm", v.algorithm);
}

void to_json(Json& j, const MultiRoleAssignment& v) {
  j = Json{{"id", v.id}, {"name", v.name}, {"venue_id", v.venue_id}, {"bindings", v.bindings}};
  put_lock(j, v.lock);
}
void from_json(const Json& j, MultiRoleAssignment& v) {
  v = {};
  get_or(j, "id", v.id);
  get_or(j, "name", v.name);
  get_or(j, "venue_id", v.venue_id);
  get_or(j, "bindings", v.bindings);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const FractionalAssignment& v) {
  j = Json{{"id", v.id},
           {"name", v.name},
           {"target", v.target_roles.empty() ? Json("ALL") : Json(v.target_roles)},
           {"mode", to_string(v.mode)},
           {"fractions", v.fractions}};
  put_lock(j, v.lock);
}
void from_json(const Json& j, FractionalAssignment& v) {
  v = {};
  get_or(j, "id", v.id);
  get_or(j, "name", v.name);
  if (auto it = j.find("target"); it != j.end() && it->is_array()) {
    v.target_roles = it->get<std::vector<std::string>>();
  } else if (it != j.end() && !(it->is_string() && it->get<std::string>() == "ALL")) {
    throw Error("malformed", "fraction target must be \"ALL\" or a role-name list");
  }
  if (auto it = j.find("mode"); it != j.end()) {
    v.mode = require_token(kFractionModes, *it, "fraction mode");
  }
  get_or(j, "fractions", v.fractions);
  get_opt(j, "lock", v.lock);
}

void to_json(Json& j, const DistributionStep& v) {
  j = Json{{"target_id", v.target_id}, {"designation", v.designation}};
}
void from_json(const Json& j, DistributionStep& v) {
  v = {};
  get_or(j, "target_id", v.target_id);
  get_or(j, "designation", v.designation);
}

void to_json(Json& j, const AlgorithmObject& v) {
  j = Json{{"id", v.id}, {"name", v.name}, {"kind", algorithm_kind(v.spec)}};
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, TimerSpec>) {
          j["duration_ms"] = spec.duration_ms;
        } else if constexpr (std::is_same_v<T, MetronomeSpec>) {
          j["interval_ms"] = spec.interval_ms;
          j["synchronized"] = spec.synchronized;
        } else if constexpr (std::is_same_v<T, OscBindingSpec>) {
          j["direction"] = spec.direction == OscDirection::In ? "in" : "out";
          j["address"] = spec.address;
          j["target_id"] = spec.target_id;
        } else if constexpr (std::is_same_v<T, TimedOrganizationSpec>) {
          Json entries = Json::array();
          for (const auto& e : spec.entries) {
            entries.push_back(
                Json{{"trigger_id", e.trigger_id}, {"action", e.action}, {"repeat", e.repeat}});
          }
          j["entries"] = entries;
        } else {
          j["steps"] = spec.steps;
        }
      },
      v.spec);
  put_lock(j, v.lock);
}

void from_json(const Json& j, AlgorithmObject& v) {
  v = {};
  get_or(j, "id", v.id);
  get_or(j, "name", v.name);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "timer") {
    v.spec = TimerSpec{j.at("duration_ms").get<std::int64_t>()};
  } else if (kind == "metronome") {
    MetronomeSpec m;
    m.interval_ms = j.at("interval_ms").get<std::int64_t>();
    get_or(j, "synchronized", m.synchronized);
    v.spec = m;
  } else if (kind == "osc-binding") {
    OscBindingSpec o;
    const auto dir = j.value("direction", std::string("in"));
    if (dir != "in" && dir != "out") throw Error("malformed", "osc direction must be in|out");
    o.direction = dir == "in" ? OscDirection::In : OscDirection::Out;
    o.address = j.at("address").get<std::string>();
    get_or(j, "target_id", o.target_id);
    v.spec = o;
  } else if (kind == "timed-organization") {
    TimedOrganizationSpec t;
    for (const auto& e : j.at("entries")) {
      TimedEntry te;
      te.trigger_id = e.at("trigger_id").get<std::string>();
      te.action = e.at("action").get<DistributionStep>();
      get_or(e, "repeat", te.repeat);
      t.entries.push_back(std::move(te));
    }
    v.spec = t;
  } else if (kind == "distribution-organization") {
    v.spec = DistributionOrganizationSpec{j.at("steps").get<std::vector<DistributionStep>>()};
  } else {
    throw Error("malformed", "unknown algorithm kind '" + kind + "'");
  }
  get_opt(j, "lock", v.lock);
}

}  // namespace telebrain
