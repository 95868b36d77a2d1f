#pragma once

// Persistent value types shared by every subsystem: content, collections,
// roles, venues, interfaces, assignments and algorithms.

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace telebrain {

using Json = nlohmann::json;

/// Current on-disk / wire document format.
inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Content

enum class ContentKind { AudioWeb, AudioUpload, AudioTts, ImageWeb, ImageUpload, Teleprompt };

std::string_view to_string(ContentKind kind);
std::optional<ContentKind> content_kind_from_string(std::string_view token);

constexpr bool is_audio(ContentKind k) {
  return k == ContentKind::AudioWeb || k == ContentKind::AudioUpload || k == ContentKind::AudioTts;
}
constexpr bool is_image(ContentKind k) {
  return k == ContentKind::ImageWeb || k == ContentKind::ImageUpload;
}

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct TelepromptSpec {
  std::string text;
  std::string font = "sans-serif";
  double size_pt = 48.0;
  Rgb text_color{255, 255, 255};
  Rgb background_color{0, 0, 0};
  friend bool operator==(const TelepromptSpec&, const TelepromptSpec&) = default;
};

/// Salted passcode digest. The plaintext passcode is never stored.
struct LockRecord {
  std::string salt;    // hex
  std::string digest;  // hex SHA-256(salt || passcode)
  friend bool operator==(const LockRecord&, const LockRecord&) = default;
};

/// Where a media blob came from.
struct MediaOrigin {
  enum class Kind { WebCopy, Upload, Tts, Rendered };
  Kind kind = Kind::Upload;
  std::string url;       // web-copy
  std::string language;  // tts
  std::string text;      // tts
  std::string rendered;  // "sentence" | "layer"
  friend bool operator==(const MediaOrigin&, const MediaOrigin&) = default;
};

struct ContentObject {
  std::string id;
  ContentKind kind = ContentKind::AudioUpload;
  std::string name;
  std::string blob_id;     // empty for teleprompts
  std::string source_url;  // web kinds
  std::string mime;
  std::optional<MediaOrigin> origin;
  std::optional<TelepromptSpec> teleprompt;
  std::int64_t duration_ms = 0;  // audio kinds only
  std::optional<LockRecord> lock;
  friend bool operator==(const ContentObject&, const ContentObject&) = default;
};

// ---------------------------------------------------------------------------
// Collections

enum class CollectionKind { Folder, AudioImagePair, AudioSentence, AudioLayer, ImagePhrase };

std::string_view to_string(CollectionKind kind);
std::optional<CollectionKind> collection_kind_from_string(std::string_view token);

struct LayerEntry {
  std::string audio_id;
  std::int64_t start_ms = 0;
  double volume = 1.0;
  friend bool operator==(const LayerEntry&, const LayerEntry&) = default;
};

/// Kind-specific members:
///   folder   - members: unordered content/collection ids
///   pair     - members: {audio id, image id}
///   sentence - members: ordered audio ids; offsets_ms / offsets_samples computed at render
///   layer    - layers
///   phrase   - members: ordered image ids
/// Sentences and layers carry a rendered blob and behave as audio objects.
struct Collection {
  std::string id;
  CollectionKind kind = CollectionKind::Folder;
  std::string name;
  std::vector<std::string> members;
  std::vector<LayerEntry> layers;
  std::vector<std::int64_t> offsets_ms;
  std::vector<std::int64_t> offsets_samples;
  std::string blob_id;
  std::int64_t duration_ms = 0;
  std::optional<LockRecord> lock;
  friend bool operator==(const Collection&, const Collection&) = default;
};

constexpr bool renders_audio(CollectionKind k) {
  return k == CollectionKind::AudioSentence || k == CollectionKind::AudioLayer;
}

// ---------------------------------------------------------------------------
// Capabilities

enum class Capability : std::uint8_t {
  SendText,
  SendTtsLive,
  SendImage,
  SendAudio,
  SendAssociation,
  SendFraction,
  SendOsc,
  SendAlgorithm,
  ReceiveText,
  ReceiveTtsLive,
  ReceiveImage,
  ReceiveAudio,
  ReceiveInterface,
  ReceiveOsc,
  ShowMenu,
  ShowTitle,
  RoleList,
  PerformerList,
  PerformerActivityLog,
  GlobalActivityLog,
  ChangeRole,
  ChangeInterface,
  ChangeFunctionality,
  TestFunctionality,
};

inline constexpr std::size_t kCapabilityCount = 24;

/// Wire tokens, indexed by Capability.
extern const std::array<std::string_view, kCapabilityCount> kCapabilityTokens;

std::string_view to_string(Capability c);
std::optional<Capability> capability_from_string(std::string_view token);

class CapabilitySet {
 public:
  CapabilitySet() = default;
  CapabilitySet(std::initializer_list<Capability> caps) {
    for (auto c : caps) set(c);
  }

  static CapabilitySet all() {
    CapabilitySet s;
    s.bits_.set();
    return s;
  }

  bool has(Capability c) const { return bits_.test(static_cast<std::size_t>(c)); }
  CapabilitySet& set(Capability c, bool on = true) {
    bits_.set(static_cast<std::size_t>(c), on);
    return *this;
  }
  std::size_t count() const { return bits_.count(); }
  std::vector<Capability> list() const;

  friend bool operator==(const CapabilitySet&, const CapabilitySet&) = default;

 private:
  std::bitset<kCapabilityCount> bits_;
};

// ---------------------------------------------------------------------------
// Program setup

struct Role {
  std::string id;
  std::string name;
  CapabilitySet capabilities;
  bool audio_required = false;
  std::optional<LockRecord> lock;
  friend bool operator==(const Role&, const Role&) = default;
};

enum class JoinRequirement { Nickname, LocalIp, Passcode };

std::string_view to_string(JoinRequirement r);
std::optional<JoinRequirement> join_requirement_from_string(std::string_view token);

struct VenueRole {
  Role role;
  std::optional<int> capacity;
  friend bool operator==(const VenueRole&, const VenueRole&) = default;
};

struct Venue {
  std::string id;
  std::string name;
  std::vector<VenueRole> roles;
  std::optional<LockRecord> passcode;
  std::vector<JoinRequirement> join_requirements{JoinRequirement::Nickname};
  std::optional<std::int64_t> delay_budget_ms;  // unset: server default
  int utc_offset_minutes = 0;
  std::optional<LockRecord> lock;

  const VenueRole* find_role(std::string_view role_name) const;
  bool needs(JoinRequirement r) const;
  friend bool operator==(const Venue&, const Venue&) = default;
};

enum class WidgetKind { Button, Pulldown, TextInput, DisplayArea };

std::string_view to_string(WidgetKind k);
std::optional<WidgetKind> widget_kind_from_string(std::string_view token);

struct InterfaceElement {
  WidgetKind widget = WidgetKind::Button;
  std::string bound_target;
  friend bool operator==(const InterfaceElement&, const InterfaceElement&) = default;
};

struct InterfaceObject {
  std::string id;
  std::string name;
  std::vector<InterfaceElement> elements;
  std::optional<LockRecord> lock;
  friend bool operator==(const InterfaceObject&, const InterfaceObject&) = default;
};

// ---------------------------------------------------------------------------
// Routing designations and assignments

/// What a sender selected. Several fields may be set at once; the routing
/// layer applies the precedence algorithm > fraction > multi-role >
/// performers > roles > all.
struct Designation {
  bool all = false;
  std::vector<std::string> roles;
  std::vector<std::string> performers;  // nicknames
  std::optional<std::string> multi_role;
  std::optional<std::string> fraction;
  std::optional<std::string> algorithm;

  bool empty() const {
    return !all && roles.empty() && performers.empty() && !multi_role && !fraction && !algorithm;
  }
  friend bool operator==(const Designation&, const Designation&) = default;
};

struct MultiRoleAssignment {
  std::string id;
  std::string name;
  std::string venue_id;
  std::map<std::string, std::string> bindings;  // role name -> content/collection id
  std::optional<LockRecord> lock;
  friend bool operator==(const MultiRoleAssignment&, const MultiRoleAssignment&) = default;
};

enum class FractionMode { Persistent, Dynamic };

std::string_view to_string(FractionMode m);
std::optional<FractionMode> fraction_mode_from_string(std::string_view token);

struct FractionalAssignment {
  std::string id;
  std::string name;
  std::vector<std::string> target_roles;  // empty = ALL performers
  FractionMode mode = FractionMode::Persistent;
  std::vector<std::string> fractions;  // content/collection id per fraction
  std::optional<LockRecord> lock;
  friend bool operator==(const FractionalAssignment&, const FractionalAssignment&) = default;
};

// ---------------------------------------------------------------------------
// Algorithms

struct TimerSpec {
  std::int64_t duration_ms = 0;
  friend bool operator==(const TimerSpec&, const TimerSpec&) = default;
};

struct MetronomeSpec {
  std::int64_t interval_ms = 0;
  bool synchronized = true;
  friend bool operator==(const MetronomeSpec&, const MetronomeSpec&) = default;
};

enum class OscDirection { In, Out };

struct OscBindingSpec {
  OscDirection direction = OscDirection::In;
  std::string address;
  std::string target_id;
  friend bool operator==(const OscBindingSpec&, const OscBindingSpec&) = default;
};

struct DistributionStep {
  std::string target_id;  // content / collection / assignment id
  Designation designation;
  friend bool operator==(const DistributionStep&, const DistributionStep&) = default;
};

struct TimedEntry {
  std::string trigger_id;  // timer or metronome algorithm id
  DistributionStep action;
  int repeat = 1;          // metronome ticks to fire on (timers fire once)
  friend bool operator==(const TimedEntry&, const TimedEntry&) = default;
};

struct TimedOrganizationSpec {
  std::vector<TimedEntry> entries;
  friend bool operator==(const TimedOrganizationSpec&, const TimedOrganizationSpec&) = default;
};

struct DistributionOrganizationSpec {
  std::vector<DistributionStep> steps;
  friend bool operator==(const DistributionOrganizationSpec&,
                         const DistributionOrganizationSpec&) = default;
};

using AlgorithmSpec = std::variant<TimerSpec, MetronomeSpec, OscBindingSpec, TimedOrganizationSpec,
                                   DistributionOrganizationSpec>;

struct AlgorithmObject {
  std::string id;
  std::string name;
  AlgorithmSpec spec;
  std::optional<LockRecord> lock;
  friend bool operator==(const AlgorithmObject&, const AlgorithmObject&) = default;
};

std::string_view algorithm_kind(const AlgorithmSpec& spec);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string field;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

using Violations = std::vector<Violation>;

// Structural checks only. Cross-object checks (references resolve, roles
// can receive bound content) live in the content store.
Violations validate(const TelepromptSpec& t);
Violations validate(const ContentObject& c);
Violations validate(const Collection& c);
Violations validate(const Role& r);
Violations validate(const Venue& v);
Violations validate(const InterfaceObject& i);
Violations validate(const MultiRoleAssignment& a);
Violations validate(const FractionalAssignment& a);
Violations validate(const AlgorithmObject& a);

std::string describe(const Violations& v);

// ---------------------------------------------------------------------------
// Canonical JSON

void to_json(Json& j, const Rgb& v);
void from_json(const Json& j, Rgb& v);
void to_json(Json& j, const TelepromptSpec& v);
void from_json(const Json& j, TelepromptSpec& v);
void to_json(Json& j, const LockRecord& v);
void from_json(const Json& j, LockRecord& v);
void to_json(Json& j, const MediaOrigin& v);
void from_json(const Json& j, MediaOrigin& v);
void to_json(Json& j, const ContentObject& v);
void from_json(const Json& j, ContentObject& v);
void to_json(Json& j, const LayerEntry& v);
void from_json(const Json& j, LayerEntry& v);
void to_json(Json& j, const Collection& v);
void from_json(const Json& j, Collection& v);
void to_json(Json& j, const CapabilitySet& v);
void from_json(const Json& j, CapabilitySet& v);
void to_json(Json& j, const Role& v);
void from_json(const Json& j, Role& v);
void to_json(Json& j, const VenueRole& v);
void from_json(const Json& j, VenueRole& v);
void to_json(Json& j, const Venue& v);
void from_json(const Json& j, Venue& v);
void to_json(Json& j, const InterfaceElement& v);
void from_json(const Json& j, InterfaceElement& v);
void to_json(Json& j, const InterfaceObject& v);
void from_json(const Json& j, InterfaceObject& v);
void to_json(Json& j, const Designation& v);
void from_json(const Json& j, Designation& v);
void to_json(Json& j, const MultiRoleAssignment& v);
void from_json(const Json& j, MultiRoleAssignment& v);
void to_json(Json& j, const FractionalAssignment& v);
void from_json(const Json& j, FractionalAssignment& v);
void to_json(Json& j, const DistributionStep& v);
void from_json(const Json& j, DistributionStep& v);
void to_json(Json& j, const AlgorithmObject& v);
void from_json(const Json& j, AlgorithmObject& v);

/// Capability map {"send-text": true, ...} with every flag present.
Json capability_map(const CapabilitySet& caps);

}  // namespace telebrain
