#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "telebrain/catalog.hpp"
#include "telebrain/error.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/timing.hpp"

namespace telebrain::runtime {

using timing::Millis;
using ConnectionId = std::uint64_t;

// ---------------------------------------------------------------------------
// Roster

struct JoinRequest {
  std::string nickname;
  std::string role;
  std::optional<std::string> passcode;
  std::optional<std::string> local_ip;
  ConnectionId connection = 0;
};

struct Performer {
  std::string nickname;
  std::string role_name;
  ConnectionId connection = 0;
  std::optional<std::string> local_ip;
  Millis clock_offset_ms = 0;  // client minus server
  bool present = true;
  CapabilitySet capabilities;  // starts as the role's set
  bool test_mode = false;

  bool can(Capability c) const { return capabilities.has(c); }
};

// ---------------------------------------------------------------------------
// Activity log

struct ActivityEntry {
  std::uint64_t seq = 0;
  Millis timestamp_ms = 0;
  std::string sender;
  std::string verb;
  std::string content_name;
  std::vector<std::string> receivers;
  bool test = false;
  std::string display_time;  // HH:MM in the venue's timezone

  /// "Nick: show image: Fsharp4"
  std::string text() const;
  /// text() + '\t' + display_time
  std::string line() const;
};

/// HH:MM of a server timestamp (ms since epoch) shifted by a UTC offset.
std::string format_hh_mm(Millis epoch_ms, int utc_offset_minutes);

// ---------------------------------------------------------------------------
// Cues

/// One renderable piece of a cue as a receiver sees it.
struct CuePart {
  enum class Kind { Audio, Image, Phrase, Text, Tts, Interface, Osc };
  Kind kind = Kind::Audio;
  std::string content_id;
  std::string name;
  std::string blob_id;
  std::int64_t duration_ms = 0;
  std::vector<std::int64_t> offsets_ms;  // sentence member starts
  std::string text;
  std::vector<std::string> steps;      // phrase member ids
  std::vector<std::string> step_blobs; // phrase member blob ids ("" for teleprompts)
  std::optional<osc::Message> osc;
  friend bool operator==(const CuePart&, const CuePart&) = default;
};

std::string_view to_string(CuePart::Kind k);
Capability receive_capability(CuePart::Kind k);

/// What is being sent: a stored object, or something produced live.
struct Outgoing {
  enum class Kind { Stored, Text, Tts, Osc };
  Kind kind = Kind::Stored;
  std::string content_id;  // Stored; Tts: the rendered audio content
  std::string text;        // Text / Tts
  osc::Message osc;        // Osc

  static Outgoing stored(std::string id) { return {Kind::Stored, std::move(id), {}, {}}; }
  static Outgoing live_text(std::string t) { return {Kind::Text, {}, std::move(t), {}}; }
  static Outgoing live_tts(std::string rendered_id, std::string t) {
    return {Kind::Tts, std::move(rendered_id), std::move(t), {}};
  }
  static Outgoing osc_message(osc::Message m) { return {Kind::Osc, {}, {}, std::move(m)}; }
};

struct Delivery {
  ConnectionId connection = 0;
  std::string nickname;
  std::string content_id;
  std::vector<CuePart> parts;
  Millis offset_ms = 0;  // extra delay past the cue's base execute time
  Millis execute_at = 0; // server time
  friend bool operator==(const Delivery&, const Delivery&) = default;
};

struct Rejection {
  std::string nickname;
  std::string reason;
  friend bool operator==(const Rejection&, const Rejection&) = default;
};

/// Resolved targets before scheduling.
struct RoutingPlan {
  /// Which designation field won: "algorithm", "fraction", "multi-role",
  /// "performers", "roles", "all" or "self" (test mode).
  std::string mechanism;
  std::vector<Delivery> deliveries;
  std::vector<Rejection> rejected;
};

struct CueEnvelope {
  std::string cue_id;
  std::string sender;
  std::string verb;
  std::string content_name;
  timing::Schedule schedule;
  std::vector<Delivery> deliveries;
  bool test = false;
};

struct DispatchResult {
  CueEnvelope envelope;
  ActivityEntry entry;
};

/// Routing failed after filtering; reasons are per receiver.
class RoutingError : public Error {
 public:
  explicit RoutingError(std::vector<Rejection> reasons);
  const std::vector<Rejection>& reasons() const noexcept { return reasons_; }

 private:
  std::vector<Rejection> reasons_;
};

// ---------------------------------------------------------------------------
// Fractions

using Partition = std::vector<std::vector<std::string>>;

/// Unbiased draw in [0, n) from a 64-bit engine (rejection sampling), so
/// seeded sequences are identical across standard libraries.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n);
void seeded_shuffle(std::vector<std::string>& items, std::mt19937_64& rng);

/// Split in order into k groups whose sizes differ by at most one, earlier
/// groups taking the extra members.
Partition balanced_chunks(const std::vector<std::string>& items, std::size_t k);

// ---------------------------------------------------------------------------
// Performance

enum class PerformanceState { Live, Destroyed };

class Performance {
 public:
  Performance(std::string name, Venue venue, const Catalog& catalog, const timing::Clock& clock,
              std::uint64_t seed);

  const std::string& name() const { return name_; }
  const Venue& venue() const { return venue_; }
  PerformanceState state() const { return state_; }
  bool live() const { return state_ == PerformanceState::Live; }
  std::uint64_t seed() const { return seed_; }
  Millis delay_budget_ms() const {
    return venue_.delay_budget_ms.value_or(timing::kDefaultDelayBudgetMs);
  }

  /// Errors: "gone", "missing-field", "passcode", "unknown-role",
  /// "nickname-taken", "capacity".
  const Performer& join(const JoinRequest& req);
  /// Removes the performer. Returns true when this destroyed the performance.
  bool leave(std::string_view nickname);
  std::optional<std::string> nickname_for(ConnectionId c) const;

  const std::vector<Performer>& roster() const { return roster_; }
  const Performer* find(std::string_view nickname) const;
  std::size_t role_count(std::string_view role) const;

  void set_clock_offset(std::string_view nickname, Millis offset_ms);

  /// Precedence: algorithm > fraction > multi-role > performers > roles > all.
  /// Throws RoutingError when nobody can receive.
  RoutingPlan resolve_targets(std::string_view sender, const Designation& d,
                              const Outgoing& what);

  /// Returns the memory for persistent assignments, a fresh draw otherwise.
  Partition resolve_fraction(const FractionalAssignment& a);
  const std::map<std::string, Partition>& fraction_memory() const { return fraction_memory_; }

  DispatchResult dispatch(std::string_view sender, const Designation& d, const Outgoing& what);
  /// Dispatch for a source outside the roster (an inbound OSC binding).
  /// No sender capability checks; `label` appears as the log sender.
  DispatchResult dispatch_external(const std::string& label, const Designation& d,
                                   const Outgoing& what);

  /// Errors: "capability", "unknown-role", "capacity".
  void change_role(std::string_view nickname, std::string_view new_role);
  /// `actor` needs change-functionality; `target` gets exactly `flags`.
  void change_functionality(std::string_view actor, std::string_view target,
                            CapabilitySet flags);
  void set_test_mode(std::string_view nickname, bool on);

  const std::vector<ActivityEntry>& global_log() const { return log_; }
  std::vector<ActivityEntry> performer_log(std::string_view nickname) const;

 private:
  void require_live() const;
  Performer& require_performer(std::string_view nickname);
  std::vector<const Performer*> present() const;
  std::vector<CuePart> parts_for(const std::string& content_id) const;
  std::string display_name(const std::string& id) const;
  std::string verb_for(const Outgoing& what) const;
  DispatchResult finish(const Performer& sender, RoutingPlan plan, const Designation& d,
                        const Outgoing& what);
  void route(RoutingPlan& plan, const Performer& sender, Designation d, const Outgoing& what,
             Millis offset, bool top_level);
  void route_content(RoutingPlan& plan, const std::vector<const Performer*>& to,
                     const Outgoing& what, Millis offset) const;
  void route_algorithm(RoutingPlan& plan, const Performer& sender, const AlgorithmObject& alg);
  void route_step(RoutingPlan& plan, const Performer& sender, const DistributionStep& step,
                  Millis offset);
  std::vector<const Performer*> group_for(const Designation& d,
                                          std::vector<Rejection>& rejected) const;
  void check_send_capability(const Performer& sender, const Designation& d,
                             const Outgoing& what) const;

  std::string name_;
  Venue venue_;
  const Catalog& catalog_;
  const timing::Clock& clock_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  PerformanceState state_ = PerformanceState::Live;
  std::vector<Performer> roster_;
  std::map<std::string, Partition> fraction_memory_;
  std::vector<ActivityEntry> log_;
  std::uint64_t next_cue_ = 1;
  Millis last_log_ms_ = 0;
};

/// All performances in a process. Destroyed performances stay queryable.
class PerformanceRegistry {
 public:
  PerformanceRegistry(const Catalog& catalog, const timing::Clock& clock,
                      std::optional<std::uint64_t> seed = std::nullopt);

  /// Errors: "duplicate-name" plus every join error.
  Performance& start(const Venue& venue, std::string name, const JoinRequest& first);
  /// Live performance by name; throws "gone" if only a destroyed one exists,
  /// "not-found" otherwise.
  Performance& live(std::string_view name);
  std::vector<std::string> live_names() const;
  /// Most recent performance (live or destroyed) under this name.
  const Performance* latest(std::string_view name) const;

 private:
  const Catalog& catalog_;
  const timing::Clock& clock_;
  std::optional<std::uint64_t> seed_;
  std::uint64_t started_ = 0;
  std::vector<std::unique_ptr<Performance>> all_;
};

}  // namespace telebrain::runtime
