#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "telebrain/catalog.hpp"
#include "telebrain/error.hpp"

namespace telebrain::perpl {

using Millis = std::int64_t;

// --- Instructions ---------------------------------------------------------

struct Step {
  enum class Kind { Play, Show, Pause, Layer };

  Kind kind = Kind::Play;
  /// Play/Show: one id. Layer: the simultaneously sounding ids.
  std::vector<std::string> ids;
  Millis pause_ms = 0;
  /// Set when the audio is a spoken phrase. Performers understand speech
  /// without training, so an unbound spoken step never confuses them.
  std::optional<std::string> speech;

  static Step play(std::string id) { return {Kind::Play, {std::move(id)}, 0, std::nullopt}; }
  static Step say(std::string id, std::string text) {
    return {Kind::Play, {std::move(id)}, 0, std::move(text)};
  }
  static Step show(std::string id) { return {Kind::Show, {std::move(id)}, 0, std::nullopt}; }
  static Step pause(Millis ms) { return {Kind::Pause, {}, ms, std::nullopt}; }
  static Step layer(std::vector<std::string> ids) {
    return {Kind::Layer, std::move(ids), 0, std::nullopt};
  }

  friend bool operator==(const Step&, const Step&) = default;
};

/// A named action. "stand" and "sit" set posture, "stand/sit-switch"
/// toggles it; anything else is performed as given.
struct ActionMeaning {
  std::string action;
  friend bool operator==(const ActionMeaning&, const ActionMeaning&) = default;
};

/// if (performing condition) { then } else { otherwise }, spelled with sounds.
struct ConditionalMeaning {
  std::string if_tone;
  std::string condition;
  std::string then_sound;
  std::string else_sound;
  std::string else_action_sound;
  friend bool operator==(const ConditionalMeaning&, const ConditionalMeaning&) = default;
};

/// What hearing `trigger` asks for: a named action or a whole conditional.
/// The reserved actions "if" and "else" teach the conditional markers.
struct Binding {
  std::string trigger;
  std::variant<ActionMeaning, ConditionalMeaning> behavior;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct TriggerDefinitionMeaning {
  Binding binding;
  friend bool operator==(const TriggerDefinitionMeaning&, const TriggerDefinitionMeaning&) = default;
};

struct TrainingMeaning {
  std::vector<Binding> bindings;
  friend bool operator==(const TrainingMeaning&, const TrainingMeaning&) = default;
};

using Meaning =
    std::variant<TriggerDefinitionMeaning, ActionMeaning, ConditionalMeaning, TrainingMeaning>;

inline constexpr std::string_view kIfAction = "if";
inline constexpr std::string_view kElseAction = "else";
inline constexpr std::string_view kSwitchAction = "stand/sit-switch";

struct PerplInstruction {
  std::vector<Step> steps;
  std::optional<Meaning> meaning;

  /// Throws Error("invalid") for a negative pause or an empty layer.
  void check() const;
  /// Concatenation, the `+` of the pseudocode. The meaning of the left side wins.
  PerplInstruction operator+(const PerplInstruction& rhs) const;

  friend bool operator==(const PerplInstruction&, const PerplInstruction&) = default;
};

Json to_json(const Step& s);
Step step_from_json(const Json& j);
Json to_json(const PerplInstruction& i);
/// Throws Error("malformed") or Error("invalid").
PerplInstruction instruction_from_json(const Json& j);

/// Ordered audio ids of an instruction made only of plays, i.e. the member
/// list of the Audio Sentence that realizes it. Throws Error("invalid")
/// for any other step kind.
std::vector<std::string> sentence_plan(const PerplInstruction& i);

// --- Builders ---------------------------------------------------------------

class Builder {
 public:
  struct Options {
    /// Audio id of the spoken "When you hear this sound" phrase.
    std::string when_phrase_id = "when-you-hear-this-sound";
    std::string when_phrase_text = "When you hear this sound";
  };

  explicit Builder(const Catalog& catalog) : Builder(catalog, Options{}) {}
  Builder(const Catalog& catalog, Options options)
      : catalog_(catalog), options_(std::move(options)) {}

  /// [when, trigger, body...] binding trigger to the body's action or
  /// conditional. Throws Error("non-audio-media") for a trigger that is
  /// not audio, Error("empty-body") for a body without steps, and
  /// Error("invalid") for a body that carries neither meaning.
  PerplInstruction training(const std::string& trigger, const PerplInstruction& body) const;
  /// Several bindings taught in one routine (e.g. opening and closing
  /// quotation sounds).
  PerplInstruction training(
      const std::vector<std::pair<std::string, PerplInstruction>>& bindings) const;

  /// trigger, pause, trigger, pause, ..., followed by `trailing` bare
  /// triggers. Throws Error("invalid") for a negative pause.
  PerplInstruction two_part_trigger_practice(const std::string& trigger,
                                             const std::vector<Millis>& pauses,
                                             std::size_t trailing = 1) const;

  /// [layer(if_tone, condition), then, else_sound, else_action].
  /// Throws Error("missing-field") for an empty id and
  /// Error("non-audio-media") for an id that is not audio.
  PerplInstruction conditional(const std::string& condition, const std::string& then_action,
                               const std::string& else_action, const std::string& if_tone,
                               const std::string& else_sound) const;

  /// A described action: a spoken phrase carrying an action meaning.
  static PerplInstruction action(const std::string& audio_id, const std::string& speech,
                                 const std::string& action);

 private:
  void require_audio(const std::string& id, std::string_view what) const;

  const Catalog& catalog_;
  Options options_;
};

// --- Simulator ---------------------------------------------------------------

enum class Posture { Standing, Sitting };
std::string_view to_string(Posture p);

struct PerformerState {
  Posture posture = Posture::Standing;
  std::size_t position = 0;
  std::map<std::string, Binding> bindings;  // keyed by trigger
  std::optional<std::string> if_tone;
  std::optional<std::string> else_sound;
  std::optional<std::string> last_action;

  /// Branch tracking within one instruction.
  enum class Branch { None, AfterIf, AfterThen, AfterElse };
  Branch branch = Branch::None;
  bool condition = false;
};

struct TimelineEvent {
  enum class Kind { Action, Learned, Heard, Saw, Skipped, Confused, Unsupported };
  Millis time_ms = 0;
  Kind kind = Kind::Action;
  std::string detail;

  friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};
std::string_view to_string(TimelineEvent::Kind k);

class PerformerPolicy {
 public:
  virtual ~PerformerPolicy() = default;
  /// Called once when an instruction arrives, before its steps.
  virtual std::vector<TimelineEvent> begin(const PerplInstruction& instruction,
                                           PerformerState& state) = 0;
  /// Times in the returned events are ignored; the simulator stamps them.
  virtual std::vector<TimelineEvent> interpret(const PerplInstruction& instruction,
                                               std::size_t step, PerformerState& state) = 0;
};

/// Follows every learned binding exactly. Deterministic.
///
/// A conditional is true when the performer is performing the condition's
/// action: posture for stand/sit, otherwise the most recent action. Only the
/// single-action branch form is understood; a conditional directly inside a
/// then-branch is reported as unsupported.
class ObedientPolicy final : public PerformerPolicy {
 public:
  std::vector<TimelineEvent> begin(const PerplInstruction& instruction,
                                   PerformerState& state) override;
  std::vector<TimelineEvent> interpret(const PerplInstruction& instruction, std::size_t step,
                                       PerformerState& state) override;
};

struct VirtualPerformer {
  std::string name;
  std::shared_ptr<PerformerPolicy> policy;
  PerformerState state;
};

struct PerformerTimeline {
  std::string performer;
  std::vector<TimelineEvent> events;
  PerformerState final_state;

  /// Names of performed actions, in order.
  std::vector<std::string> actions() const;
};

struct SimulationOptions {
  /// Nominal length of one sounding or shown step.
  Millis sound_ms = 1000;
};

/// SIMD: every performer receives the same stream. Throws Error("invalid")
/// for an empty performer list.
std::vector<PerformerTimeline> simulate(const std::vector<PerplInstruction>& stream,
                                        std::vector<VirtualPerformer> performers,
                                        SimulationOptions options = {});
/// MIMD: streams[i] goes to performers[i]. Throws Error("invalid") when the
/// counts differ or no performers are given.
std::vector<PerformerTimeline> simulate(const std::vector<std::vector<PerplInstruction>>& streams,
                                        std::vector<VirtualPerformer> performers,
                                        SimulationOptions options = {});

Json to_json(const PerformerTimeline& t);

// --- Bubble sort -------------------------------------------------------------

/// Decides one comparison: swap the values at left and right?
class SwapPolicy {
 public:
  virtual ~SwapPolicy() = default;
  virtual bool swap(double left, double right) = 0;
  virtual std::string name() const = 0;
};

/// Swaps exactly when the left value is greater (ascending order).
class ObedientSwap final : public SwapPolicy {
 public:
  bool swap(double left, double right) override { return left > right; }
  std::string name() const override { return "obedient"; }
};

/// Defies the comparison with probability p.
class WillfulSwap final : public SwapPolicy {
 public:
  WillfulSwap(double p, std::uint64_t seed);
  bool swap(double left, double right) override;
  std::string name() const override { return "willful"; }

 private:
  std::bernoulli_distribution defy_;
  std::mt19937_64 rng_;
};

struct Comparison {
  std::size_t left = 0;
  std::size_t right = 0;
  bool swapped = false;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct Iteration {
  std::vector<Comparison> comparisons;
  bool flag_raised_at_end = true;
  /// Value order at the end of the iteration (the melodic contour).
  std::vector<double> contour;

  std::size_t swaps() const;
  friend bool operator==(const Iteration&, const Iteration&) = default;
};

enum class Verdict { Terminated, Nonterminating };
std::string_view to_string(Verdict v);

struct PerformatizationTrace {
  std::vector<Iteration> iterations;
  std::vector<double> final_order;
  Verdict verdict = Verdict::Terminated;
  std::string policy;

  bool sorted() const;
  /// One JSON object per iteration, then a summary line.
  std::string to_json_lines() const;
};

inline constexpr std::size_t kDefaultIterationCap = 1000;

/// Deictor walks the line pairwise each iteration, raising the flag at the
/// start and lowering it on a swap, until an iteration ends with the flag
/// up or the cap is reached. Throws Error("invalid") for an empty list or a
/// zero cap.
PerformatizationTrace performatize_bubble_sort(std::vector<double> initial, SwapPolicy& policy,
                                               std::size_t max_iterations = kDefaultIterationCap);

}  // namespace telebrain::perpl
