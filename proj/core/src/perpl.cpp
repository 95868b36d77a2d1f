#include "telebrain/perpl.hpp"

#include <algorithm>
#include <sstream>

namespace telebrain::perpl {

namespace {

Error malformed(const std::string& what) { return Error("malformed", "instruction: " + what); }

Json conditional_json(const ConditionalMeaning& c) {
  return Json{{"if_tone", c.if_tone},         {"condition", c.condition},
              {"then", c.then_sound},         {"else_sound", c.else_sound},
              {"else_action", c.else_action_sound}};
}

ConditionalMeaning conditional_from_json(const Json& j) {
  if (!j.is_object()) throw malformed("conditional must be an object");
  auto field = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw malformed(std::string("conditional.") + key);
    return it->get<std::string>();
  };
  return {field("if_tone"), field("condition"), field("then"), field("else_sound"),
          field("else_action")};
}

Json binding_json(const Binding& b) {
  Json j{{"trigger", b.trigger}};
  if (auto* a = std::get_if<ActionMeaning>(&b.behavior)) {
    j["action"] = a->action;
  } else {
    j["conditional"] = conditional_json(std::get<ConditionalMeaning>(b.behavior));
  }
  return j;
}

Binding binding_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("trigger") || !j["trigger"].is_string()) {
    throw malformed("binding needs a trigger");
  }
  Binding b{j["trigger"].get<std::string>(), ActionMeaning{}};
  if (j.contains("action") && j["action"].is_string()) {
    b.behavior = ActionMeaning{j["action"].get<std::string>()};
  } else if (j.contains("conditional")) {
    b.behavior = conditional_from_json(j["conditional"]);
  } else {
    throw malformed("binding needs an action or a conditional");
  }
  return b;
}

}  // namespace

// --- Instructions ---------------------------------------------------------

void PerplInstruction::check() const {
  for (const auto& s : steps) {
    if (s.kind == Step::Kind::Pause && s.pause_ms < 0) {
      throw Error("invalid", "pause of " + std::to_string(s.pause_ms) + " ms");
    }
    if (s.kind == Step::Kind::Layer && s.ids.empty()) throw Error("invalid", "empty layer");
    if ((s.kind == Step::Kind::Play || s.kind == Step::Kind::Show) && s.ids.size() != 1) {
      throw Error("invalid", "play and show take exactly one id");
    }
  }
}

PerplInstruction PerplInstruction::operator+(const PerplInstruction& rhs) const {
  PerplInstruction out = *this;
  out.steps.insert(out.steps.end(), rhs.steps.begin(), rhs.steps.end());
  if (!out.meaning) out.meaning = rhs.meaning;
  return out;
}

Json to_json(const Step& s) {
  switch (s.kind) {
    case Step::Kind::Play: {
      Json j{{"play", s.ids.at(0)}};
      if (s.speech) j["speech"] = *s.speech;
      return j;
    }
    case Step::Kind::Show:
      return Json{{"show", s.ids.at(0)}};
    case Step::Kind::Pause:
      return Json{{"pause", s.pause_ms}};
    case Step::Kind::Layer:
      return Json{{"layer", s.ids}};
  }
  return Json::object();
}

Step step_from_json(const Json& j) {
  if (!j.is_object()) throw malformed("step must be an object");
  if (auto it = j.find("play"); it != j.end() && it->is_string()) {
    Step s = Step::play(it->get<std::string>());
    if (auto sp = j.find("speech"); sp != j.end()) {
      if (!sp->is_string()) throw malformed("speech must be a string");
      s.speech = sp->get<std::string>();
    }
    return s;
  }
  if (auto it = j.find("show"); it != j.end() && it->is_string()) {
    return Step::show(it->get<std::string>());
  }
  if (auto it = j.find("pause"); it != j.end() && it->is_number_integer()) {
    return Step::pause(it->get<Millis>());
  }
  if (auto it = j.find("layer"); it != j.end() && it->is_array()) {
    std::vector<std::string> ids;
    for (const auto& id : *it) {
      if (!id.is_string()) throw malformed("layer ids must be strings");
      ids.push_back(id.get<std::string>());
    }
    return Step::layer(std::move(ids));
  }
  throw malformed("unknown step " + j.dump());
}

Json to_json(const PerplInstruction& i) {
  Json steps = Json::array();
  for (const auto& s : i.steps) steps.push_back(to_json(s));
  Json j{{"steps", std::move(steps)}};
  if (i.meaning) {
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, ActionMeaning>) {
            j["meaning"] = Json{{"action", m.action}};
          } else if constexpr (std::is_same_v<T, ConditionalMeaning>) {
            j["meaning"] = Json{{"conditional", conditional_json(m)}};
          } else if constexpr (std::is_same_v<T, TriggerDefinitionMeaning>) {
            j["meaning"] = Json{{"trigger_definition", binding_json(m.binding)}};
          } else {
            Json bs = Json::array();
            for (const auto& b : m.bindings) bs.push_back(binding_json(b));
            j["meaning"] = Json{{"training", std::move(bs)}};
          }
        },
        *i.meaning);
  }
  return j;
}

PerplInstruction instruction_from_json(const Json& j) {
  if (!j.is_object()) throw malformed("instruction must be an object");
  PerplInstruction out;
  auto steps = j.find("steps");
  if (steps == j.end() || !steps->is_array()) throw malformed("steps must be an array");
  for (const auto& s : *steps) out.steps.push_back(step_from_json(s));
  if (auto m = j.find("meaning"); m != j.end() && !m->is_null()) {
    if (!m->is_object()) throw malformed("meaning must be an object");
    if (m->contains("action") && (*m)["action"].is_string()) {
      out.meaning = ActionMeaning{(*m)["action"].get<std::string>()};
    } else if (m->contains("conditional")) {
      out.meaning = conditional_from_json((*m)["conditional"]);
    } else if (m->contains("trigger_definition")) {
      out.meaning = TriggerDefinitionMeaning{binding_from_json((*m)["trigger_definition"])};
    } else if (m->contains("training") && (*m)["training"].is_array()) {
      TrainingMeaning t;
      for (const auto& b : (*m)["training"]) t.bindings.push_back(binding_from_json(b));
      out.meaning = std::move(t);
    } else {
      throw malformed("unknown meaning " + m->dump());
    }
  }
  out.check();
  return out;
}

std::vector<std::string> sentence_plan(const PerplInstruction& i) {
  std::vector<std::string> ids;
  for (const auto& s : i.steps) {
    if (s.kind != Step::Kind::Play) {
      throw Error("invalid", "only plays can be concatenated into an audio sentence");
    }
    ids.push_back(s.ids.at(0));
  }
  return ids;
}

// --- Builders ---------------------------------------------------------------

void Builder::require_audio(const std::string& id, std::string_view what) const {
  if (id.empty()) throw Error("missing-field", std::string(what) + " is required");
  if (!catalog_.is_audio_id(id)) {
    throw Error("non-audio-media", std::string(what) + " '" + id + "' is not audio");
  }
}

PerplInstruction Builder::training(const std::string& trigger,
                                   const PerplInstruction& body) const {
  return training({{trigger, body}});
}

PerplInstruction Builder::training(
    const std::vector<std::pair<std::string, PerplInstruction>>& bindings) const {
  if (bindings.empty()) throw Error("empty-body", "training needs at least one binding");
  PerplInstruction out;
  TrainingMeaning meaning;
  for (const auto& [trigger, body] : bindings) {
    require_audio(trigger, "trigger");
    if (body.steps.empty()) throw Error("empty-body", "training body for '" + trigger + "'");
    body.check();
    Binding b{trigger, ActionMeaning{}};
    if (const auto* a = body.meaning ? std::get_if<ActionMeaning>(&*body.meaning) : nullptr) {
      b.behavior = *a;
    } else if (const auto* c =
                   body.meaning ? std::get_if<ConditionalMeaning>(&*body.meaning) : nullptr) {
      b.behavior = *c;
    } else {
      throw Error("invalid", "training body for '" + trigger +
                                 "' must describe an action or a conditional");
    }
    out.steps.push_back(Step::say(options_.when_phrase_id, options_.when_phrase_text));
    out.steps.push_back(Step::play(trigger));
    out.steps.insert(out.steps.end(), body.steps.begin(), body.steps.end());
    meaning.bindings.push_back(std::move(b));
  }
  out.meaning = std::move(meaning);
  return out;
}

PerplInstruction Builder::two_part_trigger_practice(const std::string& trigger,
                                                    const std::vector<Millis>& pauses,
                                                    std::size_t trailing) const {
  require_audio(trigger, "trigger");
  for (auto p : pauses) {
    if (p < 0) throw Error("invalid", "negative pause " + std::to_string(p) + " ms");
  }
  PerplInstruction out;
  for (auto p : pauses) {
    out.steps.push_back(Step::play(trigger));
    out.steps.push_back(Step::pause(p));
  }
  for (std::size_t i = 0; i < trailing; ++i) out.steps.push_back(Step::play(trigger));
  return out;
}

PerplInstruction Builder::conditional(const std::string& condition, const std::string& then_action,
                                      const std::string& else_action, const std::string& if_tone,
                                      const std::string& else_sound) const {
  require_audio(condition, "condition-action");
  require_audio(then_action, "then-action");
  require_audio(else_action, "else-action");
  require_audio(if_tone, "if-tone");
  require_audio(else_sound, "else-sound");
  PerplInstruction out;
  out.steps = {Step::layer({if_tone, condition}), Step::play(then_action), Step::play(else_sound),
               Step::play(else_action)};
  out.meaning = ConditionalMeaning{if_tone, condition, then_action, else_sound, else_action};
  return out;
}

PerplInstruction Builder::action(const std::string& audio_id, const std::string& speech,
                                 const std::string& action) {
  return PerplInstruction{{Step::say(audio_id, speech)}, ActionMeaning{action}};
}

// --- Simulator ---------------------------------------------------------------

std::string_view to_string(Posture p) { return p == Posture::Standing ? "standing" : "sitting"; }

std::string_view to_string(TimelineEvent::Kind k) {
  switch (k) {
    case TimelineEvent::Kind::Action: return "action";
    case TimelineEvent::Kind::Learned: return "learned";
    case TimelineEvent::Kind::Heard: return "heard";
    case TimelineEvent::Kind::Saw: return "saw";
    case TimelineEvent::Kind::Skipped: return "skipped";
    case TimelineEvent::Kind::Confused: return "confused";
    case TimelineEvent::Kind::Unsupported: return "unsupported";
  }
  return "?";
}

namespace {

using Kind = TimelineEvent::Kind;
using Branch = PerformerState::Branch;

TimelineEvent event(Kind k, std::string detail) { return {0, k, std::move(detail)}; }

bool is_training(const PerplInstruction& i) {
  return i.meaning && (std::holds_alternative<TrainingMeaning>(*i.meaning) ||
                       std::holds_alternative<TriggerDefinitionMeaning>(*i.meaning));
}

void learn(const Binding& b, PerformerState& st, std::vector<TimelineEvent>& out) {
  if (const auto* a = std::get_if<ActionMeaning>(&b.behavior)) {
    if (a->action == kIfAction) st.if_tone = b.trigger;
    if (a->action == kElseAction) st.else_sound = b.trigger;
    out.push_back(event(Kind::Learned, b.trigger + " -> " + a->action));
  } else {
    out.push_back(event(Kind::Learned, b.trigger + " -> conditional"));
  }
  st.bindings[b.trigger] = b;
}

bool performing(const PerformerState& st, const std::string& action) {
  if (action == "stand") return st.posture == Posture::Standing;
  if (action == "sit") return st.posture == Posture::Sitting;
  return st.last_action == action;
}

void perform_action(std::string action, PerformerState& st, std::vector<TimelineEvent>& out) {
  if (action == kSwitchAction) action = st.posture == Posture::Standing ? "sit" : "stand";
  if (action == "stand") st.posture = Posture::Standing;
  if (action == "sit") st.posture = Posture::Sitting;
  st.last_action = action;
  out.push_back(event(Kind::Action, std::move(action)));
}

const ActionMeaning* action_of(const PerformerState& st, const std::string& id) {
  auto it = st.bindings.find(id);
  if (it == st.bindings.end()) return nullptr;
  return std::get_if<ActionMeaning>(&it->second.behavior);
}

void perform_binding(const Binding& b, PerformerState& st, std::vector<TimelineEvent>& out) {
  if (const auto* a = std::get_if<ActionMeaning>(&b.behavior)) {
    return perform_action(a->action, st, out);
  }
  // A trigger standing for a whole conditional: evaluated in one go.
  const auto& c = std::get<ConditionalMeaning>(b.behavior);
  const auto* cond = action_of(st, c.condition);
  const auto* then_a = action_of(st, c.then_sound);
  const auto* else_a = action_of(st, c.else_action_sound);
  if (!cond || !then_a || !else_a) {
    out.push_back(event(Kind::Confused, b.trigger + ": conditional refers to unlearned sounds"));
    return;
  }
  perform_action(performing(st, cond->action) ? then_a->action : else_a->action, st, out);
}

}  // namespace

std::vector<TimelineEvent> ObedientPolicy::begin(const PerplInstruction& instruction,
                                                 PerformerState& st) {
  std::vector<TimelineEvent> out;
  st.branch = Branch::None;
  if (!instruction.meaning) return out;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TrainingMeaning>) {
          for (const auto& b : m.bindings) learn(b, st, out);
        } else if constexpr (std::is_same_v<T, TriggerDefinitionMeaning>) {
          learn(m.binding, st, out);
        } else if constexpr (std::is_same_v<T, ActionMeaning>) {
          perform_action(m.action, st, out);
        }
      },
      *instruction.meaning);
  return out;
}

std::vector<TimelineEvent> ObedientPolicy::interpret(const PerplInstruction& instruction,
                                                     std::size_t index, PerformerState& st) {
  std::vector<TimelineEvent> out;
  const Step& step = instruction.steps.at(index);
  const bool listening_only =
      is_training(instruction) ||
      (instruction.meaning && std::holds_alternative<ActionMeaning>(*instruction.meaning));

  if (step.kind == Step::Kind::Pause) return out;
  if (listening_only) {
    out.push_back(event(Kind::Heard, step.speech.value_or(step.ids.empty() ? "" : step.ids[0])));
    return out;
  }

  if (step.kind == Step::Kind::Layer) {
    const bool has_if = st.if_tone && std::find(step.ids.begin(), step.ids.end(), *st.if_tone) !=
                                          step.ids.end();
    if (!has_if) {
      st.branch = Branch::None;
      for (const auto& id : step.ids) {
        auto it = st.bindings.find(id);
        if (it == st.bindings.end()) {
          out.push_back(event(Kind::Confused, id));
        } else {
          perform_binding(it->second, st, out);
        }
      }
      return out;
    }
    if (st.branch == Branch::AfterIf) {
      st.branch = Branch::None;
      out.push_back(event(Kind::Unsupported, "conditional nested inside a branch"));
      return out;
    }
    std::vector<std::string> others;
    for (const auto& id : step.ids) {
      if (id != *st.if_tone) others.push_back(id);
    }
    const ActionMeaning* cond = others.size() == 1 ? action_of(st, others[0]) : nullptr;
    if (!cond) {
      st.branch = Branch::None;
      out.push_back(event(Kind::Confused, "cannot evaluate the condition"));
      return out;
    }
    st.condition = performing(st, cond->action);
    st.branch = Branch::AfterIf;
    out.push_back(event(Kind::Heard, "if " + cond->action));
    return out;
  }

  const std::string& id = step.ids.at(0);
  if (step.kind == Step::Kind::Play && st.else_sound && id == *st.else_sound) {
    if (st.branch == Branch::AfterThen) {
      st.branch = Branch::AfterElse;
      out.push_back(event(Kind::Heard, "else"));
    } else {
      st.branch = Branch::None;
      out.push_back(event(Kind::Confused, "else without a preceding if"));
    }
    return out;
  }
  if (step.kind == Step::Kind::Play && st.if_tone && id == *st.if_tone) {
    st.branch = Branch::None;
    out.push_back(event(Kind::Confused, "if tone without an action"));
    return out;
  }

  auto it = st.bindings.find(id);
  if (it == st.bindings.end()) {
    if (step.speech) {
      out.push_back(event(Kind::Heard, *step.speech));
    } else if (step.kind == Step::Kind::Show) {
      out.push_back(event(Kind::Saw, id));
    } else {
      out.push_back(event(Kind::Confused, id));
    }
    return out;
  }

  switch (st.branch) {
    case Branch::AfterIf:
      if (st.condition) {
        perform_binding(it->second, st, out);
      } else {
        out.push_back(event(Kind::Skipped, id));
      }
      st.branch = Branch::AfterThen;
      break;
    case Branch::AfterElse:
      if (!st.condition) {
        perform_binding(it->second, st, out);
      } else {
        out.push_back(event(Kind::Skipped, id));
      }
      st.branch = Branch::None;
      break;
    case Branch::AfterThen:
    case Branch::None:
      st.branch = Branch::None;
      perform_binding(it->second, st, out);
      break;
  }
  return out;
}

std::vector<std::string> PerformerTimeline::actions() const {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (e.kind == Kind::Action) out.push_back(e.detail);
  }
  return out;
}

namespace {

PerformerTimeline run_one(const std::vector<PerplInstruction>& stream, VirtualPerformer p,
                          const SimulationOptions& options) {
  if (!p.policy) throw Error("invalid", "performer '" + p.name + "' has no policy");
  PerformerTimeline t{p.name, {}, {}};
  Millis now = 0;
  for (const auto& instruction : stream) {
    instruction.check();
    for (auto e : p.policy->begin(instruction, p.state)) {
      e.time_ms = now;
      t.events.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < instruction.steps.size(); ++i) {
      for (auto e : p.policy->interpret(instruction, i, p.state)) {
        e.time_ms = now;
        t.events.push_back(std::move(e));
      }
      const auto& s = instruction.steps[i];
      now += s.kind == Step::Kind::Pause ? s.pause_ms : options.sound_ms;
    }
  }
  t.final_state = std::move(p.state);
  return t;
}

}  // namespace

std::vector<PerformerTimeline> simulate(const std::vector<PerplInstruction>& stream,
                                        std::vector<VirtualPerformer> performers,
                                        SimulationOptions options) {
  if (performers.empty()) throw Error("invalid", "simulation needs at least one performer");
  std::vector<PerformerTimeline> out;
  out.reserve(performers.size());
  for (auto& p : performers) out.push_back(run_one(stream, std::move(p), options));
  return out;
}

std::vector<PerformerTimeline> simulate(const std::vector<std::vector<PerplInstruction>>& streams,
                                        std::vector<VirtualPerformer> performers,
                                        SimulationOptions options) {
  if (performers.empty()) throw Error("invalid", "simulation needs at least one performer");
  if (streams.size() != performers.size()) {
    throw Error("invalid", "MIMD needs one stream per performer");
  }
  std::vector<PerformerTimeline> out;
  out.reserve(performers.size());
  for (std::size_t i = 0; i < performers.size(); ++i) {
    out.push_back(run_one(streams[i], std::move(performers[i]), options));
  }
  return out;
}

Json to_json(const PerformerTimeline& t) {
  Json events = Json::array();
  for (const auto& e : t.events) {
    events.push_back({{"t_ms", e.time_ms}, {"kind", to_string(e.kind)}, {"detail", e.detail}});
  }
  return Json{{"performer", t.performer},
              {"events", std::move(events)},
              {"actions", t.actions()},
              {"final_posture", to_string(t.final_state.posture)}};
}

// --- Bubble sort -------------------------------------------------------------

WillfulSwap::WillfulSwap(double p, std::uint64_t seed) : rng_(seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("invalid", "defiance probability must be in [0, 1]");
  defy_ = std::bernoulli_distribution(p);
}

bool WillfulSwap::swap(double left, double right) {
  const bool by_value = left > right;
  return defy_(rng_) ? !by_value : by_value;
}

std::size_t Iteration::swaps() const {
  return static_cast<std::size_t>(
      std::count_if(comparisons.begin(), comparisons.end(), [](auto& c) { return c.swapped; }));
}

std::string_view to_string(Verdict v) {
  return v == Verdict::Terminated ? "terminated" : "nonterminating";
}

bool PerformatizationTrace::sorted() const {
  return std::is_sorted(final_order.begin(), final_order.end());
}

std::string PerformatizationTrace::to_json_lines() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < iterations.size(); ++k) {
    const auto& it = iterations[k];
    Json comps = Json::array();
    for (const auto& c : it.comparisons) {
      comps.push_back({{"left", c.left}, {"right", c.right}, {"swapped", c.swapped}});
    }
    os << Json{{"iteration", k + 1},
               {"comparisons", std::move(comps)},
               {"swaps", it.swaps()},
               {"flag_raised_at_end", it.flag_raised_at_end},
               {"contour", it.contour}}
              .dump()
       << '\n';
  }
  os << Json{{"final_order", final_order},
             {"iterations", iterations.size()},
             {"policy", policy},
             {"sorted", sorted()},
             {"verdict", to_string(verdict)}}
            .dump()
     << '\n';
  return os.str();
}

PerformatizationTrace performatize_bubble_sort(std::vector<double> values, SwapPolicy& policy,
                                               std::size_t max_iterations) {
  if (values.empty()) throw Error("invalid", "bubble sort needs at least one value");
  if (max_iterations == 0) throw Error("invalid", "iteration cap must be positive");
  PerformatizationTrace trace;
  trace.policy = policy.name();
  trace.verdict = Verdict::Nonterminating;
  while (trace.iterations.size() < max_iterations) {
    Iteration it;
    bool flag = true;  // Deictor raises an arm
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const bool swapped = policy.swap(values[i], values[i + 1]);
      if (swapped) {
        std::swap(values[i], values[i + 1]);
        flag = false;
      }
      it.comparisons.push_back({i, i + 1, swapped});
    }
    it.flag_raised_at_end = flag;
    it.contour = values;
    trace.iterations.push_back(std::move(it));
    if (flag) {
      trace.verdict = Verdict::Terminated;
      break;
    }
  }
  trace.final_order = std::move(values);
  return trace;
}

}  // namespace telebrain::perpl
