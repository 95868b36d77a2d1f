#include "telebrain/timing.hpp"

#include <cmath>

#include "telebrain/error.hpp"

namespace telebrain::timing {

SystemClock::SystemClock()
    : wall_anchor_(std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count()),
      steady_anchor_(std::chrono::steady_clock::now()) {}

Millis SystemClock::now() const {
  const auto elapsed = std::chrono::steady_clock::now() - steady_anchor_;
  return wall_anchor_ + std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
}

Millis OffsetEstimate::client_offset_ms() const {
  return static_cast<Millis>(std::llround(-server_minus_client_ms));
}

OffsetEstimate estimate_offset(const ClockSample& s) {
  if (!s.valid()) throw Error("invalid-sample", "clock sample violates t1<=t2 or t0<=t3");
  OffsetEstimate e;
  e.server_minus_client_ms = static_cast<double>((s.t1 - s.t0) + (s.t2 - s.t3)) / 2.0;
  e.round_trip_ms = (s.t3 - s.t0) - (s.t2 - s.t1);
  return e;
}

OffsetEstimate smooth_offset(const std::vector<OffsetEstimate>& history) {
  if (history.empty()) throw Error("empty-window", "no clock samples to smooth");
  const OffsetEstimate* best = &history.front();
  for (const auto& e : history) {
    if (e.round_trip_ms < best->round_trip_ms) best = &e;
  }
  return *best;
}

ClockSync::ClockSync(std::size_t window) : capacity_(window == 0 ? 1 : window) {}

void ClockSync::add(const ClockSample& sample) { add(estimate_offset(sample)); }

void ClockSync::add(const OffsetEstimate& estimate) {
  window_.push_back(estimate);
  while (window_.size() > capacity_) window_.pop_front();
}

OffsetEstimate ClockSync::current() const {
  return smooth_offset(std::vector<OffsetEstimate>(window_.begin(), window_.end()));
}

Schedule schedule_cue(Millis issue_at, Millis delay_budget) {
  if (delay_budget <= 0) throw Error("invalid-budget", "delay budget must be > 0");
  return Schedule{issue_at, issue_at + delay_budget, delay_budget};
}

Execution execute_delivery(Millis target, Millis arrival) {
  if (arrival <= target) return {target, false};
  return {arrival, true};
}

std::vector<Millis> metronome_ticks(Millis start, Millis interval, std::size_t n) {
  if (interval <= 0) throw Error("invalid-interval", "metronome interval must be > 0");
  std::vector<Millis> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(start + static_cast<Millis>(k) * interval);
  return out;
}

Metronome::Metronome(Millis anchor, MetronomeSpec spec) : anchor_(anchor), spec_(spec) {
  if (spec_.interval_ms <= 0) throw Error("invalid-interval", "metronome interval must be > 0");
}

Millis Metronome::next_after(Millis t) const {
  if (t < anchor_) return anchor_;
  const auto k = (t - anchor_) / spec_.interval_ms + 1;
  return tick(k);
}

Millis Metronome::tick_server_time(std::int64_t k, Millis client_offset_ms) const {
  return spec_.synchronized ? tick(k) : to_server(tick(k), client_offset_ms);
}

Millis timer_fire(const TimerSpec& timer, Millis armed_at) {
  if (timer.duration_ms <= 0) throw Error("invalid-duration", "timer duration must be > 0");
  return armed_at + timer.duration_ms;
}

void TimedQueue::at(Millis when, Task task) {
  heap_.push(Item{when, next_seq_++, std::move(task)});
}

std::size_t TimedQueue::run_due(Millis now) {
  std::size_t ran = 0;
  while (!heap_.empty() && heap_.top().when <= now) {
    auto item = heap_.top();
    heap_.pop();
    item.task(item.when);
    ++ran;
  }
  return ran;
}

std::optional<Millis> TimedQueue::next_due() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.top().when;
}

}  // namespace telebrain::timing
