#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <vector>

#include "telebrain/domain.hpp"

namespace telebrain::timing {

/// Milliseconds. Server time is milliseconds since the Unix epoch.
using Millis = std::int64_t;

inline constexpr Millis kDefaultDelayBudgetMs = 200;
inline constexpr Millis kSyncCadenceMs = 5000;
inline constexpr std::size_t kSyncWindow = 8;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

/// Epoch-anchored but monotonic: wall time captured once, then advanced by
/// the steady clock so adjustments to the system clock never move it back.
class SystemClock final : public Clock {
 public:
  SystemClock();
  Millis now() const override;

 private:
  Millis wall_anchor_;
  std::chrono::steady_clock::time_point steady_anchor_;
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(Millis start = 0) : now_(start) {}
  Millis now() const override { return now_; }
  void set(Millis t) { now_ = t; }
  void advance(Millis dt) { now_ += dt; }

 private:
  Millis now_;
};

// --- Clock synchronization ------------------------------------------------

/// Two-way time transfer sample: client send, server receive, server send,
/// client receive.
struct ClockSample {
  Millis t0 = 0;
  Millis t1 = 0;
  Millis t2 = 0;
  Millis t3 = 0;

  bool valid() const { return t1 <= t2 && t0 <= t3; }
};

struct OffsetEstimate {
  /// server clock minus client clock; half-millisecond exact.
  double server_minus_client_ms = 0;
  Millis round_trip_ms = 0;

  /// client clock minus server clock, rounded to the millisecond: add it to a
  /// server timestamp to get the client-local instant.
  Millis client_offset_ms() const;

  friend bool operator==(const OffsetEstimate&, const OffsetEstimate&) = default;
};

/// offset = ((t1 - t0) + (t2 - t3)) / 2, round trip = (t3 - t0) - (t2 - t1).
/// Throws Error("invalid-sample") when the sample's orderings are violated.
OffsetEstimate estimate_offset(const ClockSample& sample);

/// The estimate with the smallest round trip in the history (first wins on
/// ties). Throws Error("empty-window") for no samples.
OffsetEstimate smooth_offset(const std::vector<OffsetEstimate>& history);

/// Sliding window of the most recent kSyncWindow estimates.
class ClockSync {
 public:
  explicit ClockSync(std::size_t window = kSyncWindow);

  void add(const ClockSample& sample);
  void add(const OffsetEstimate& estimate);
  bool empty() const { return window_.empty(); }
  std::size_t size() const { return window_.size(); }
  OffsetEstimate current() const;

 private:
  std::size_t capacity_;
  std::deque<OffsetEstimate> window_;
};

// --- Cue scheduling -------------------------------------------------------

struct Schedule {
  Millis issue_at = 0;
  Millis execute_at = 0;
  Millis delay_budget = 0;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// execute_at = issue + budget. Throws Error("invalid-budget") for budget <= 0.
Schedule schedule_cue(Millis issue_at, Millis delay_budget);

/// Server time -> client-local time under a client offset (client - server).
constexpr Millis to_local(Millis server_time, Millis client_offset_ms) {
  return server_time + client_offset_ms;
}
constexpr Millis to_server(Millis local_time, Millis client_offset_ms) {
  return local_time - client_offset_ms;
}

struct Execution {
  Millis fire_at = 0;  // in the same time base as the inputs
  bool late = false;
};

/// Hold-until rule: a delivery that arrives on or before the target fires at
/// the target; a late one fires on arrival and is flagged.
Execution execute_delivery(Millis target, Millis arrival);

// --- Timers and metronomes ------------------------------------------------

/// Throws Error("invalid-interval") for interval <= 0.
std::vector<Millis> metronome_ticks(Millis start, Millis interval, std::size_t n);

/// Anchored metronome: tick k is always anchor + k * interval.
class Metronome {
 public:
  Metronome(Millis anchor, MetronomeSpec spec);

  Millis tick(std::int64_t k) const { return anchor_ + k * spec_.interval_ms; }
  /// First tick strictly after t.
  Millis next_after(Millis t) const;
  /// Tick k expressed in server time. Synchronized metronomes are anchored
  /// to server time; unsynchronized ones to the local clock of the client
  /// that started them.
  Millis tick_server_time(std::int64_t k, Millis client_offset_ms) const;

  bool synchronized() const { return spec_.synchronized; }

 private:
  Millis anchor_;
  MetronomeSpec spec_;
};

/// fire-at = armed-at + duration. Throws Error("invalid-duration").
Millis timer_fire(const TimerSpec& timer, Millis armed_at);

// --- Event loop -----------------------------------------------------------

/// Single-threaded timed queue driven by an injected clock. Events due at
/// the same instant run in insertion order.
class TimedQueue {
 public:
  using Task = std::function<void(Millis)>;

  void at(Millis when, Task task);
  /// Runs every event due at or before `now`; returns how many ran.
  std::size_t run_due(Millis now);
  std::optional<Millis> next_due() const;
  std::size_t pending() const { return heap_.size(); }

 private:
  struct Item {
    Millis when;
    std::uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return a.when != b.when ? a.when > b.when : a.seq > b.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace telebrain::timing
