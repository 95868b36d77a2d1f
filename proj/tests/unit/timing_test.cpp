#include <gtest/gtest.h>

#include <random>

#include "telebrain/error.hpp"
#include "telebrain/timing.hpp"

using namespace telebrain;
using namespace telebrain::timing;

TEST(Timing, OffsetFromFourTimestamps) {
  // Client is 1000 ms behind the server, 40 ms each way, 5 ms processing.
  const auto est = estimate_offset({0, 1040, 1045, 85});
  EXPECT_EQ(est.server_minus_client_ms, 1000.0);
  EXPECT_EQ(est.round_trip_ms, 80);
  EXPECT_EQ(est.client_offset_ms(), -1000);
}

TEST(Timing, OffsetHalfMillisecond) {
  const auto est = estimate_offset({0, 10, 10, 11});
  EXPECT_EQ(est.server_minus_client_ms, 4.5);
}

TEST(Timing, AsymmetryErrorIsHalfTheDifference) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Millis> lat(0, 500), off(-100000, 100000);
  for (int i = 0; i < 1000; ++i) {
    const Millis up = lat(rng), down = lat(rng), truth = off(rng);
    const Millis t0 = 50'000, t1 = t0 + truth + up, t2 = t1 + 2, t3 = t2 - truth + down;
    const auto est = estimate_offset({t0, t1, t2, t3});
    EXPECT_DOUBLE_EQ(est.server_minus_client_ms - static_cast<double>(truth),
                     static_cast<double>(up - down) / 2.0);
    EXPECT_EQ(est.round_trip_ms, up + down);
  }
}

TEST(Timing, InvalidSample) {
  EXPECT_THROW(estimate_offset({10, 5, 4, 20}), Error);
  EXPECT_THROW(estimate_offset({10, 5, 6, 9}), Error);
}

TEST(Timing, SmoothPicksSmallestRoundTrip) {
  std::vector<OffsetEstimate> h{{10, 50}, {20, 30}, {30, 30}, {40, 90}};
  EXPECT_EQ(smooth_offset(h).server_minus_client_ms, 20);
  EXPECT_THROW(smooth_offset({}), Error);
}

TEST(Timing, ScheduleCue) {
  const auto s = schedule_cue(1000, 200);
  EXPECT_EQ(s.issue_at, 1000);
  EXPECT_EQ(s.execute_at, 1200);
  EXPECT_EQ(s.delay_budget, 200);
  EXPECT_THROW(schedule_cue(0, 0), Error);
}

TEST(Timing, HoldUntilRule) {
  EXPECT_EQ(execute_delivery(100, 40).fire_at, 100);
  EXPECT_FALSE(execute_delivery(100, 100).late);
  const auto late = execute_delivery(100, 130);
  EXPECT_TRUE(late.late);
  EXPECT_EQ(late.fire_at, 130);
}

TEST(Timing, LocalServerConversionInverts) {
  for (Millis t : {0LL, 17LL, 1'700'000'000'000LL}) {
    for (Millis off : {-5000LL, 0LL, 333LL}) EXPECT_EQ(to_server(to_local(t, off), off), t);
  }
}

TEST(Timing, MetronomeTicksAreAnchored) {
  const auto ticks = metronome_ticks(1000, 250, 5);
  EXPECT_EQ(ticks, (std::vector<Millis>{1000, 1250, 1500, 1750, 2000}));
  EXPECT_THROW(metronome_ticks(0, 0, 3), Error);
  MetronomeSpec spec;
  spec.interval_ms = 100;
  spec.synchronized = true;
  Metronome m(5000, spec);
  EXPECT_EQ(m.tick(1000), 105000);  // no drift accumulation
  EXPECT_EQ(m.next_after(5000), 5100);
  EXPECT_EQ(m.next_after(5099), 5100);
  EXPECT_EQ(m.tick_server_time(3, 700), 5300);
  spec.synchronized = false;
  Metronome local(5000, spec);
  EXPECT_EQ(local.tick_server_time(3, 700), 4600);
}

TEST(Timing, TimerFire) {
  TimerSpec t;
  t.duration_ms = 1500;
  EXPECT_EQ(timer_fire(t, 100), 1600);
  t.duration_ms = 0;
  EXPECT_THROW(timer_fire(t, 100), Error);
}

TEST(Timing, TimedQueueOrdersByTimeThenInsertion) {
  TimedQueue q;
  std::vector<int> order;
  q.at(20, [&](Millis) { order.push_back(3); });
  q.at(10, [&](Millis) { order.push_back(1); });
  q.at(10, [&](Millis) { order.push_back(2); });
  q.at(30, [&](Millis) { order.push_back(4); });
  EXPECT_EQ(q.next_due(), 10);
  EXPECT_EQ(q.run_due(25), 3u);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(q.pending(), 1u);
  EXPECT_EQ(q.run_due(29), 0u);
  EXPECT_EQ(q.run_due(30), 1u);
  EXPECT_FALSE(q.next_due().has_value());
}

TEST(Timing, VirtualClock) {
  VirtualClock c(10);
  c.advance(5);
  EXPECT_EQ(c.now(), 15);
  c.set(2);
  EXPECT_EQ(c.now(), 2);
}
