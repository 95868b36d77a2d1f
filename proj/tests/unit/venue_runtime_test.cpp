#include <gtest/gtest.h>

#include <set>

#include "telebrain/lock.hpp"
#include "telebrain/venue_runtime.hpp"
#include "test_support.hpp"

using namespace telebrain;
using namespace telebrain::runtime;
namespace ts = testsupport;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

struct RuntimeTest : ::testing::Test {
  MemoryCatalog catalog;
  timing::VirtualClock clock{Millis{3'600'000} * 13 + 60'000 * 7};  // 13:07 UTC
  Venue venue;

  RuntimeTest() {
    catalog.put(ts::audio_object("tone", 800));
    catalog.put(ts::image_object("pic"));
    venue.id = "v";
    venue.name = "Room";
    venue.roles.push_back({ts::role("Lead", CapabilitySet::all()), 1});
    venue.roles.push_back({ts::role("Crowd", ts::receive_all()), std::nullopt});
  }
  Performance make(std::uint64_t seed = 1) { return Performance("Show", venue, catalog, clock, seed); }
  static JoinRequest req(std::string nick, std::string role) {
    return {std::move(nick), std::move(role), std::nullopt, std::nullopt, 0};
  }
};

}  // namespace

TEST_F(RuntimeTest, JoinRules) {
  auto perf = make();
  perf.join(req("a", "Lead"));
  EXPECT_EQ(code_of([&] { perf.join(req("b", "Lead")); }), "capacity");
  EXPECT_EQ(code_of([&] { perf.join(req("a", "Crowd")); }), "nickname-taken");
  EXPECT_EQ(code_of([&] { perf.join(req("c", "Ghost")); }), "unknown-role");
  EXPECT_EQ(code_of([&] { perf.join(req("", "Crowd")); }), "missing-field");
  EXPECT_EQ(perf.find("a")->capabilities, CapabilitySet::all());
}

TEST_F(RuntimeTest, PasscodeAndLocalIpRequirements) {
  venue.passcode = make_lock("door");
  venue.join_requirements = {JoinRequirement::LocalIp};
  auto perf = make();
  auto r = req("a", "Crowd");
  EXPECT_EQ(code_of([&] { perf.join(r); }), "passcode");
  r.passcode = "window";
  EXPECT_EQ(code_of([&] { perf.join(r); }), "passcode");
  r.passcode = "door";
  EXPECT_EQ(code_of([&] { perf.join(r); }), "missing-field");
  r.local_ip = "192.168.1.9";
  EXPECT_EQ(code_of([&] { perf.join(r); }), "ok");
}

TEST_F(RuntimeTest, CueIdsAndSchedule) {
  venue.delay_budget_ms = 120;
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  Designation d;
  d.performers = {"x"};
  const auto r1 = perf.dispatch("lead", d, Outgoing::stored("tone"));
  clock.advance(10);
  const auto r2 = perf.dispatch("lead", d, Outgoing::stored("tone"));
  EXPECT_EQ(r1.envelope.cue_id, "Show/1");
  EXPECT_EQ(r2.envelope.cue_id, "Show/2");
  EXPECT_EQ(r2.envelope.schedule.execute_at, clock.now() + 120);
  EXPECT_EQ(r2.envelope.deliveries.at(0).execute_at, clock.now() + 120);
}

TEST_F(RuntimeTest, DefaultBudgetWhenVenueHasNone) {
  auto perf = make();
  EXPECT_EQ(perf.delay_budget_ms(), timing::kDefaultDelayBudgetMs);
}

TEST_F(RuntimeTest, ActivityLog) {
  venue.utc_offset_minutes = 60;
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  perf.join(req("y", "Crowd"));
  Designation d;
  d.roles = {"Crowd"};
  const auto r = perf.dispatch("lead", d, Outgoing::stored("pic"));
  EXPECT_EQ(r.entry.display_time, "14:07");
  EXPECT_EQ(r.entry.receivers, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(r.entry.text(), "lead: show image: pic");
  EXPECT_EQ(r.entry.line(), "lead: show image: pic\t14:07");
  // A clock stepping backwards never reorders the log.
  clock.advance(-5000);
  const auto r2 = perf.dispatch("lead", d, Outgoing::live_text("hi"));
  EXPECT_GE(r2.entry.timestamp_ms, r.entry.timestamp_ms);
  EXPECT_EQ(perf.global_log().size(), 2u);
  Designation only_x;
  only_x.performers = {"x"};
  perf.dispatch("lead", only_x, Outgoing::stored("tone"));
  EXPECT_EQ(perf.performer_log("x").size(), 3u);
  EXPECT_EQ(perf.performer_log("y").size(), 2u);
}

TEST(Activity, FormatHhMm) {
  EXPECT_EQ(format_hh_mm(0, 0), "00:00");
  EXPECT_EQ(format_hh_mm(0, -30), "23:30");
  EXPECT_EQ(format_hh_mm(86'399'999, 0), "23:59");
  EXPECT_EQ(format_hh_mm(Millis{3'600'000} * 23, 120), "01:00");
}

TEST_F(RuntimeTest, RoleAndFunctionalityChanges) {
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  EXPECT_EQ(code_of([&] { perf.change_role("x", "Lead"); }), "capability");
  perf.change_functionality("lead", "x", {Capability::ChangeRole, Capability::ReceiveText});
  EXPECT_EQ(code_of([&] { perf.change_role("x", "Lead"); }), "capacity");
  EXPECT_EQ(code_of([&] { perf.change_role("x", "Nope"); }), "unknown-role");
  EXPECT_EQ(code_of([&] { perf.change_functionality("x", "lead", {}); }), "capability");
  perf.change_role("lead", "Crowd");
  EXPECT_EQ(perf.find("lead")->capabilities, ts::receive_all());
}

TEST_F(RuntimeTest, TestModeRoutesToSelf) {
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  perf.set_test_mode("lead", true);
  Designation d;
  d.all = true;
  const auto plan = perf.resolve_targets("lead", d, Outgoing::stored("tone"));
  EXPECT_EQ(plan.mechanism, "self");
  ASSERT_EQ(plan.deliveries.size(), 1u);
  EXPECT_EQ(plan.deliveries[0].nickname, "lead");
  EXPECT_EQ(code_of([&] { perf.set_test_mode("x", true); }), "capability");
}

TEST_F(RuntimeTest, SenderCapabilityByKind) {
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  perf.change_functionality("lead", "lead", {Capability::SendText});
  Designation d;
  d.performers = {"x"};
  EXPECT_EQ(code_of([&] { perf.resolve_targets("lead", d, Outgoing::live_text("hi")); }), "ok");
  EXPECT_EQ(code_of([&] { perf.resolve_targets("lead", d, Outgoing::stored("tone")); }),
            "capability");
  EXPECT_EQ(code_of([&] { perf.resolve_targets("lead", d, Outgoing::stored("pic")); }),
            "capability");
  EXPECT_EQ(code_of([&] { perf.resolve_targets("lead", Designation{}, Outgoing::live_text("a")); }),
            "missing-field");
}

TEST_F(RuntimeTest, OscNeedsLocalIp) {
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  auto with_ip = req("y", "Crowd");
  with_ip.local_ip = "10.1.1.1";
  perf.join(with_ip);
  Designation d;
  d.roles = {"Crowd"};
  const auto plan = perf.resolve_targets("lead", d, Outgoing::osc_message({"/x", {}}));
  ASSERT_EQ(plan.deliveries.size(), 1u);
  EXPECT_EQ(plan.deliveries[0].nickname, "y");
  ASSERT_EQ(plan.rejected.size(), 1u);
  EXPECT_EQ(plan.rejected[0].reason, "lacks local-ip");
}

TEST_F(RuntimeTest, TimedOrganizationOffsets) {
  AlgorithmObject metro;
  metro.id = "metro";
  metro.name = "Beat";
  metro.spec = MetronomeSpec{250, true};
  AlgorithmObject timer;
  timer.id = "timer";
  timer.name = "Wait";
  timer.spec = TimerSpec{1000};
  AlgorithmObject org;
  org.id = "org";
  org.name = "Piece";
  Designation x;
  x.performers = {"x"};
  org.spec = TimedOrganizationSpec{{{"metro", {"tone", x}, 3}, {"timer", {"pic", x}, 1}}};
  catalog.put(metro);
  catalog.put(timer);
  catalog.put(org);
  auto perf = make();
  perf.join(req("lead", "Lead"));
  perf.join(req("x", "Crowd"));
  Designation d;
  d.algorithm = "org";
  const auto r = perf.dispatch("lead", d, Outgoing::stored("org"));
  std::vector<Millis> offsets;
  for (const auto& del : r.envelope.deliveries) {
    offsets.push_back(del.offset_ms);
    EXPECT_EQ(del.execute_at, r.envelope.schedule.execute_at + del.offset_ms);
  }
  EXPECT_EQ(offsets, (std::vector<Millis>{0, 250, 500, 1000}));
  Designation bad;
  bad.algorithm = "metro";
  EXPECT_EQ(code_of([&] { perf.dispatch("lead", bad, Outgoing::stored("metro")); }), "wrong-type");
}

TEST_F(RuntimeTest, FractionEdgeCases) {
  FractionalAssignment one;
  one.id = "one";
  one.name = "One";
  one.target_roles = {"Crowd"};
  one.fractions = {"tone"};
  auto perf = make();
  perf.join(req("lead", "Lead"));
  EXPECT_EQ(code_of([&] { perf.resolve_fraction(one); }), "invalid");
  one.fractions = {"tone", "pic"};
  EXPECT_EQ(code_of([&] { perf.resolve_fraction(one); }), "no-receivers");
}

TEST_F(RuntimeTest, PersistentNewcomerJoinsSmallestFraction) {
  FractionalAssignment f;
  f.id = "f";
  f.name = "F";
  f.mode = FractionMode::Persistent;
  f.target_roles = {"Crowd"};
  f.fractions = {"tone", "pic", "tone"};
  auto perf = make(9);
  for (auto n : {"a", "b", "c", "d", "e", "f"}) perf.join(req(n, "Crowd"));
  const auto before = perf.resolve_fraction(f);
  // Remove both members of one fraction, then add a newcomer.
  const auto emptied = before[1];
  for (const auto& n : emptied) perf.leave(n);
  perf.join(req("z", "Crowd"));
  const auto after = perf.resolve_fraction(f);
  EXPECT_EQ(after[1], std::vector<std::string>{"z"});
  EXPECT_EQ(after[0], before[0]);
  EXPECT_EQ(after[2], before[2]);
}

TEST(Fractions, BalancedChunksGivesExtrasToEarlierGroups) {
  const std::vector<std::string> v{"1", "2", "3", "4", "5"};
  const auto p = balanced_chunks(v, 3);
  EXPECT_EQ(p, (Partition{{"1", "2"}, {"3", "4"}, {"5"}}));
  EXPECT_EQ(balanced_chunks({"a"}, 3), (Partition{{"a"}, {}, {}}));
}

TEST(Fractions, SeededShuffleIsReproducibleAndUniform) {
  std::vector<std::string> base{"a", "b", "c"};
  std::map<std::vector<std::string>, int> counts;
  std::mt19937_64 rng(77);
  for (int i = 0; i < 60'000; ++i) {
    auto v = base;
    seeded_shuffle(v, rng);
    ++counts[v];
  }
  EXPECT_EQ(counts.size(), 6u);
  for (const auto& [perm, n] : counts) EXPECT_NEAR(n, 10'000, 500);

  std::mt19937_64 r1(5), r2(5);
  auto x = base, y = base;
  seeded_shuffle(x, r1);
  seeded_shuffle(y, r2);
  EXPECT_EQ(x, y);
}

TEST(Fractions, BoundedDrawRange) {
  std::mt19937_64 rng(1);
  for (std::uint64_t n : {1ULL, 2ULL, 7ULL, 1000ULL}) {
    for (int i = 0; i < 1000; ++i) EXPECT_LT(bounded_draw(rng, n), n);
  }
}

TEST_F(RuntimeTest, RegistryNamesAndSeeds) {
  PerformanceRegistry reg(catalog, clock, 40);
  auto& a = reg.start(venue, "A", req("x", "Crowd"));
  auto& b = reg.start(venue, "B", req("x", "Crowd"));
  EXPECT_EQ(a.seed(), 40u);
  EXPECT_EQ(b.seed(), 41u);
  EXPECT_EQ(code_of([&] { reg.start(venue, "A", req("y", "Crowd")); }), "duplicate-name");
  EXPECT_EQ(code_of([&] { reg.live("C"); }), "not-found");
  EXPECT_EQ(reg.live_names(), (std::vector<std::string>{"A", "B"}));
  a.leave("x");
  EXPECT_EQ(code_of([&] { reg.live("A"); }), "gone");
  // The name is free again once the old performance ended.
  EXPECT_EQ(code_of([&] { reg.start(venue, "A", req("y", "Crowd")); }), "ok");
  EXPECT_TRUE(reg.latest("A")->live());
}
