// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runs headless, with no network and no web client.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "telebrain/audio.hpp"
#include "telebrain/content_store.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/perpl.hpp"
#include "telebrain/timing.hpp"
#include "telebrain/venue_runtime.hpp"
#include "telebrain/wire.hpp"
#include "test_support.hpp"

using namespace telebrain;
namespace ts = testsupport;

namespace {

/// Collects failure reasons for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 10) failures.push_back(what);
  }
  bool ok() const { return failures.empty(); }
};

struct Criterion {
  std::string name;
  std::function<void(Check&)> run;
};

// --- bubble sort ------------------------------------------------------------

void bubble_sort_oracle(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> perm{1, 2, 3, 4, 5, 6};
  std::size_t count = 0;
  do {
    ++count;
    perpl::ObedientSwap policy;
    const auto trace = perpl::performatize_bubble_sort(perm, policy);
    const auto oracle = ts::oracle_bubble_sort(perm);
    const std::string label = "permutation #" + std::to_string(count);
    c.expect(trace.iterations.size() == oracle.size(), label + ": iteration count");
    c.expect(trace.iterations.size() <= perm.size(), label + ": more than n iterations");
    c.expect(trace.verdict == perpl::Verdict::Terminated, label + ": not terminated");
    c.expect(!trace.iterations.empty() && trace.iterations.back().swaps() == 0,
             label + ": last iteration swapped");
    for (std::size_t k = 0; k < std::min(trace.iterations.size(), oracle.size()); ++k) {
      const auto& it = trace.iterations[k];
      const auto& op = oracle[k];
      c.expect(it.flag_raised_at_end == op.flag_up, label + ": flag");
      c.expect(it.contour == op.order, label + ": order after iteration");
      c.expect(it.comparisons.size() == op.comparisons.size(), label + ": comparisons");
      for (std::size_t j = 0; j < std::min(it.comparisons.size(), op.comparisons.size()); ++j) {
        const auto& [l, r, s] = op.comparisons[j];
        c.expect(it.comparisons[j].left == l && it.comparisons[j].right == r &&
                     it.comparisons[j].swapped == s,
                 label + ": comparison " + std::to_string(j));
      }
    }
    c.expect(trace.final_order == std::vector<double>({1, 2, 3, 4, 5, 6}), label + ": unsorted");
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  c.expect(count == 720, "expected 720 permutations, saw " + std::to_string(count));
  c.expect(ms < 5000, "took " + std::to_string(ms) + " ms");
}

void willful_flag_law(Check& c) {
  std::size_t terminated = 0, capped = 0;
  auto check_trace = [&](const perpl::PerformatizationTrace& t, std::size_t cap,
                         const std::string& label) {
    for (const auto& it : t.iterations) {
      c.expect(it.flag_raised_at_end == (it.swaps() == 0), label + ": flag law");
    }
    if (t.verdict == perpl::Verdict::Terminated) {
      ++terminated;
      c.expect(t.iterations.back().flag_raised_at_end, label + ": terminated without flag");
    } else {
      ++capped;
      c.expect(t.iterations.size() == cap, label + ": nonterminating below cap");
      for (const auto& it : t.iterations) {
        c.expect(!it.flag_raised_at_end, label + ": flag raised but run continued");
      }
    }
  };
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::vector<double> v{1, 2, 3, 4, 5};
    std::mt19937_64 rng(seed);
    std::shuffle(v.begin(), v.end(), rng);
    perpl::WillfulSwap policy(0.3, seed);
    const std::size_t cap = 50;
    check_trace(perpl::performatize_bubble_sort(v, policy, cap), cap,
                "seed " + std::to_string(seed));
  }
  // A fully defiant performer just sorts the other way round and still stops.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    perpl::WillfulSwap policy(1.0, seed);
    const auto t = perpl::performatize_bubble_sort({1, 2, 3, 4, 5}, policy, 25);
    check_trace(t, 25, "defiant");
    c.expect(t.final_order == std::vector<double>{5, 4, 3, 2, 1}, "defiant run not descending");
  }
  // Performers who swap every pair never leave a pass clean, so only the cap ends it.
  struct SwapEverything final : perpl::SwapPolicy {
    bool swap(double, double) override { return true; }
    std::string name() const override { return "swap-everything"; }
  };
  for (std::size_t cap : {1u, 7u, 25u, 10u, 3u, 50u, 2u, 13u, 40u, 5u}) {
    SwapEverything policy;
    check_trace(perpl::performatize_bubble_sort({3, 1, 2, 5, 4}, policy, cap), cap, "swap-everything");
  }
  c.expect(terminated > 0, "no willful run terminated");
  c.expect(capped >= 10, "cap never reached");
}

// --- audio sentences --------------------------------------------------------

void sentence_offsets(Check& c) {
  std::mt19937_64 rng(2024);
  // Pure pipeline, many trials.
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t members = 1 + trial % 10;
    std::vector<std::vector<std::int16_t>> pcm;
    std::vector<audio::AudioClip> clips;
    std::uniform_int_distribution<std::size_t> len(1, 6000);
    for (std::size_t i = 0; i < members; ++i) pcm.push_back(ts::random_pcm(rng, len(rng)));
    for (std::size_t i = 0; i < members; ++i) clips.push_back({"m" + std::to_string(i), pcm[i]});
    const auto r = audio::concatenate_sentence(clips);
    std::int64_t prefix_ms = 0;
    std::size_t prefix_samples = 0;
    const auto wav = audio::encode_wav(r.pcm);
    const auto [data, size] = ts::wav_data_chunk(wav);
    c.expect(size == std::accumulate(pcm.begin(), pcm.end(), std::size_t{0},
                                     [](auto a, const auto& p) { return a + p.size() * 2; }),
             "data chunk size");
    for (std::size_t i = 0; i < members; ++i) {
      c.expect(r.offsets_ms.at(i) == prefix_ms, "trial " + std::to_string(trial) + ": offset ms");
      c.expect(static_cast<std::size_t>(r.offsets_samples.at(i)) == prefix_samples,
               "trial " + std::to_string(trial) + ": offset samples");
      const auto expected = ts::pcm_bytes(pcm[i]);
      const auto from = wav.begin() + static_cast<std::ptrdiff_t>(data + prefix_samples * 2);
      c.expect(std::equal(expected.begin(), expected.end(), from),
               "trial " + std::to_string(trial) + ": member " + std::to_string(i) + " bytes");
      prefix_ms += ts::oracle_ms(pcm[i].size());
      prefix_samples += pcm[i].size();
    }
    c.expect(r.total_duration_ms == prefix_ms, "total duration");
  }

  // End to end through the store: upload members, save the sentence, slice
  // the stored blob.
  ts::TempDir dir;
  ContentStore store(ContentStore::Options{dir.path(), nullptr, nullptr, 5});
  for (std::size_t members = 1; members <= 10; ++members) {
    std::vector<std::vector<std::int16_t>> pcm;
    Collection sentence;
    sentence.kind = CollectionKind::AudioSentence;
    sentence.name = "sentence-" + std::to_string(members);
    // Uploads shorter than half a millisecond round to zero and are refused.
    std::uniform_int_distribution<std::size_t> len(23, 4000);
    for (std::size_t i = 0; i < members; ++i) {
      pcm.push_back(ts::random_pcm(rng, len(rng)));
      const auto obj = store.save_upload(ts::make_wav(pcm.back()), "audio/wav",
                                         ContentKind::AudioUpload,
                                         "m" + std::to_string(members) + "-" + std::to_string(i));
      sentence.members.push_back(obj.id);
    }
    const auto saved = store.save(sentence);
    const auto blob = store.blob(saved.blob_id);
    const auto [data, size] = ts::wav_data_chunk(blob.bytes);
    std::int64_t prefix_ms = 0;
    std::size_t prefix_samples = 0;
    for (std::size_t i = 0; i < members; ++i) {
      c.expect(saved.offsets_ms.at(i) == prefix_ms, "stored offsets_ms");
      const auto expected = ts::pcm_bytes(pcm[i]);
      const auto from = blob.bytes.begin() + static_cast<std::ptrdiff_t>(data + prefix_samples * 2);
      c.expect(std::equal(expected.begin(), expected.end(), from), "stored member bytes");
      prefix_ms += ts::oracle_ms(pcm[i].size());
      prefix_samples += pcm[i].size();
    }
    c.expect(size == prefix_samples * 2, "stored data size");
    c.expect(saved.duration_ms == prefix_ms, "stored duration");
  }
}

// --- clock sync -------------------------------------------------------------

struct Stage {
  MemoryCatalog catalog;
  timing::VirtualClock clock{1'000'000};
  Venue venue;

  explicit Stage(std::int64_t budget) {
    catalog.put(ts::audio_object("tone", 500));
    venue.id = "v1";
    venue.name = "Sync";
    venue.roles.push_back({ts::role("Prompter", CapabilitySet::all()), std::nullopt});
    venue.roles.push_back({ts::role("Receiver", ts::receive_all()), std::nullopt});
    venue.delay_budget_ms = budget;
  }
};

void clock_sync(Check& c) {
  // Symmetric latency: exact offset for every pair.
  for (timing::Millis latency : {0, 1, 7, 10, 50, 149, 1000}) {
    for (timing::Millis truth : {-86'400'000LL, -12'345LL, -30LL, 0LL, 30LL, 5'000LL}) {
      for (timing::Millis processing : {0, 3}) {
        const timing::Millis t0 = 10'000;
        const timing::Millis t1 = t0 + truth + latency;
        const timing::Millis t2 = t1 + processing;
        const timing::Millis t3 = t2 - truth + latency;
        const auto est = timing::estimate_offset({t0, t1, t2, t3});
        c.expect(est.server_minus_client_ms == static_cast<double>(truth),
                 "symmetric: latency " + std::to_string(latency) + " offset " +
                     std::to_string(truth));
        c.expect(est.round_trip_ms == 2 * latency, "symmetric round trip");
      }
    }
  }
  // Asymmetric 10 ms up, 50 ms down: error (up - down) / 2.
  {
    const timing::Millis truth = 250, up = 10, down = 50;
    const timing::Millis t0 = 0, t1 = t0 + truth + up, t2 = t1, t3 = t2 - truth + down;
    const auto est = timing::estimate_offset({t0, t1, t2, t3});
    const double err = est.server_minus_client_ms - static_cast<double>(truth);
    c.expect(err == static_cast<double>(up - down) / 2.0, "asymmetric error formula");
    c.expect(std::abs(err) == 20.0, "asymmetric error magnitude " + std::to_string(err));
  }

  // Ten clients with latency U[10,150]: cue delivery through a performance.
  auto run = [&](std::int64_t budget, std::uint64_t seed, bool expect_all_on_time) {
    Stage stage(budget);
    runtime::Performance perf("p", stage.venue, stage.catalog, stage.clock, 1);
    perf.join({"prompter", "Prompter", std::nullopt, std::nullopt, 1});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<timing::Millis> lat(10, 150);
    std::uniform_int_distribution<timing::Millis> off(-60'000, 60'000);
    std::map<std::string, std::pair<timing::Millis, timing::Millis>> clients;  // latency, offset
    for (int i = 0; i < 10; ++i) {
      const auto nick = "client" + std::to_string(i);
      perf.join({nick, "Receiver", std::nullopt, std::nullopt, static_cast<runtime::ConnectionId>(10 + i)});
      const auto latency = lat(rng);
      const auto true_client_offset = off(rng);  // client minus server
      // Sync with symmetric latency: the estimate is exact.
      const timing::Millis t0 = stage.clock.now() + true_client_offset;
      const timing::Millis t1 = stage.clock.now() + latency;
      const timing::Millis t3 = t1 + true_client_offset + latency;
      const auto est = timing::estimate_offset({t0, t1, t1, t3});
      perf.set_clock_offset(nick, est.client_offset_ms());
      c.expect(est.client_offset_ms() == true_client_offset, "estimated offset");
      clients[nick] = {latency, true_client_offset};
    }
    Designation d;
    d.roles = {"Receiver"};
    const auto result = perf.dispatch("prompter", d, runtime::Outgoing::stored("tone"));
    const auto issue = result.envelope.schedule.issue_at;
    c.expect(result.envelope.schedule.execute_at == issue + budget, "execute_at = issue + budget");
    std::set<timing::Millis> fired;
    std::size_t late = 0;
    for (const auto& del : result.envelope.deliveries) {
      const auto [latency, client_offset] = clients.at(del.nickname);
      const auto* p = perf.find(del.nickname);
      const auto arrival_local = timing::to_local(issue + latency, client_offset);
      const auto target_local = timing::to_local(del.execute_at, p->clock_offset_ms);
      const auto exec = timing::execute_delivery(target_local, arrival_local);
      const auto fired_server = timing::to_server(exec.fire_at, client_offset);
      if (exec.late) {
        ++late;
        c.expect(latency > budget, del.nickname + " flagged late with latency " +
                                       std::to_string(latency));
      } else {
        c.expect(latency <= budget, del.nickname + " not flagged with latency " +
                                        std::to_string(latency));
        fired.insert(fired_server);
      }
    }
    c.expect(result.envelope.deliveries.size() == 10, "ten deliveries");
    if (expect_all_on_time) {
      c.expect(late == 0, std::to_string(late) + " late flags at budget " + std::to_string(budget));
      c.expect(fired.size() == 1 && *fired.begin() == result.envelope.schedule.execute_at,
               "executions not on one server ms");
    } else {
      c.expect(fired.size() <= 1, "on-time clients diverged");
    }
    return late;
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) run(200, seed, true);
  std::size_t total_late = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) total_late += run(50, seed, false);
  c.expect(total_late > 0, "budget 50 produced no late clients");
}

// --- OSC ----------------------------------------------------------------------

void osc_codec(Check& c) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> nargs(0, 6), kind(0, 3), len(0, 17), ch(1, 127);
  std::uniform_int_distribution<std::int32_t> i32(INT32_MIN, INT32_MAX);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int n = 0; n < 10'000; ++n) {
    osc::Message m;
    m.address = "/";
    for (int k = 0, l = len(rng); k < l; ++k) {
      char x = static_cast<char>(ch(rng));
      m.address += x;
    }
    std::vector<ts::RefArg> ref;
    for (int a = 0, na = nargs(rng); a < na; ++a) {
      switch (kind(rng)) {
        case 0: {
          const auto v = i32(rng);
          m.args.emplace_back(v);
          ref.push_back({'i', v, 0, {}, {}});
          break;
        }
        case 1: {
          const std::uint32_t b = bits(rng);
          float f;
          std::memcpy(&f, &b, 4);
          m.args.emplace_back(f);
          ref.push_back({'f', 0, f, {}, {}});
          break;
        }
        case 2: {
          std::string s;
          for (int k = 0, l = len(rng); k < l; ++k) s += static_cast<char>(ch(rng));
          m.args.emplace_back(s);
          ref.push_back({'s', 0, 0, s, {}});
          break;
        }
        default: {
          osc::Blob b;
          for (int k = 0, l = len(rng); k < l; ++k) b.bytes.push_back(static_cast<std::uint8_t>(bits(rng)));
          ref.push_back({'b', 0, 0, {}, b.bytes});
          m.args.emplace_back(std::move(b));
        }
      }
    }
    const auto bytes = osc::encode(m);
    c.expect(bytes.size() % 4 == 0, "unaligned encoding");
    c.expect(bytes == ts::reference_osc_encode(m.address, ref), "differs from reference encoder");
    c.expect(osc::decode(bytes) == m, "round trip #" + std::to_string(n));
  }
  const auto ping = osc::encode({"/ping", {}});
  c.expect(ping.size() == 12, "/ping is 12 bytes");
  c.expect(ping == ts::reference_osc_encode("/ping", {}), "/ping vs reference");
  c.expect(ts::to_hex(ping) == "2f70696e670000002c000000", "/ping golden bytes");
  const auto a1 = osc::encode({"/a", {std::int32_t{1}}});
  c.expect(a1 == ts::reference_osc_encode("/a", {{'i', 1, 0, {}, {}}}), "/a 1 vs reference");
  c.expect(ts::to_hex(a1) == "2f6100002c69000000000001", "/a 1 golden bytes");
  const auto cue = osc::encode(
      {"/cue/1", {std::int32_t{-2}, 0.5f, std::string("hello"), osc::Blob{{1, 2, 3}}}});
  c.expect(ts::to_hex(cue) ==
               "2f6375652f3100002c69667362000000fffffffe3f00000068656c6c6f0000000000000301020300",
           "/cue/1 golden bytes");
}

// --- fractions --------------------------------------------------------------

struct FractionStage {
  MemoryCatalog catalog;
  timing::VirtualClock clock{0};
  Venue venue;
  FractionalAssignment persistent, dynamic;

  explicit FractionStage(std::size_t k) {
    venue.id = "v";
    venue.name = "Fractions";
    venue.roles.push_back({ts::role("Prompter", CapabilitySet::all()), std::nullopt});
    venue.roles.push_back({ts::role("Player", ts::receive_all()), std::nullopt});
    for (std::size_t i = 0; i < k; ++i) catalog.put(ts::audio_object("a" + std::to_string(i)));
    for (auto* f : {&persistent, &dynamic}) {
      f->target_roles = {"Player"};
      for (std::size_t i = 0; i < k; ++i) f->fractions.push_back("a" + std::to_string(i));
    }
    persistent.id = "persistent";
    persistent.mode = FractionMode::Persistent;
    dynamic.id = "dynamic";
    dynamic.mode = FractionMode::Dynamic;
    catalog.put(persistent);
    catalog.put(dynamic);
  }
};

bool partition_laws(const runtime::Partition& p, const std::vector<std::string>& roster,
                    std::size_t k) {
  if (p.size() != k) return false;
  std::multiset<std::string> seen;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& f : p) {
    seen.insert(f.begin(), f.end());
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
  }
  const std::multiset<std::string> want(roster.begin(), roster.end());
  return seen == want && hi - lo <= 1;  // cover + disjoint (multiset equality) + balance
}

void fractions(Check& c) {
  {
    FractionStage s(2);
    runtime::Performance perf("p", s.venue, s.catalog, s.clock, 17);
    for (int i = 0; i < 6; ++i) {
      perf.join({"n" + std::to_string(i), "Player", std::nullopt, std::nullopt, 0});
    }
    const auto first = perf.resolve_fraction(s.persistent);
    for (int call = 0; call < 100; ++call) {
      c.expect(perf.resolve_fraction(s.persistent) == first, "persistent partition changed");
    }
  }
  {
    FractionStage s(2);
    runtime::Performance perf("p", s.venue, s.catalog, s.clock, 4242);
    std::vector<std::string> nicks{"w", "x", "y", "z"};
    for (const auto& n : nicks) perf.join({n, "Player", std::nullopt, std::nullopt, 0});
    std::map<std::string, int> in_zero;
    const int trials = 10'000;
    for (int t = 0; t < trials; ++t) {
      const auto partition = perf.resolve_fraction(s.dynamic);
      for (const auto& n : partition[0]) ++in_zero[n];
    }
    for (const auto& n : nicks) {
      const double freq = static_cast<double>(in_zero[n]) / trials;
      c.expect(std::abs(freq - 0.5) <= 0.02, n + " in fraction 0 with frequency " + std::to_string(freq));
    }
  }
  for (std::size_t k = 2; k <= 5; ++k) {
    for (std::size_t n = 1; n <= 20; ++n) {
      FractionStage s(k);
      runtime::Performance perf("p", s.venue, s.catalog, s.clock, n * 31 + k);
      std::vector<std::string> roster;
      for (std::size_t i = 0; i < n; ++i) {
        roster.push_back("p" + std::to_string(i));
        perf.join({roster.back(), "Player", std::nullopt, std::nullopt, 0});
      }
      const auto label = "n=" + std::to_string(n) + " k=" + std::to_string(k);
      c.expect(partition_laws(runtime::balanced_chunks(roster, k), roster, k), label + " chunks");
      c.expect(partition_laws(perf.resolve_fraction(s.dynamic), roster, k), label + " dynamic");
      c.expect(partition_laws(perf.resolve_fraction(s.persistent), roster, k), label + " persistent");
    }
  }
}

// --- routing precedence -------------------------------------------------------

void routing_precedence(Check& c) {
  MemoryCatalog cat;
  cat.put(ts::audio_object("audio"));
  cat.put(ts::image_object("image"));
  Collection pair;
  pair.id = "pair";
  pair.name = "Pair";
  pair.kind = CollectionKind::AudioImagePair;
  pair.members = {"audio", "image"};
  cat.put(pair);

  Venue venue;
  venue.id = "v";
  venue.name = "Table";
  venue.roles.push_back({ts::role("Prompter", CapabilitySet::all()), std::nullopt});
  venue.roles.push_back({ts::role("Receiver", ts::receive_all()), std::nullopt});
  venue.roles.push_back({ts::role("Listener", {Capability::ReceiveAudio}), std::nullopt});
  venue.roles.push_back({ts::role("Viewer", {Capability::ReceiveImage}), std::nullopt});
  venue.roles.push_back({ts::role("Deaf", {Capability::ReceiveText}), std::nullopt});

  MultiRoleAssignment mra;
  mra.id = "mra";
  mra.name = "Assoc";
  mra.venue_id = "v";
  mra.bindings = {{"Listener", "audio"}, {"Viewer", "image"}};
  cat.put(mra);
  FractionalAssignment fa;
  fa.id = "fa";
  fa.name = "Halves";
  fa.target_roles = {"Receiver"};
  fa.fractions = {"audio", "audio"};
  cat.put(fa);
  AlgorithmObject alg;
  alg.id = "alg";
  alg.name = "Dist";
  Designation step_d;
  step_d.performers = {"r2"};
  alg.spec = DistributionOrganizationSpec{{DistributionStep{"audio", step_d}}};
  cat.put(alg);

  timing::VirtualClock clock(0);
  runtime::Performance perf("p", venue, cat, clock, 3);
  perf.join({"boss", "Prompter", std::nullopt, std::nullopt, 1});
  perf.join({"r1", "Receiver", std::nullopt, std::nullopt, 2});
  perf.join({"r2", "Receiver", std::nullopt, std::nullopt, 3});
  perf.join({"ear", "Listener", std::nullopt, std::nullopt, 4});
  perf.join({"eye", "Viewer", std::nullopt, std::nullopt, 5});
  perf.join({"txt", "Deaf", std::nullopt, std::nullopt, 6});

  // Expected audio receivers for each mechanism in isolation.
  const std::map<std::string, std::set<std::string>> expected{
      {"algorithm", {"r2"}},
      {"fraction", {"r1", "r2"}},
      {"multi-role", {"ear", "eye"}},
      {"performers", {"r1"}},
      {"roles", {"ear"}},
      {"all", {"boss", "r1", "r2", "ear"}},
  };
  const std::vector<std::string> order{"algorithm", "fraction", "multi-role",
                                       "performers", "roles",    "all"};
  for (unsigned mask = 1; mask < 64; ++mask) {
    Designation d;
    if (mask & 1) d.algorithm = "alg";
    if (mask & 2) d.fraction = "fa";
    if (mask & 4) d.multi_role = "mra";
    if (mask & 8) d.performers = {"r1"};
    if (mask & 16) d.roles = {"Listener"};
    if (mask & 32) d.all = true;
    std::string winner;
    for (std::size_t b = 0; b < order.size(); ++b) {
      if (mask & (1u << b)) {
        winner = order[b];
        break;
      }
    }
    const auto plan = perf.resolve_targets("boss", d, runtime::Outgoing::stored("audio"));
    std::set<std::string> got;
    for (const auto& del : plan.deliveries) got.insert(del.nickname);
    const auto label = "mask " + std::to_string(mask);
    c.expect(plan.mechanism == winner, label + ": mechanism " + plan.mechanism + " != " + winner);
    c.expect(got == expected.at(winner), label + ": receivers for " + winner);
  }

  // Capability filtering: the text-only performer never receives audio.
  {
    Designation d;
    d.all = true;
    const auto plan = perf.resolve_targets("boss", d, runtime::Outgoing::stored("audio"));
    bool txt_rejected = false, eye_rejected = false;
    for (const auto& r : plan.rejected) {
      txt_rejected |= r.nickname == "txt";
      eye_rejected |= r.nickname == "eye";
    }
    c.expect(txt_rejected && eye_rejected, "audio to all: non-audio receivers rejected");
  }
  // Pair degradation.
  {
    Designation d;
    d.all = true;
    const auto plan = perf.resolve_targets("boss", d, runtime::Outgoing::stored("pair"));
    std::map<std::string, std::vector<runtime::CuePart::Kind>> kinds;
    for (const auto& del : plan.deliveries) {
      for (const auto& p : del.parts) kinds[del.nickname].push_back(p.kind);
    }
    using K = runtime::CuePart::Kind;
    c.expect(kinds["r1"] == std::vector<K>({K::Audio, K::Image}), "full receiver gets both");
    c.expect(kinds["ear"] == std::vector<K>({K::Audio}), "audio-only receiver gets audio");
    c.expect(kinds["eye"] == std::vector<K>({K::Image}), "image-only receiver gets image");
    c.expect(!kinds.count("txt"), "text-only receiver excluded");
  }
  // Nobody able to receive: routing error with per-receiver reasons.
  {
    Designation d;
    d.performers = {"txt"};
    try {
      perf.resolve_targets("boss", d, runtime::Outgoing::stored("audio"));
      c.expect(false, "expected no-receivers");
    } catch (const runtime::RoutingError& e) {
      c.expect(e.code() == "no-receivers" && e.reasons().size() == 1, "no-receivers reasons");
    }
  }
  // Sender capability gate.
  {
    Designation d;
    d.all = true;
    try {
      perf.resolve_targets("r1", d, runtime::Outgoing::stored("audio"));
      c.expect(false, "receiver without send-audio was allowed to send");
    } catch (const Error& e) {
      c.expect(e.code() == "capability", "capability error code");
    }
  }
}

// --- lifecycle ----------------------------------------------------------------

void lifecycle(Check& c) {
  FractionStage s(2);
  runtime::PerformanceRegistry reg(s.catalog, s.clock, 5);
  auto& perf = reg.start(s.venue, "Show", {"a", "Player", std::nullopt, std::nullopt, 1});
  perf.join({"b", "Player", std::nullopt, std::nullopt, 2});
  perf.join({"c", "Player", std::nullopt, std::nullopt, 3});
  c.expect(perf.roster().size() == 3, "three joined");

  // Rejoin while live keeps persistent membership.
  const auto before = perf.resolve_fraction(s.persistent);
  auto fraction_of = [](const runtime::Partition& p, const std::string& n) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::find(p[i].begin(), p[i].end(), n) != p[i].end()) return static_cast<int>(i);
    }
    return -1;
  };
  const int b_fraction = fraction_of(before, "b");
  c.expect(!perf.leave("b"), "leave of one of three must not destroy");
  perf.join({"d", "Player", std::nullopt, std::nullopt, 4});
  perf.resolve_fraction(s.persistent);
  perf.join({"b", "Player", std::nullopt, std::nullopt, 5});
  const auto after = perf.resolve_fraction(s.persistent);
  c.expect(fraction_of(after, "b") == b_fraction, "rejoin kept the fraction");
  c.expect(fraction_of(after, "a") == fraction_of(before, "a"), "a kept the fraction");
  c.expect(fraction_of(after, "c") == fraction_of(before, "c"), "c kept the fraction");
  perf.leave("d");

  c.expect(!perf.leave("a"), "first of three leaves destroyed the performance");
  c.expect(!perf.leave("b"), "second of three leaves destroyed the performance");
  c.expect(perf.leave("c"), "third leave must destroy");
  c.expect(perf.state() == runtime::PerformanceState::Destroyed, "state destroyed");
  try {
    perf.join({"late", "Player", std::nullopt, std::nullopt, 9});
    c.expect(false, "join after destruction accepted");
  } catch (const Error& e) {
    c.expect(e.code() == "gone", "join after destruction: " + e.code());
  }
  try {
    reg.live("Show");
    c.expect(false, "destroyed performance still live");
  } catch (const Error& e) {
    c.expect(e.code() == "gone", "registry lookup: " + e.code());
  }
  c.expect(reg.live_names().empty(), "no live performances");
}

// --- wire ---------------------------------------------------------------------

void wire_protocol(Check& c) {
  std::size_t files = 0;
  std::set<std::string> types;
  for (const auto& entry : std::filesystem::directory_iterator(TELEBRAIN_GOLDEN_DIR)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto msg = wire::deserialize(bytes);
    c.expect(wire::serialize(msg) == bytes, entry.path().filename().string() + " not byte-identical");
    types.insert(std::string(wire::to_string(msg.type)));
    ++files;
  }
  c.expect(files > 0, "no golden frames found");
  c.expect(types.size() == wire::kAllMessageTypes.size(),
           "golden corpus covers " + std::to_string(types.size()) + " types");

  // Fuzzed reorderings: gaps and regressions are detected exactly.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::uint64_t> seqs(1 + trial % 30);
    std::iota(seqs.begin(), seqs.end(), 1);
    // Drop some, swap some.
    std::vector<std::uint64_t> sent;
    std::bernoulli_distribution drop(0.15), swap(0.15);
    for (auto s : seqs) {
      if (!drop(rng)) sent.push_back(s);
    }
    for (std::size_t i = 1; i < sent.size(); ++i) {
      if (swap(rng)) std::swap(sent[i - 1], sent[i]);
    }
    wire::SeqTracker tracker;
    std::uint64_t expected = 1;
    std::size_t gaps = 0;
    for (auto s : sent) {
      const auto obs = tracker.observe(s);
      if (s == expected) {
        c.expect(obs.verdict == wire::SeqTracker::Verdict::InOrder, "in-order misjudged");
        expected = s + 1;
      } else if (s > expected) {
        c.expect(obs.verdict == wire::SeqTracker::Verdict::Gap && obs.missing == s - expected,
                 "gap misjudged");
        ++gaps;
        expected = s + 1;
      } else {
        c.expect(obs.verdict == wire::SeqTracker::Verdict::Regression, "regression missed");
        break;  // the connection is closed on a regression
      }
    }
    c.expect(tracker.gaps() == gaps, "gap count");
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"bubble-sort oracle equivalence (720 permutations, <5 s)", bubble_sort_oracle},
      {"willful flag law (1000 runs, p=0.3, n=5, capped verdicts)", willful_flag_law},
      {"audio sentence offsets and byte-exact slicing (sizes 1-10)", sentence_offsets},
      {"clock sync (symmetric exact, asymmetric 20 ms, 10 clients at 200/50 ms)", clock_sync},
      {"OSC round trip (10000 messages) and golden bytes", osc_codec},
      {"fractions (persistent, dynamic 0.5+-0.02, partition laws)", fractions},
      {"routing precedence and capability filtering", routing_precedence},
      {"performance lifecycle", lifecycle},
      {"wire golden round trip and seq-gap fuzz", wire_protocol},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (check.ok() ? "PASS" : "FAIL") << "  " << cr.name << "\n";
    for (const auto& f : check.failures) std::cout << "      - " << f << "\n";
    failed += check.ok() ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
