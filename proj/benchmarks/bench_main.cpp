#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "telebrain/audio.hpp"
#include "telebrain/catalog.hpp"
#include "telebrain/osc.hpp"
#include "telebrain/perpl.hpp"
#include "telebrain/timing.hpp"
#include "telebrain/venue_runtime.hpp"

using namespace telebrain;
using namespace telebrain::runtime;
using namespace telebrain::audio;
using namespace telebrain::perpl;

static void BM_OscEncode(benchmark::State& state) {
  osc::Message m{"/stage/cue", {std::int32_t{7}, 0.5f, std::string("hello"),
                                osc::Blob{std::vector<std::uint8_t>(64, 1)}}};
  for (auto _ : state) benchmark::DoNotOptimize(osc::encode(m));
}
BENCHMARK(BM_OscEncode);

static void BM_OscDecode(benchmark::State& state) {
  osc::Message m{"/stage/cue", {std::int32_t{7}, 0.5f, std::string("hello"),
                                osc::Blob{std::vector<std::uint8_t>(64, 1)}}};
  const auto bytes = osc::encode(m);
  for (auto _ : state) benchmark::DoNotOptimize(osc::decode(bytes));
}
BENCHMARK(BM_OscDecode);

static void BM_SentenceConcatenation(benchmark::State& state) {
  const auto members = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::int16_t>> pcm;
  std::mt19937 rng(1);
  for (std::size_t i = 0; i < members; ++i) {
    pcm.emplace_back(22050 + rng() % 22050, static_cast<std::int16_t>(i));
  }
  std::vector<AudioClip> clips;
  for (std::size_t i = 0; i < members; ++i) clips.push_back({std::to_string(i), pcm[i]});
  for (auto _ : state) benchmark::DoNotOptimize(concatenate_sentence(clips));
}
BENCHMARK(BM_SentenceConcatenation)->Arg(2)->Arg(10)->Arg(50);

static void BM_RoutingByRole(benchmark::State& state) {
  const auto performers = static_cast<int>(state.range(0));
  MemoryCatalog catalog;
  ContentObject audio;
  audio.id = "a";
  audio.name = "Tone";
  audio.kind = ContentKind::AudioUpload;
  audio.duration_ms = 1000;
  catalog.put(audio);
  Role lead;
  lead.name = "Lead";
  lead.capabilities = CapabilitySet::all();
  Role listener;
  listener.name = "Listener";
  listener.capabilities = CapabilitySet{Capability::ReceiveAudio};
  Venue venue;
  venue.name = "Hall";
  venue.roles = {{lead, 1}, {listener, std::nullopt}};
  timing::VirtualClock clock(1000);
  Performance perf("Show", venue, catalog, clock, 1);
  perf.join({"lead", "Lead", std::nullopt, std::nullopt, 1});
  for (int i = 0; i < performers; ++i) {
    perf.join({"p" + std::to_string(i), "Listener", std::nullopt, std::nullopt,
               static_cast<ConnectionId>(i + 2)});
  }
  Designation d;
  d.roles = {"Listener"};
  const auto what = Outgoing::stored("a");
  for (auto _ : state) benchmark::DoNotOptimize(perf.resolve_targets("lead", d, what));
}
BENCHMARK(BM_RoutingByRole)->Arg(10)->Arg(100);

static void BM_BubbleSort(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> values(n);
  std::iota(values.rbegin(), values.rend(), 0.0);
  for (auto _ : state) {
    ObedientSwap policy;
    benchmark::DoNotOptimize(performatize_bubble_sort(values, policy));
  }
}
BENCHMARK(BM_BubbleSort)->Arg(8)->Arg(64);
BENCHMARK_MAIN();
