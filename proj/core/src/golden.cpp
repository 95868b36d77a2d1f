#include "telebrain/golden.hpp"

#include <cstdio>
#include <fstream>

#include "telebrain/content_store.hpp"
#include "telebrain/service.hpp"
#include "telebrain/wire.hpp"

namespace telebrain::wire {

namespace {

class Recorder {
 public:
  explicit Recorder(server::StageService& service) : service_(service) {}

  void client(server::ConnectionId from, MessageType type, Json payload) {
    WireMessage msg{type, ++seq_[from], std::move(payload), Json::object()};
    const auto text = serialize(msg);
    add("client", type, text);
    for (const auto& o : service_.on_frame(from, text)) {
      add("server", deserialize(o.frame).type, o.frame);
    }
  }

  std::vector<GoldenFrame> frames;

 private:
  void add(const char* direction, MessageType type, const std::string& text) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02zu", frames.size() + 1);
    frames.push_back({std::string(prefix) + "-" + direction + "-" + std::string(to_string(type)),
                      direction, text});
  }

  server::StageService& service_;
  std::map<server::ConnectionId, std::uint64_t> seq_;
};

}  // namespace

std::vector<GoldenFrame> golden_corpus(const std::filesystem::path& scratch) {
  ContentStore store(ContentStore::Options{scratch, nullptr,
                                           std::make_shared<audio::ToneStubTts>(), 7});
  const auto hello = store.save_tts("hello", "en", "Hello");

  Venue venue;
  venue.name = "Studio";
  venue.roles.push_back({Role{"", "Prompter", CapabilitySet::all(), false, std::nullopt}, 1});
  venue.roles.push_back(
      {Role{"",
            "Receiver",
            {Capability::ReceiveAudio, Capability::ReceiveImage, Capability::ReceiveText,
             Capability::ReceiveTtsLive, Capability::PerformerActivityLog},
            true,
            std::nullopt},
       std::nullopt});
  venue.delay_budget_ms = 200;
  store.save(venue);

  timing::VirtualClock clock(1'700'000'000'000);
  server::StageService service(store, clock, server::StageService::Options{200, 0, 57120, 11});
  service.connect(1);
  service.connect(2);
  Recorder rec(service);

  rec.client(1, MessageType::Join,
             join_payload({"Golden", "Ada", "Prompter", std::nullopt, std::nullopt, "Studio",
                           1'699'999'999'990}));
  clock.advance(5);
  rec.client(2, MessageType::Join,
             join_payload({"Golden", "Bo", "Receiver", std::nullopt, std::nullopt, std::nullopt,
                           1'700'000'000'001}));
  clock.advance(5);
  rec.client(2, MessageType::ClockPing, Json{{"t0", 1'700'000'000'008}});
  clock.advance(5);
  SendRequestPayload send;
  send.designation.all = true;
  send.content_id = hello.id;
  rec.client(1, MessageType::SendRequest, send_request_payload(send));
  clock.advance(5);
  rec.client(2, MessageType::CueAck,
             cue_ack_payload({"Golden/1", false, 1'700'000'000'215, std::nullopt}));
  FunctionalityPayload fp;
  fp.target = "Bo";
  fp.capabilities = CapabilitySet{Capability::ReceiveAudio, Capability::ReceiveText,
                                  Capability::SendText, Capability::PerformerActivityLog};
  rec.client(1, MessageType::FunctionalityChange, functionality_payload(fp));
  rec.client(1, MessageType::TestToggle, Json{{"on", true}});
  SendRequestPayload refused;
  refused.designation.performers = {"Ada"};
  refused.osc = osc::Message{"/cue/1", {std::int32_t{1}}};
  rec.client(2, MessageType::SendRequest, send_request_payload(refused));
  rec.client(2, MessageType::Leave, Json::object());
  return std::move(rec.frames);
}

void write_golden(const std::vector<GoldenFrame>& frames, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : frames) {
    std::ofstream out(dir / (f.name + ".json"), std::ios::binary | std::ios::trunc);
    out << f.frame;
    if (!out) throw Error("io", "cannot write " + (dir / (f.name + ".json")).string());
  }
}

}  // namespace telebrain::wire
