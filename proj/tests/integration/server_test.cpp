// Drives a real Server over loopback sockets: HTTP, WebSocket and OSC UDP.

#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ip/udp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include <thread>

#include "telebrain/content_store.hpp"
#include "telebrain/lock.hpp"
#include "telebrain/server.hpp"
#include "telebrain/wire.hpp"
#include "test_support.hpp"

using namespace telebrain;
using wire::MessageType;
namespace ts = testsupport;
namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

namespace {

class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(io_) {
    tcp::resolver resolver(io_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/perform");
  }

  void send(MessageType t, Json payload) {
    ws_.write(asio::buffer(wire::serialize({t, ++seq_, std::move(payload), Json::object()})));
  }

  wire::WireMessage read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return wire::deserialize(beast::buffers_to_string(buf.data()));
  }

  /// Reads until a frame of type `t` arrives; other frames are skipped.
  wire::WireMessage read_until(MessageType t) {
    for (int i = 0; i < 20; ++i) {
      auto m = read();
      if (m.type == t) return m;
    }
    throw std::runtime_error("expected frame never arrived");
  }

 private:
  asio::io_context io_;
  beast::websocket::stream<tcp::socket> ws_;
  std::uint64_t seq_ = 0;
};

struct ServerTest : ::testing::Test {
  ts::TempDir dir;
  ContentObject clip;
  std::unique_ptr<server::Server> srv;
  std::thread loop;

  void SetUp() override {
    {
      ContentStore store(ContentStore::Options{dir.path(), nullptr, nullptr, 9});
      std::mt19937_64 rng(3);
      clip = store.save_upload(ts::make_wav(ts::random_pcm(rng, 4410)), "audio/wav",
                               ContentKind::AudioUpload, "Chime");
      Venue v;
      v.name = "Hall";
      v.roles.push_back({ts::role("Player", CapabilitySet::all()), std::nullopt});
      store.save(v);
      AlgorithmObject binding;
      binding.name = "Go";
      binding.spec = OscBindingSpec{OscDirection::In, "/go", clip.id};
      store.save(binding);
    }
    ServerConfig cfg;
    cfg.http_port = 0;
    cfg.bind_address = "127.0.0.1";
    cfg.osc.listen_port = 0;
    cfg.data_dir = dir.path();
    cfg.rng_seed = 1;
    srv = std::make_unique<server::Server>(cfg);
    srv->start();
    loop = std::thread([this] { srv->run(); });
  }

  void TearDown() override {
    srv->stop();
    loop.join();
  }

  httplib::Client http() const { return httplib::Client("127.0.0.1", srv->http_port()); }
};

}  // namespace

TEST_F(ServerTest, PerformancesListStartsEmpty) {
  auto res = http().Get("/performances");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body), Json::array());
  EXPECT_EQ(http().Get("/nowhere")->status, 404);
  EXPECT_EQ(http().Get("/blob/deadbeef")->status, 404);
}

TEST_F(ServerTest, JoinSendCueAndFetchBlob) {
  WsClient ana(srv->http_port());
  ana.send(MessageType::Join, wire::join_payload({"Night", "Ana", "Player", std::nullopt,
                                                   "127.0.0.1", "Hall", std::nullopt}));
  const auto ack = ana.read_until(MessageType::JoinAck);
  EXPECT_EQ(ack.payload["performance"], "Night");

  const auto list = Json::parse(http().Get("/performances")->body);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0]["venue"], "Hall");
  EXPECT_EQ(list[0]["performers"], 1);

  wire::SendRequestPayload req;
  req.designation.all = true;
  req.content_id = clip.id;
  ana.send(MessageType::SendRequest, wire::send_request_payload(req));
  const auto cue = ana.read_until(MessageType::Cue);
  EXPECT_EQ(cue.payload["verb"], "play audio");
  const std::string url = cue.payload["parts"][0]["blob_url"];
  EXPECT_EQ(url, "/blob/" + clip.blob_id);

  auto blob = http().Get(url);
  ASSERT_TRUE(blob);
  EXPECT_EQ(blob->status, 200);
  EXPECT_EQ(blob->get_header_value("Content-Type"), "audio/wav");
  EXPECT_EQ(sha256_hex(std::string_view(blob->body)), clip.blob_id);
}

TEST_F(ServerTest, InboundOscTriggersBinding) {
  WsClient ana(srv->http_port());
  ana.send(MessageType::Join, wire::join_payload({"Night", "Ana", "Player", std::nullopt,
                                                   "127.0.0.1", "Hall", std::nullopt}));
  ana.read_until(MessageType::JoinAck);

  asio::io_context io;
  asio::ip::udp::socket udp(io, asio::ip::udp::v4());
  const auto packet = osc::encode({"/go", {}});
  udp.send_to(asio::buffer(packet),
              asio::ip::udp::endpoint(asio::ip::make_address("127.0.0.1"), srv->osc_port()));

  const auto cue = ana.read_until(MessageType::Cue);
  EXPECT_EQ(cue.payload["sender"], "OSC /go");
  EXPECT_EQ(cue.payload["parts"][0]["content_id"], clip.id);
}
