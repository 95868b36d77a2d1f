#include "telebrain/server.hpp"

#include "log.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ip/udp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <map>

#include "telebrain/content_store.hpp"
#include "telebrain/service.hpp"

namespace telebrain::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;

namespace {

class WsSession;

/// Shared state reachable from every session.
struct Hub {
  ContentStore* store = nullptr;
  StageService* service = nullptr;
  std::map<ConnectionId, std::weak_ptr<WsSession>> sessions;
  ConnectionId next_id = 1;

  void route(std::vector<Outbound> frames);
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub, ConnectionId id)
      : ws_(std::move(socket)), hub_(hub), id_(id) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return detail::logger()->debug("ws accept: {}", ec.message());
      self->hub_.sessions[self->id_] = self;
      self->hub_.service->connect(self->id_);
      self->read();
    });
  }

  void send(std::string frame, bool close_after) {
    queue_.push_back({std::move(frame), close_after});
    if (queue_.size() == 1) write_next();
  }

 private:
  struct Pending {
    std::string frame;
    bool close;
  };

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->closed();
      auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->hub_.route(self->hub_.service->on_frame(self->id_, text));
      if (!self->closing_) self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front().frame),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->closed();
                      const bool close = self->queue_.front().close;
                      self->queue_.pop_front();
                      if (close) {
                        self->closing_ = true;
                        self->ws_.async_close(websocket::close_code::policy_error,
                                              [self](beast::error_code) { self->closed(); });
                        return;
                      }
                      if (!self->queue_.empty()) self->write_next();
                    });
  }

  void closed() {
    if (gone_) return;
    gone_ = true;
    hub_.sessions.erase(id_);
    hub_.route(hub_.service->disconnect(id_));
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Hub& hub_;
  ConnectionId id_;
  std::deque<Pending> queue_;
  bool closing_ = false;
  bool gone_ = false;
};

void Hub::route(std::vector<Outbound> frames) {
  for (auto& f : frames) {
    auto it = sessions.find(f.to);
    if (it == sessions.end()) continue;
    if (auto s = it->second.lock()) s->send(std::move(f.frame), f.close);
  }
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Hub& hub) : stream_(std::move(socket)), hub_(hub) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->on_request();
                     });
  }

  void on_request() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/perform") return reply(http::status::not_found, "no such endpoint");
      stream_.expires_never();
      auto ws = std::make_shared<WsSession>(stream_.release_socket(), hub_, hub_.next_id++);
      ws->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get) {
      return reply(http::status::method_not_allowed, "only GET is supported");
    }
    const std::string target(req_.target());
    if (target == "/performances") {
      return reply(http::status::ok, hub_.service->performances().dump(), "application/json");
    }
    constexpr std::string_view blob_prefix = "/blob/";
    if (target.rfind(blob_prefix, 0) == 0) {
      try {
        auto blob = hub_.store->blob(target.substr(blob_prefix.size()));
        return reply(http::status::ok, std::string(blob.bytes.begin(), blob.bytes.end()), blob.mime);
      } catch (const Error& e) {
        return reply(http::status::not_found, e.what());
      }
    }
    reply(http::status::not_found, "no such endpoint");
  }

  void reply(http::status status, std::string body,
             std::string_view content_type = "text/plain; charset=utf-8") {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "telebrain");
    res->set(http::field::content_type, beast::string_view(content_type.data(), content_type.size()));
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (res->keep_alive()) {
                          self->read();
                        } else {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                        }
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Hub& hub_;
};

std::shared_ptr<audio::TtsAdapter> make_tts(const ServerConfig& cfg) {
  if (cfg.tts) return std::make_shared<audio::HttpTtsAdapter>(*cfg.tts);
  return std::make_shared<audio::ToneStubTts>();
}

}  // namespace

struct Server::Impl {
  ServerConfig config;
  asio::io_context io{1};
  timing::SystemClock clock;
  ContentStore store;
  osc::UdpSender osc_out;
  StageService service;
  Hub hub;
  tcp::acceptor acceptor{io};
  udp::socket osc_in{io};
  std::array<std::uint8_t, 65536> osc_buffer{};
  udp::endpoint osc_peer;

  explicit Impl(ServerConfig cfg)
      : config(std::move(cfg)),
        store(ContentStore::Options{config.data_dir, nullptr, make_tts(config), std::nullopt}),
        service(store, clock,
                StageService::Options{config.delay_budget_ms, config.utc_offset_minutes(),
                                      config.osc.default_send_port, config.rng_seed, "/blob/", 3},
                [this](const osc::Endpoint& to, const osc::Message& m) { osc_out.send(to, m); }) {
    hub.store = &store;
    hub.service = &service;
  }

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket s) {
      if (!ec) std::make_shared<HttpSession>(std::move(s), hub)->start();
      if (acceptor.is_open()) accept();
    });
  }

  void receive_osc() {
    osc_in.async_receive_from(
        asio::buffer(osc_buffer), osc_peer, [this](beast::error_code ec, std::size_t n) {
          if (ec) {
            if (ec != asio::error::operation_aborted) detail::logger()->warn("OSC socket: {}", ec.message());
            return;
          }
          try {
            const auto msg = osc::decode(std::span(osc_buffer.data(), n));
            hub.route(service.on_osc(msg));
          } catch (const Error& e) {
            detail::logger()->info("dropped OSC datagram from {}: {}", osc_peer.address().to_string(),
                         e.what());
          }
          receive_osc();
        });
  }
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Server::~Server() = default;

void Server::start() {
  auto& i = *impl_;
  const auto address = asio::ip::make_address(i.config.bind_address);
  const tcp::endpoint http_ep{address, i.config.http_port};
  i.acceptor.open(http_ep.protocol());
  i.acceptor.set_option(asio::socket_base::reuse_address(true));
  i.acceptor.bind(http_ep);
  i.acceptor.listen();

  const udp::endpoint osc_ep{address, i.config.osc.listen_port};
  i.osc_in.open(osc_ep.protocol());
  i.osc_in.bind(osc_ep);

  i.accept();
  i.receive_osc();
  detail::logger()->info("listening: http/ws {}:{}, osc udp {}, data dir {}", i.config.bind_address,
               http_port(), osc_port(), i.config.data_dir.string());
}

void Server::run() { impl_->io.run(); }

void Server::stop() {
  asio::post(impl_->io, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->osc_in.close(ec);
    impl_->io.stop();
  });
}

std::uint16_t Server::http_port() const { return impl_->acceptor.local_endpoint().port(); }
std::uint16_t Server::osc_port() const { return impl_->osc_in.local_endpoint().port(); }

}  // namespace telebrain::server
