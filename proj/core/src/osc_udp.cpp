#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/udp.hpp>

#include "telebrain/osc.hpp"

namespace telebrain::osc {

namespace asio = boost::asio;
using asio::ip::udp;

struct UdpSender::Impl {
  asio::io_context io;
  udp::socket socket{io};
  udp::resolver resolver{io};
};

UdpSender::UdpSender() : impl_(std::make_unique<Impl>()) {}
UdpSender::~UdpSender() = default;

void UdpSender::send(const Endpoint& to, const Message& msg) {
  const auto bytes = encode(msg);
  boost::system::error_code ec;
  auto results = impl_->resolver.resolve(udp::v4(), to.host, std::to_string(to.port), ec);
  if (ec || results.empty()) {
    throw Error("osc-send", "cannot resolve " + to.host + ": " + ec.message());
  }
  if (!impl_->socket.is_open()) {
    impl_->socket.open(udp::v4(), ec);
    if (ec) throw Error("osc-send", "cannot open UDP socket: " + ec.message());
  }
  impl_->socket.send_to(asio::buffer(bytes), results.begin()->endpoint(), 0, ec);
  if (ec) throw Error("osc-send", "send to " + to.host + " failed: " + ec.message());
}

}  // namespace telebrain::osc
