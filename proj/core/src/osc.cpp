#include "telebrain/osc.hpp"

#include <bit>
#include <cstring>

#include "log.hpp"

namespace telebrain::osc {
namespace {

constexpr std::size_t padded(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.find('\0') != std::string::npos) throw Error("osc-invalid", "OSC strings cannot hold NUL");
  out.insert(out.end(), s.begin(), s.end());
  out.resize(out.size() + padded(s.size() + 1) - s.size(), 0);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t offset() const { return at_; }
  bool done() const { return at_ == b_.size(); }

  std::uint32_t be32() {
    need(4, "truncated 32-bit value");
    const auto* p = b_.data() + at_;
    at_ += 4;
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | p[3];
  }

  std::string str() {
    const auto start = at_;
    const auto* begin = b_.data() + at_;
    const auto* nul = static_cast<const std::uint8_t*>(std::memchr(begin, 0, b_.size() - at_));
    if (nul == nullptr) throw DecodeError(start, "unterminated string");
    const auto len = static_cast<std::size_t>(nul - begin);
    const auto total = padded(len + 1);
    if (total > b_.size() - at_) throw DecodeError(start, "string padding truncated");
    for (std::size_t i = len; i < total; ++i) {
      if (b_[at_ + i] != 0) throw DecodeError(at_ + i, "nonzero string padding");
    }
    std::string s(reinterpret_cast<const char*>(begin), len);
    at_ += total;
    return s;
  }

  Blob blob() {
    const auto start = at_;
    const auto size = be32();
    if (size > b_.size() - at_ || padded(size) > b_.size() - at_) {
      throw DecodeError(start, "blob truncated");
    }
    Blob out{std::vector<std::uint8_t>(b_.begin() + at_, b_.begin() + at_ + size)};
    for (std::size_t i = size; i < padded(size); ++i) {
      if (b_[at_ + i] != 0) throw DecodeError(at_ + i, "nonzero blob padding");
    }
    at_ += padded(size);
    return out;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (n > b_.size() - at_) throw DecodeError(at_, what);
  }

  std::span<const std::uint8_t> b_;
  std::size_t at_ = 0;
};

}  // namespace

bool operator==(const Message& a, const Message& b) {
  if (a.address != b.address || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const auto& x = a.args[i];
    const auto& y = b.args[i];
    if (x.index() != y.index()) return false;
    if (const auto* fx = std::get_if<float>(&x)) {
      if (std::bit_cast<std::uint32_t>(*fx) != std::bit_cast<std::uint32_t>(std::get<float>(y))) {
        return false;
      }
    } else if (x != y) {
      return false;
    }
  }
  return true;
}

char type_tag(const Argument& arg) {
  static constexpr char kTags[] = {'i', 'f', 's', 'b'};
  return kTags[arg.index()];
}

std::vector<std::uint8_t> encode(const Message& msg) {
  if (msg.address.empty() || msg.address.front() != '/') {
    throw Error("osc-invalid", "OSC address must begin with '/'");
  }
  std::vector<std::uint8_t> out;
  put_string(out, msg.address);
  std::string tags = ",";
  for (const auto& a : msg.args) tags.push_back(type_tag(a));
  put_string(out, tags);
  for (const auto& a : msg.args) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int32_t>) {
            put_be32(out, static_cast<std::uint32_t>(v));
          } else if constexpr (std::is_same_v<T, float>) {
            put_be32(out, std::bit_cast<std::uint32_t>(v));
          } else if constexpr (std::is_same_v<T, std::string>) {
            put_string(out, v);
          } else {
            put_be32(out, static_cast<std::uint32_t>(v.bytes.size()));
            out.insert(out.end(), v.bytes.begin(), v.bytes.end());
            out.resize(out.size() + padded(v.bytes.size()) - v.bytes.size(), 0);
          }
        },
        a);
  }
  return out;
}

Message decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) throw DecodeError(bytes.size(), "length not a multiple of 4");
  Reader r(bytes);
  Message msg;
  if (bytes.empty() || bytes[0] != '/') throw DecodeError(0, "address must begin with '/'");
  msg.address = r.str();
  if (r.done()) throw DecodeError(r.offset(), "missing type tag string");

  const auto tag_offset = r.offset();
  const auto tags = r.str();
  if (tags.empty() || tags.front() != ',') throw DecodeError(tag_offset, "type tags must start with ','");
  for (std::size_t i = 1; i < tags.size(); ++i) {
    switch (tags[i]) {
      case 'i':
        msg.args.emplace_back(static_cast<std::int32_t>(r.be32()));
        break;
      case 'f':
        msg.args.emplace_back(std::bit_cast<float>(r.be32()));
        break;
      case 's':
        msg.args.emplace_back(r.str());
        break;
      case 'b':
        msg.args.emplace_back(r.blob());
        break;
      default:
        throw DecodeError(tag_offset + i, std::string("unsupported type tag '") + tags[i] + "'");
    }
  }
  if (!r.done()) throw DecodeError(r.offset(), "trailing bytes after arguments");
  return msg;
}

void Router::bind(const std::string& address, InboundAction action) {
  if (address.empty() || address.front() != '/') {
    throw Error("osc-invalid", "OSC address must begin with '/'");
  }
  if (target_exists_ && !action.target_id.empty() && !target_exists_(action.target_id)) {
    throw Error("not-found", "OSC binding target '" + action.target_id + "' does not exist");
  }
  bindings_.emplace_back(address, std::move(action));
}

std::vector<InboundAction> Router::dispatch(const Message& msg) {
  std::vector<InboundAction> out;
  for (const auto& [address, action] : bindings_) {
    if (address == msg.address) out.push_back(action);
  }
  if (out.empty()) {
    detail::logger()->info("osc: dropped unbound address {}", msg.address);
    dropped_.push_back(msg.address);
  }
  return out;
}

Endpoint outbound_endpoint(const std::optional<std::string>& local_ip, std::uint16_t port) {
  if (!local_ip || local_ip->empty()) {
    throw Error("no-local-ip", "performer has no local IP address registered for OSC");
  }
  return Endpoint{*local_ip, port};
}

}  // namespace telebrain::osc
