// Copyright 2026 The tesse-lite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tesse/server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <condition_variable>
#include <list>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "tesse/error.hpp"

namespace tesse {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;
using nlohmann::json;

/// Sends each session's packets to the endpoint that subscribed to it.
/// Send failures (full buffers, unreachable peers) drop the packet.
class UdpBroadcaster : public OdometrySink {
 public:
  explicit UdpBroadcaster(asio::io_context& io) : socket_(io, udp::v4()) {
    socket_.non_blocking(true);
  }

  void subscribe(std::uint64_t id, const udp::endpoint& ep) {
    std::lock_guard lk(mu_);
    subscribers_[id] = ep;
  }

  void unsubscribe(std::uint64_t id) {
    std::lock_guard lk(mu_);
    subscribers_.erase(id);
  }

  void publish(std::uint64_t id, const Odometry& odom) override {
    const std::string bytes = encode_odometry(odom);
    std::lock_guard lk(mu_);
    auto it = subscribers_.find(id);
    if (it == subscribers_.end()) return;
    boost::system::error_code ec;
    socket_.send_to(asio::buffer(bytes), it->second, 0, ec);
  }

 private:
  std::mutex mu_;
  udp::socket socket_;
  std::map<std::uint64_t, udp::endpoint> subscribers_;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<MsgType> msg_type_from_name(std::string_view name) {
  const std::string u = upper(name);
  for (int t = 0; t < 256; ++t) {
    if (!is_known_type(static_cast<std::uint8_t>(t))) continue;
    const auto type = static_cast<MsgType>(t);
    if (msg_type_name(type) == u) return type;
  }
  return std::nullopt;
}

Message ws_request_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("websocket message must be an object");
  auto it = j.find("type");
  if (it == j.end()) throw ProtocolError("/type: missing");
  std::optional<MsgType> type;
  if (it->is_string()) {
    type = msg_type_from_name(it->get<std::string>());
  } else if (it->is_number_integer() && it->get<std::int64_t>() >= 0 &&
             it->get<std::int64_t>() < 256 &&
             is_known_type(static_cast<std::uint8_t>(it->get<std::int64_t>()))) {
    type = static_cast<MsgType>(it->get<std::int64_t>());
  }
  if (!type || !is_request(*type)) throw ProtocolError("/type: unknown request type");
  Message m{*type, ""};
  if (auto p = j.find("payload"); p != j.end() && !p->is_null()) {
    if (!p->is_object()) throw ProtocolError("/payload: expected object");
    m.payload = p->dump();
  }
  return m;
}

json ws_response_to_json(const std::vector<Message>& frames) {
  if (frames.empty()) throw Error("empty response");
  json out = {{"type", msg_type_name(frames[0].type)}};
  if (!frames[0].payload.empty()) out["payload"] = json::parse(frames[0].payload);
  if (frames.size() > 1) {
    json bufs = json::array();
    for (std::size_t i = 1; i < frames.size(); ++i) {
      bufs.push_back(base64_encode(frames[i].payload));
    }
    out["buffers"] = std::move(bufs);
  }
  return out;
}

struct Server::Impl {
  explicit Impl(ServerOptions o)
      : opt(std::move(o)),
        store(std::make_shared<SceneStore>(opt.scene_dir)),
        cmd_acceptor(io),
        ws_acceptor(io),
        odom_socket(io),
        broadcaster(io) {}

  struct Connection {
    std::thread thread;
    int fd = -1;
    std::shared_ptr<std::atomic<bool>> finished;
  };

  ServerOptions opt;
  std::shared_ptr<SceneStore> store;
  asio::io_context io;
  tcp::acceptor cmd_acceptor;
  tcp::acceptor ws_acceptor;
  udp::socket odom_socket;
  UdpBroadcaster broadcaster;
  std::thread io_thread;
  std::atomic<std::uint64_t> next_session{1};
  std::uint16_t bound_cmd = 0;
  std::uint16_t bound_odom = 0;
  std::uint16_t bound_ws = 0;

  std::mutex conn_mu;
  std::list<Connection> connections;
  bool stopping = false;

  std::mutex state_mu;
  std::condition_variable state_cv;
  bool running = false;

  std::array<char, 64> sub_buf{};
  udp::endpoint sub_from;

  void listen(tcp::acceptor& acc, std::uint16_t port) {
    const tcp::endpoint ep(asio::ip::make_address(opt.host), port);
    acc.open(ep.protocol());
    acc.set_option(tcp::acceptor::reuse_address(true));
    acc.bind(ep);
    acc.listen();
  }

  void accept(tcp::acceptor& acc, bool ws) {
    acc.async_accept([this, &acc, ws](boost::system::error_code ec,
                                      tcp::socket sock) {
      if (ec == asio::error::operation_aborted) return;
      if (!ec) spawn(std::move(sock), ws);
      accept(acc, ws);
    });
  }

  void receive_subscriptions() {
    odom_socket.async_receive_from(
        asio::buffer(sub_buf), sub_from,
        [this](boost::system::error_code ec, std::size_t n) {
          if (ec == asio::error::operation_aborted) return;
          if (!ec && n == 8) {
            broadcaster.subscribe(get_u64(sub_buf.data()), sub_from);
            boost::system::error_code ignored;
            odom_socket.send_to(asio::buffer(sub_buf.data(), 8), sub_from, 0,
                                ignored);
          }
          receive_subscriptions();
        });
  }

  void spawn(tcp::socket sock, bool ws) {
    std::lock_guard lk(conn_mu);
    if (stopping) return;
    for (auto it = connections.begin(); it != connections.end();) {
      if (it->finished->load()) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
    boost::system::error_code ec;
    sock.set_option(tcp::no_delay(true), ec);
    Connection c;
    c.fd = sock.native_handle();
    c.finished = std::make_shared<std::atomic<bool>>(false);
    auto finished = c.finished;
    auto shared = std::make_shared<tcp::socket>(std::move(sock));
    c.thread = std::thread([this, shared, ws, finished] {
      try {
        if (ws) {
          serve_ws(*shared);
        } else {
          serve_command(*shared);
        }
      } catch (const std::exception&) {
        // Connection-level failure; the session is dropped.
      }
      {
        std::lock_guard lk2(conn_mu);
        for (Connection& conn : connections) {
          if (conn.finished == finished) conn.fd = -1;
        }
      }
      boost::system::error_code ignored;
      shared->shutdown(tcp::socket::shutdown_both, ignored);
      shared->close(ignored);
      finished->store(true);
    });
    connections.push_back(std::move(c));
  }

  void serve_command(tcp::socket& sock) {
    Session session(next_session++, store, &broadcaster, opt.defaults);
    FrameReader reader;
    std::array<char, 65536> buf;
    bool open = true;
    while (open) {
      boost::system::error_code ec;
      const std::size_t n = sock.read_some(asio::buffer(buf), ec);
      if (ec) break;
      reader.feed({buf.data(), n});
      while (open) {
        std::vector<Message> out;
        try {
          auto msg = reader.next();
          if (!msg) break;
          out = session.handle(*msg);
          open = !session.closed();
        } catch (const ProtocolError& e) {
          out = {{MsgType::kError,
                  json{{"code", "protocol"}, {"message", e.what()}}.dump()}};
          open = false;
        }
        std::string bytes;
        for (const Message& m : out) bytes += encode_frame(m);
        asio::write(sock, asio::buffer(bytes), ec);
        if (ec) open = false;
      }
    }
    broadcaster.unsubscribe(session.id());
  }

  void serve_ws(tcp::socket& sock) {
    websocket::stream<tcp::socket&> ws(sock);
    ws.accept();
    Session session(next_session++, store, &broadcaster, opt.defaults);
    for (;;) {
      beast::flat_buffer buffer;
      boost::system::error_code ec;
      ws.read(buffer, ec);
      if (ec) break;
      std::vector<Message> out;
      bool close = false;
      try {
        const json j = json::parse(beast::buffers_to_string(buffer.data()));
        out = session.handle(ws_request_from_json(j));
        close = session.closed();
      } catch (const std::exception& e) {
        out = {{MsgType::kError,
                json{{"code", "protocol"}, {"message", e.what()}}.dump()}};
        close = true;
      }
      ws.text(true);
      ws.write(asio::buffer(ws_response_to_json(out).dump()), ec);
      if (ec) break;
      if (close) {
        ws.close(websocket::close_code::protocol_error, ec);
        break;
      }
    }
    broadcaster.unsubscribe(session.id());
  }
};

Server::Server(ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  Impl& s = *impl_;
  {
    std::lock_guard lk(s.state_mu);
    if (s.running) throw StateError("server already running");
  }
  try {
    s.listen(s.cmd_acceptor, s.opt.port);
    if (s.opt.enable_ws) s.listen(s.ws_acceptor, s.opt.ws_port);
    const udp::endpoint ep(asio::ip::make_address(s.opt.host), s.opt.odom_port);
    s.odom_socket.open(ep.protocol());
    s.odom_socket.bind(ep);
    s.bound_cmd = s.cmd_acceptor.local_endpoint().port();
    s.bound_odom = s.odom_socket.local_endpoint().port();
    if (s.opt.enable_ws) s.bound_ws = s.ws_acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw TransportError(std::string("cannot bind server sockets: ") + e.what());
  }
  s.accept(s.cmd_acceptor, false);
  if (s.opt.enable_ws) s.accept(s.ws_acceptor, true);
  s.receive_subscriptions();
  s.io_thread = std::thread([&s] { s.io.run(); });
  std::lock_guard lk(s.state_mu);
  s.running = true;
}

void Server::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lk(s.state_mu);
    if (!s.running) return;
  }
  s.io.stop();
  if (s.io_thread.joinable()) s.io_thread.join();
  boost::system::error_code ec;
  s.cmd_acceptor.close(ec);
  s.ws_acceptor.close(ec);
  s.odom_socket.close(ec);
  std::list<Impl::Connection> conns;
  {
    std::lock_guard lk(s.conn_mu);
    s.stopping = true;
    for (auto& c : s.connections) {
      if (c.fd >= 0) ::shutdown(c.fd, SHUT_RDWR);
    }
    conns.swap(s.connections);
  }
  for (auto& c : conns) c.thread.join();
  std::lock_guard lk(s.state_mu);
  s.running = false;
  s.state_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lk(impl_->state_mu);
  impl_->state_cv.wait(lk, [this] { return !impl_->running; });
}

std::uint16_t Server::port() const {
  return impl_->bound_cmd;
}

std::uint16_t Server::odom_port() const {
  return impl_->bound_odom;
}

std::uint16_t Server::ws_port() const {
  return impl_->bound_ws;
}

}  // namespace tesse
