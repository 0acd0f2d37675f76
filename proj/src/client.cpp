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

#include "tesse/client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

#include "tesse/error.hpp"

namespace tesse {
namespace {

using nlohmann::json;

struct AddrInfo {
  addrinfo* list = nullptr;
  ~AddrInfo() {
    if (list) freeaddrinfo(list);
  }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, int socktype) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = socktype;
  AddrInfo out;
  const int rc = getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                             &out.list);
  if (rc != 0 || !out.list) {
    throw TransportError("cannot resolve " + host + ": " + gai_strerror(rc));
  }
  return out;
}

bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  pollfd p{fd, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw TransportError(std::string("poll: ") + std::strerror(errno));
    return rc > 0;
  }
}

}  // namespace

void throw_remote_error(const Message& frame) {
  std::string code = "error";
  std::string message = frame.payload;
  try {
    const json j = json::parse(frame.payload);
    code = j.value("code", code);
    message = j.value("message", message);
  } catch (const json::exception&) {
  }
  if (code == "episode_finished") throw EpisodeFinishedError(message);
  if (code == "state") throw StateError(message);
  if (code == "protocol") throw ProtocolError(message);
  throw Error(message);
}

struct CommandClient::Impl {
  int fd = -1;
  std::chrono::milliseconds timeout;
  FrameReader reader;
};

CommandClient::CommandClient(const std::string& host, std::uint16_t port,
                             std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->timeout = timeout;
  AddrInfo ai = resolve(host, port, SOCK_STREAM);
  const int fd = ::socket(ai.list->ai_family, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, ai.list->ai_addr, ai.list->ai_addrlen) != 0) {
    const int err = errno;
    ::close(fd);
    throw TransportError("cannot connect to " + host + ":" +
                         std::to_string(port) + ": " + std::strerror(err));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  impl_->fd = fd;
}

CommandClient::~CommandClient() {
  if (impl_->fd >= 0) ::close(impl_->fd);
}

void CommandClient::send_raw(std::string_view bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(impl_->fd, bytes.data() + sent, bytes.size() - sent,
                             MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw TransportError(std::string("send: ") + std::strerror(errno));
    sent += static_cast<std::size_t>(n);
  }
}

Message CommandClient::read_frame() {
  std::array<char, 65536> buf;
  for (;;) {
    if (auto m = impl_->reader.next()) return std::move(*m);
    if (!wait_readable(impl_->fd, impl_->timeout)) {
      throw TransportError("timed out waiting for a reply");
    }
    const ssize_t n = ::recv(impl_->fd, buf.data(), buf.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw TransportError(std::string("recv: ") + std::strerror(errno));
    if (n == 0) throw TransportError("connection closed by server");
    impl_->reader.feed({buf.data(), static_cast<std::size_t>(n)});
  }
}

std::vector<Message> CommandClient::request(const Message& msg) {
  send_raw(encode_frame(msg));
  std::vector<Message> out;
  out.push_back(read_frame());
  if (out[0].type != MsgType::kReply) return out;
  std::size_t buffers = 0;
  try {
    const json j = json::parse(out[0].payload);
    if (auto it = j.find("buffers"); it != j.end() && it->is_array()) {
      buffers = it->size();
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("reply is not JSON: ") + e.what());
  }
  for (std::size_t i = 0; i < buffers; ++i) out.push_back(read_frame());
  return out;
}

json CommandClient::call(MsgType type, const json& payload) {
  const auto frames =
      request({type, payload.is_null() ? std::string() : payload.dump()});
  const Message& first = frames.front();
  if (first.type == MsgType::kError) throw_remote_error(first);
  if (first.type == MsgType::kPong) return json::object();
  try {
    return json::parse(first.payload);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("reply is not JSON: ") + e.what());
  }
}

struct OdometryListener::Impl {
  int fd = -1;
};

OdometryListener::OdometryListener() : impl_(std::make_unique<Impl>()) {
  impl_->fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (impl_->fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  const int size = 8 << 20;
  ::setsockopt(impl_->fd, SOL_SOCKET, SO_RCVBUF, &size, sizeof(size));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  if (::bind(impl_->fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw TransportError(std::string("bind: ") + std::strerror(errno));
  }
}

OdometryListener::~OdometryListener() {
  if (impl_->fd >= 0) ::close(impl_->fd);
}

void OdometryListener::subscribe(const std::string& host, std::uint16_t odom_port,
                                 std::uint64_t session_id,
                                 std::chrono::milliseconds timeout) {
  AddrInfo ai = resolve(host, odom_port, SOCK_DGRAM);
  std::string req;
  put_u64(req, session_id);
  for (int attempt = 0; attempt < 3; ++attempt) {
    ::sendto(impl_->fd, req.data(), req.size(), 0, ai.list->ai_addr,
             ai.list->ai_addrlen);
    while (wait_readable(impl_->fd, timeout / 3)) {
      std::array<char, 128> buf;
      const ssize_t n = ::recv(impl_->fd, buf.data(), buf.size(), 0);
      if (n == 8 && get_u64(buf.data()) == session_id) return;
    }
  }
  throw TransportError("odometry subscription was not acknowledged");
}

std::optional<Odometry> OdometryListener::receive(std::chrono::milliseconds timeout) {
  std::array<char, 128> buf;
  while (wait_readable(impl_->fd, timeout)) {
    const ssize_t n = ::recv(impl_->fd, buf.data(), buf.size(), 0);
    if (n == static_cast<ssize_t>(kOdometryPacketSize)) {
      return decode_odometry({buf.data(), kOdometryPacketSize});
    }
  }
  return std::nullopt;
}

std::vector<Odometry> OdometryListener::drain(std::size_t max_count,
                                              std::chrono::milliseconds idle) {
  std::vector<Odometry> out;
  while (out.size() < max_count) {
    auto o = receive(idle);
    if (!o) break;
    out.push_back(*o);
  }
  return out;
}

RemoteEnvironment::RemoteEnvironment(const std::string& host, std::uint16_t port)
    : client_(host, port) {}

ResetInfo RemoteEnvironment::reset(const SessionConfig& config) {
  return ResetInfo::from_json(client_.call(MsgType::kReset, config.to_json()));
}

StepReceipt RemoteEnvironment::act(Action action) {
  return StepReceipt::from_json(
      client_.call(MsgType::kAction, {{"action", action_name(action)}}));
}

Observation RemoteEnvironment::observe(const std::vector<Modality>& modalities) {
  json mods = json::array();
  for (Modality m : modalities) mods.push_back(modality_name(m));
  auto frames = client_.request(
      {MsgType::kGetObs, json{{"modalities", mods}}.dump()});
  if (frames.front().type == MsgType::kError) throw_remote_error(frames.front());
  Observation obs = decode_observation(frames);
  last_frames_ = std::move(frames);
  return obs;
}

EpisodeResult RemoteEnvironment::result() {
  const json j = client_.call(MsgType::kInfo);
  if (!j.contains("result")) throw StateError("no active episode");
  return result_from_json(j.at("result"));
}

std::vector<Message> RemoteEnvironment::last_observation_frames() const {
  return last_frames_;
}

LocalEnvironment::LocalEnvironment(std::shared_ptr<SceneStore> store,
                                   std::uint64_t session_id, OdometrySink* sink)
    : session_(session_id, std::move(store), sink) {}

ResetInfo LocalEnvironment::reset(const SessionConfig& config) {
  return session_.reset(config);
}

StepReceipt LocalEnvironment::act(Action action) { return session_.act(action); }

Observation LocalEnvironment::observe(const std::vector<Modality>& modalities) {
  Observation obs = session_.observe(modalities);
  last_frames_ = encode_observation(obs);
  return obs;
}

EpisodeResult LocalEnvironment::result() {
  return session_.episode().result();
}

std::vector<Message> LocalEnvironment::last_observation_frames() const {
  return last_frames_;
}

}  // namespace tesse
