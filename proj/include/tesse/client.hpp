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

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tesse/environment.hpp"

namespace tesse {

/// Blocking client for the command stream. Every failure of the connection
/// itself raises TransportError; ERROR replies are rethrown as the matching
/// library error (StateError, EpisodeFinishedError, ProtocolError, Error).
class CommandClient {
 public:
  CommandClient(const std::string& host, std::uint16_t port,
                std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~CommandClient();
  CommandClient(const CommandClient&) = delete;
  CommandClient& operator=(const CommandClient&) = delete;

  /// Sends one request and returns the reply frame plus declared buffers.
  std::vector<Message> request(const Message& msg);
  /// request() for JSON commands; returns the parsed reply.
  nlohmann::json call(MsgType type, const nlohmann::json& payload = nullptr);

  void send_raw(std::string_view bytes);
  /// Reads exactly one frame.
  Message read_frame();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Subscribes to a session's odometry datagrams.
class OdometryListener {
 public:
  OdometryListener();
  ~OdometryListener();

  /// Registers for session_id and waits for the server acknowledgement.
  void subscribe(const std::string& host, std::uint16_t odom_port,
                 std::uint64_t session_id,
                 std::chrono::milliseconds timeout = std::chrono::seconds(2));
  std::optional<Odometry> receive(std::chrono::milliseconds timeout);
  /// Collects packets until max_count arrive or the link is quiet for idle.
  std::vector<Odometry> drain(std::size_t max_count,
                              std::chrono::milliseconds idle);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class RemoteEnvironment : public Environment {
 public:
  RemoteEnvironment(const std::string& host, std::uint16_t port);

  ResetInfo reset(const SessionConfig& config) override;
  StepReceipt act(Action action) override;
  Observation observe(const std::vector<Modality>& modalities) override;
  EpisodeResult result() override;
  std::vector<Message> last_observation_frames() const override;

  CommandClient& client() { return client_; }

 private:
  CommandClient client_;
  std::vector<Message> last_frames_;
};

/// Raises the library error matching an ERROR reply.
[[noreturn]] void throw_remote_error(const Message& error_frame);

}  // namespace tesse
