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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "tesse/session.hpp"

namespace tesse {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9000;      // command stream (TCP)
  std::uint16_t odom_port = 9001; // odometry datagrams (UDP)
  std::uint16_t ws_port = 9002;   // websocket JSON mirror
  bool enable_ws = true;
  std::filesystem::path scene_dir;
  SessionDefaults defaults;
};

/// Command server. Each TCP or websocket connection owns one Session.
/// Port 0 binds an ephemeral port; the bound ports are reported after start().
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t port() const;
  std::uint16_t odom_port() const;
  std::uint16_t ws_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Websocket text message -> request Message. Expects
/// {"type": "<NAME>" | id, "payload": {...}}. Throws ProtocolError.
Message ws_request_from_json(const nlohmann::json& j);
/// Response frames -> one websocket JSON text: {"type", "payload", "buffers"}
/// with buffers base64-encoded.
nlohmann::json ws_response_to_json(const std::vector<Message>& frames);

std::optional<MsgType> msg_type_from_name(std::string_view name);

}  // namespace tesse
