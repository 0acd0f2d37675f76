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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "tesse/kinematics.hpp"

namespace tesse {

/// Command stream frame: [u32 LE payload length][u8 type][payload].
enum class MsgType : std::uint8_t {
  kPing = 0x01,
  kReset = 0x02,
  kAction = 0x03,
  kForce = 0x04,
  kStep = 0x05,
  kGetObs = 0x06,
  kSetMode = 0x07,
  kExportMesh = 0x08,
  kInfo = 0x09,
  kPong = 0x80,
  kReply = 0x81,  // JSON payload
  kBuffer = 0x83, // raw bytes following a reply
  kError = 0xEE,  // JSON {"code", "message"}
};

inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

bool is_known_type(std::uint8_t t);
std::string_view msg_type_name(MsgType t);
bool is_request(MsgType t);

struct Message {
  MsgType type = MsgType::kPing;
  std::string payload;

  bool operator==(const Message&) const = default;
};

std::string encode_frame(const Message& msg);

struct DecodeResult {
  Message message;
  std::size_t consumed = 0;
};

/// Decodes one frame from the front of bytes. Returns nullopt when more bytes
/// are needed. Throws ProtocolError for unknown types or oversized payloads.
std::optional<DecodeResult> decode_frame(std::string_view bytes);

/// Incremental decoder for a byte stream.
class FrameReader {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  std::optional<Message> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// UDP odometry datagram, little-endian, packed:
/// tick u64, pos_x f64, pos_y f64, yaw f64, vel_x f32, vel_y f32,
/// accel_x f32, accel_y f32, angular_rate f32, collision u8.
inline constexpr std::size_t kOdometryPacketSize = 53;

std::string encode_odometry(const Odometry& odom);
/// Throws ProtocolError when the datagram is not exactly one packet.
Odometry decode_odometry(std::string_view bytes);

/// Little-endian helpers shared by the buffer encoders.
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);
std::uint16_t get_u16(const char* p);
std::uint32_t get_u32(const char* p);
std::uint64_t get_u64(const char* p);
float get_f32(const char* p);
double get_f64(const char* p);

std::string base64_encode(std::string_view bytes);
/// Throws ProtocolError on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace tesse
