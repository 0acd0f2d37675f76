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

#include "tesse/protocol.hpp"

#include <array>
#include <bit>
#include <cstring>

#include "tesse/error.hpp"

namespace tesse {
namespace {

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

void put_u16(std::string& out, std::uint16_t v) { put_le(out, v); }
void put_u32(std::string& out, std::uint32_t v) { put_le(out, v); }
void put_u64(std::string& out, std::uint64_t v) { put_le(out, v); }
void put_f32(std::string& out, float v) { put_le(out, v); }
void put_f64(std::string& out, double v) { put_le(out, v); }
std::uint16_t get_u16(const char* p) { return get_le<std::uint16_t>(p); }
std::uint32_t get_u32(const char* p) { return get_le<std::uint32_t>(p); }
std::uint64_t get_u64(const char* p) { return get_le<std::uint64_t>(p); }
float get_f32(const char* p) { return get_le<float>(p); }
double get_f64(const char* p) { return get_le<double>(p); }

bool is_known_type(std::uint8_t t) {
  switch (static_cast<MsgType>(t)) {
    case MsgType::kPing:
    case MsgType::kReset:
    case MsgType::kAction:
    case MsgType::kForce:
    case MsgType::kStep:
    case MsgType::kGetObs:
    case MsgType::kSetMode:
    case MsgType::kExportMesh:
    case MsgType::kInfo:
    case MsgType::kPong:
    case MsgType::kReply:
    case MsgType::kBuffer:
    case MsgType::kError:
      return true;
  }
  return false;
}

bool is_request(MsgType t) { return static_cast<std::uint8_t>(t) < 0x80; }

std::string_view msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::kPing: return "PING";
    case MsgType::kReset: return "RESET";
    case MsgType::kAction: return "ACTION";
    case MsgType::kForce: return "FORCE";
    case MsgType::kStep: return "STEP";
    case MsgType::kGetObs: return "GET_OBS";
    case MsgType::kSetMode: return "SET_MODE";
    case MsgType::kExportMesh: return "EXPORT_MESH";
    case MsgType::kInfo: return "INFO";
    case MsgType::kPong: return "PONG";
    case MsgType::kReply: return "REPLY";
    case MsgType::kBuffer: return "BUFFER";
    case MsgType::kError: return "ERROR";
  }
  return "UNKNOWN";
}

std::string encode_frame(const Message& msg) {
  if (msg.payload.size() > kMaxPayload) {
    throw ProtocolError("payload of " + std::to_string(msg.payload.size()) +
                        " bytes exceeds the frame limit");
  }
  std::string out;
  out.reserve(kFrameHeaderSize + msg.payload.size());
  put_u32(out, static_cast<std::uint32_t>(msg.payload.size()));
  out.push_back(static_cast<char>(msg.type));
  out.append(msg.payload);
  return out;
}

std::optional<DecodeResult> decode_frame(std::string_view bytes) {
  if (bytes.size() < kFrameHeaderSize) return std::nullopt;
  const std::uint32_t len = get_u32(bytes.data());
  const auto type = static_cast<std::uint8_t>(bytes[4]);
  if (!is_known_type(type)) {
    throw ProtocolError("unknown message type 0x" +
                        std::string(1, "0123456789abcdef"[type >> 4]) +
                        std::string(1, "0123456789abcdef"[type & 15]));
  }
  if (len > kMaxPayload) {
    throw ProtocolError("declared payload length " + std::to_string(len) +
                        " exceeds the frame limit");
  }
  if (bytes.size() < kFrameHeaderSize + len) return std::nullopt;
  DecodeResult r;
  r.message.type = static_cast<MsgType>(type);
  r.message.payload.assign(bytes.substr(kFrameHeaderSize, len));
  r.consumed = kFrameHeaderSize + len;
  return r;
}

std::optional<Message> FrameReader::next() {
  auto r = decode_frame(buffer_);
  if (!r) return std::nullopt;
  buffer_.erase(0, r->consumed);
  return std::move(r->message);
}

std::string encode_odometry(const Odometry& o) {
  std::string out;
  out.reserve(kOdometryPacketSize);
  put_u64(out, o.tick);
  put_f64(out, o.position.x);
  put_f64(out, o.position.y);
  put_f64(out, o.yaw);
  put_f32(out, static_cast<float>(o.velocity.x));
  put_f32(out, static_cast<float>(o.velocity.y));
  put_f32(out, static_cast<float>(o.acceleration.x));
  put_f32(out, static_cast<float>(o.acceleration.y));
  put_f32(out, static_cast<float>(o.angular_rate));
  out.push_back(o.collision ? 1 : 0);
  return out;
}

Odometry decode_odometry(std::string_view b) {
  if (b.size() != kOdometryPacketSize) {
    throw ProtocolError("odometry datagram of " + std::to_string(b.size()) +
                        " bytes, expected " +
                        std::to_string(kOdometryPacketSize));
  }
  const char* p = b.data();
  Odometry o;
  o.tick = get_u64(p);
  o.position = {get_f64(p + 8), get_f64(p + 16)};
  o.yaw = get_f64(p + 24);
  o.velocity = {get_f32(p + 32), get_f32(p + 36)};
  o.acceleration = {get_f32(p + 40), get_f32(p + 44)};
  o.angular_rate = get_f32(p + 48);
  o.collision = p[52] != 0;
  return o;
}

std::string base64_encode(std::string_view in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (static_cast<std::uint8_t>(in[i]) << 16) |
                            (static_cast<std::uint8_t>(in[i + 1]) << 8) |
                            static_cast<std::uint8_t>(in[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  const std::size_t rest = in.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint8_t>(in[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint8_t>(in[i + 1]) << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += rest == 2 ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view in) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kB64[i])] = i;
    return t;
  }();
  if (in.size() % 4 != 0) throw ProtocolError("base64 length not a multiple of 4");
  std::string out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = in[i + k];
      if (c == '=' && i + 4 == in.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw ProtocolError("base64 data after padding");
      v[k] = table[static_cast<unsigned char>(c)];
      if (v[k] < 0) throw ProtocolError("invalid base64 character");
    }
    const std::uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out += static_cast<char>((w >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((w >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(w & 0xff);
  }
  return out;
}

}  // namespace tesse
