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
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "tesse/client.hpp"
#include "tesse/error.hpp"
#include "tesse/protocol.hpp"
#include "tesse/server.hpp"
#include "tesse/session.hpp"

namespace tesse {
namespace {

using nlohmann::json;

json parse_reply(const Message& m) {
  EXPECT_EQ(m.type, MsgType::kReply);
  return json::parse(m.payload);
}

json error_of(const std::vector<Message>& out) {
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].type, MsgType::kError);
  return json::parse(out[0].payload);
}

Message request(MsgType t, const json& payload = nullptr) {
  return {t, payload.is_null() ? std::string() : payload.dump()};
}

// ---- framing ----

TEST(Framing, PingIsFiveBytes) {
  const std::string bytes = encode_frame({MsgType::kPing, ""});
  ASSERT_EQ(bytes.size(), kFrameHeaderSize);
  EXPECT_EQ(bytes, std::string("\0\0\0\0\x01", 5));
}

TEST(Framing, LengthIsLittleEndian) {
  const std::string bytes = encode_frame({MsgType::kReply, std::string(258, 'x')});
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[1]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 0x81);
  EXPECT_EQ(bytes.size(), 263u);
}

TEST(Framing, RandomRoundTrip) {
  std::mt19937_64 rng(7);
  const MsgType types[] = {MsgType::kPing,  MsgType::kReset,  MsgType::kAction,
                           MsgType::kReply, MsgType::kBuffer, MsgType::kError};
  for (int i = 0; i < 500; ++i) {
    Message m{types[rng() % std::size(types)], {}};
    m.payload.resize(rng() % 300);
    for (char& c : m.payload) c = static_cast<char>(rng());
    const std::string bytes = encode_frame(m);
    const auto d = decode_frame(bytes);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->message, m);
    EXPECT_EQ(d->consumed, bytes.size());
  }
}

TEST(Framing, TruncatedFrameNeedsMoreBytes) {
  const std::string bytes = encode_frame({MsgType::kReply, "{\"a\":1}"});
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_FALSE(decode_frame(std::string_view(bytes).substr(0, n))) << n;
  }
}

TEST(Framing, UnknownTypeIsProtocolError) {
  const std::string bytes("\0\0\0\0\x42", 5);
  EXPECT_THROW(decode_frame(bytes), ProtocolError);
}

TEST(Framing, OversizedLengthIsProtocolError) {
  std::string bytes;
  put_u32(bytes, kMaxPayload + 1);
  bytes.push_back(static_cast<char>(MsgType::kReply));
  EXPECT_THROW(decode_frame(bytes), ProtocolError);
}

TEST(Framing, ReaderSplitsArbitraryChunks) {
  std::vector<Message> sent;
  std::string stream;
  for (int i = 0; i < 20; ++i) {
    sent.push_back({MsgType::kBuffer, std::string(static_cast<std::size_t>(i * 7), 'a' + i)});
    stream += encode_frame(sent.back());
  }
  FrameReader reader;
  std::vector<Message> got;
  std::mt19937 rng(3);
  std::size_t pos = 0;
  while (pos < stream.size()) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 11, stream.size() - pos);
    reader.feed(std::string_view(stream).substr(pos, n));
    pos += n;
    while (auto m = reader.next()) got.push_back(*m);
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(reader.buffered(), 0u);
}

// ---- odometry datagrams ----

TEST(OdometryPacket, RoundTripAndSize) {
  const Odometry o{123456789012ull, {1.25, -3.5}, 0.75, {0.5f, -0.25f},
                   {2.0f, 4.0f}, -0.125, true};
  const std::string bytes = encode_odometry(o);
  ASSERT_EQ(bytes.size(), kOdometryPacketSize);
  ASSERT_EQ(kOdometryPacketSize, 8u + 3 * 8 + 5 * 4 + 1);
  EXPECT_EQ(get_u64(bytes.data()), 123456789012ull);
  EXPECT_EQ(get_f64(bytes.data() + 8), 1.25);
  EXPECT_EQ(static_cast<unsigned char>(bytes[52]), 1);
  const Odometry d = decode_odometry(bytes);
  EXPECT_EQ(d.tick, o.tick);
  EXPECT_EQ(d.position.x, 1.25);
  EXPECT_EQ(d.position.y, -3.5);
  EXPECT_EQ(d.yaw, 0.75);
  EXPECT_EQ(d.velocity.x, 0.5);
  EXPECT_EQ(d.acceleration.y, 4.0);
  EXPECT_EQ(d.angular_rate, -0.125);
  EXPECT_TRUE(d.collision);
}

TEST(OdometryPacket, WrongLengthThrows) {
  const std::string bytes = encode_odometry({});
  EXPECT_THROW(decode_odometry(bytes.substr(0, 52)), ProtocolError);
  EXPECT_THROW(decode_odometry(bytes + "x"), ProtocolError);
}

TEST(Base64, KnownVectors) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foo"), "Zm9v");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(base64_decode("Zm9vYmE="), "fooba");
}

TEST(Base64, RandomRoundTripAndRejects) {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::string s(rng() % 64, '\0');
    for (char& c : s) c = static_cast<char>(rng());
    EXPECT_EQ(base64_decode(base64_encode(s)), s);
  }
  EXPECT_THROW(base64_decode("Zm9"), ProtocolError);
  EXPECT_THROW(base64_decode("Zm9*"), ProtocolError);
}

// ---- session dispatch ----

class SessionTest : public ::testing::Test {
 protected:
  std::shared_ptr<SceneStore> store = std::make_shared<SceneStore>();
  Session session{1, store};

  json reset(std::uint64_t scene, std::uint64_t episode) {
    const auto out = session.handle(request(
        MsgType::kReset, {{"scene_seed", scene}, {"episode_seed", episode}}));
    EXPECT_EQ(out.size(), 1u);
    return parse_reply(out[0]);
  }
};

TEST_F(SessionTest, PingPongs) {
  const auto out = session.handle({MsgType::kPing, ""});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (Message{MsgType::kPong, ""}));
}

TEST_F(SessionTest, ActionBeforeResetIsStateError) {
  const json e = error_of(session.handle(request(MsgType::kAction, {{"action", "turn_left"}})));
  EXPECT_EQ(e["code"], "state");
  EXPECT_FALSE(session.closed());
}

TEST_F(SessionTest, ResetReplyFields) {
  const json r = reset(4, 9);
  EXPECT_EQ(r["session_id"], 1);
  EXPECT_EQ(r["episode_seed"], 9);
  EXPECT_EQ(r["mode"], "gt");
  EXPECT_EQ(r["n_targets"], 30);
  EXPECT_EQ(r["episode_limit"], 400);
  EXPECT_EQ(r["camera"]["width"], 160);
  EXPECT_EQ(r["camera"]["height"], 120);
  EXPECT_EQ(r["scene_digest"].get<std::string>().size(), 16u);
}

TEST_F(SessionTest, ResetIsDeterministic) {
  const json a = reset(5, 3);
  Session other(1, store);
  const json b = parse_reply(other.handle(request(
      MsgType::kReset, {{"scene_seed", 5}, {"episode_seed", 3}}))[0]);
  EXPECT_EQ(a, b);
  const json c = reset(4, 3);
  EXPECT_NE(a["scene_digest"], c["scene_digest"]);
}

TEST_F(SessionTest, ActionByNameAndId) {
  reset(4, 1);
  const json a = parse_reply(session.handle(request(MsgType::kAction, {{"action", 1}}))[0]);
  EXPECT_EQ(a["action"], "turn_left");
  EXPECT_EQ(a["step"], 1);
  const json b = parse_reply(
      session.handle(request(MsgType::kAction, {{"action", "collect"}}))[0]);
  EXPECT_EQ(b["step"], 2);
  EXPECT_EQ(b["attempts"], 1);
}

TEST_F(SessionTest, ActionAfterDoneIsEpisodeFinished) {
  session.handle(request(MsgType::kReset,
                         {{"scene_seed", 4}, {"episode_seed", 1},
                          {"task", {{"episode_limit", 3}}}}));
  for (int i = 0; i < 3; ++i) {
    const auto out = session.handle(request(MsgType::kAction, {{"action", "turn_left"}}));
    EXPECT_EQ(parse_reply(out[0])["done"], i == 2);
  }
  const json e = error_of(session.handle(request(MsgType::kAction, {{"action", "turn_left"}})));
  EXPECT_EQ(e["code"], "episode_finished");
  EXPECT_FALSE(session.closed());
}

TEST_F(SessionTest, MalformedPayloadClosesSession) {
  reset(4, 1);
  const json e = error_of(session.handle({MsgType::kAction, "{not json"}));
  EXPECT_EQ(e["code"], "protocol");
  EXPECT_TRUE(session.closed());
}

TEST_F(SessionTest, UnknownActionNameIsProtocolError) {
  reset(4, 1);
  const json e = error_of(session.handle(request(MsgType::kAction, {{"action", "jump"}})));
  EXPECT_EQ(e["code"], "protocol");
}

TEST_F(SessionTest, ReplyTypeAsRequestIsProtocolError) {
  const json e = error_of(session.handle({MsgType::kReply, "{}"}));
  EXPECT_EQ(e["code"], "protocol");
  EXPECT_TRUE(session.closed());
}

TEST_F(SessionTest, BadResetValueIsNotFatal) {
  const json e = error_of(session.handle(request(
      MsgType::kReset, {{"scene_seed", 4}, {"task", {{"n_targets", 0}}}})));
  EXPECT_NE(e["code"], "protocol");
  EXPECT_FALSE(session.closed());
}

TEST_F(SessionTest, GetObsBuffers) {
  reset(4, 1);
  const auto out = session.handle(request(MsgType::kGetObs));
  ASSERT_EQ(out.size(), 5u);
  const json h = parse_reply(out[0]);
  EXPECT_EQ(h["modalities"], json({"color", "depth", "seg", "inst"}));
  EXPECT_EQ(h["dims"]["width"], 160);
  EXPECT_EQ(h["dims"]["height"], 120);
  EXPECT_EQ(out[1].payload.size(), 160u * 120 * 3);
  EXPECT_EQ(out[2].payload.size(), 76800u);
  EXPECT_EQ(out[3].payload.size(), 160u * 120);
  EXPECT_EQ(out[4].payload.size(), 160u * 120 * 2);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_EQ(out[i].type, MsgType::kBuffer);
    EXPECT_EQ(h["buffers"][i - 1]["bytes"], out[i].payload.size());
  }
  const Observation obs = decode_observation(out);
  EXPECT_EQ(obs.depth.width, 160);
  EXPECT_EQ(encode_observation(obs), out);
}

TEST_F(SessionTest, GetObsSubsetAndLidar) {
  reset(4, 1);
  const auto out = session.handle(
      request(MsgType::kGetObs, {{"modalities", {"seg", "lidar"}}}));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[1].payload.size(), 160u * 120);
  EXPECT_EQ(out[2].payload.size(), static_cast<std::size_t>(kLidarBeams) * 4);
}

TEST_F(SessionTest, SetModeSwitchesPoseToEstimate) {
  reset(4, 1);
  EXPECT_FALSE(parse_reply(session.handle(request(MsgType::kGetObs,
      {{"modalities", {"depth"}}}))[0])["pose"]["is_estimate"]);
  session.handle(request(MsgType::kSetMode, {{"mode", "perception"}}));
  const json h = parse_reply(
      session.handle(request(MsgType::kGetObs, {{"modalities", {"depth"}}}))[0]);
  EXPECT_EQ(h["mode"], "perception");
  EXPECT_TRUE(h["pose"]["is_estimate"]);
}

TEST_F(SessionTest, ExportMeshPly) {
  reset(4, 1);
  const auto out = session.handle(request(MsgType::kExportMesh, {{"format", "ply"}}));
  ASSERT_GE(out.size(), 2u);
  const json h = parse_reply(out[0]);
  EXPECT_EQ(h["buffers"][0]["name"], "mesh");
  EXPECT_EQ(h["buffers"][0]["bytes"], out[1].payload.size());
  EXPECT_EQ(out[1].payload.rfind("ply\n", 0), 0u);
}

TEST_F(SessionTest, ForceThenStepAdvancesTicks) {
  reset(4, 1);
  const json f = parse_reply(
      session.handle(request(MsgType::kForce, {{"force", 5.0}, {"torque", 0.0}}))[0]);
  EXPECT_EQ(f["ticks"], 0);
  const json s = parse_reply(session.handle(request(MsgType::kStep, {{"ticks", 50}}))[0]);
  EXPECT_EQ(s["ticks"], 50);
  EXPECT_EQ(s["tick"], f["tick"].get<std::uint64_t>() + 50);
  const json e = error_of(session.handle(request(MsgType::kStep)));
  EXPECT_EQ(e["code"], "protocol");
}

// ---- websocket mapping ----

TEST(WebsocketJson, RequestMapping) {
  const Message m = ws_request_from_json(
      {{"type", "ACTION"}, {"payload", {{"action", "collect"}}}});
  EXPECT_EQ(m.type, MsgType::kAction);
  EXPECT_EQ(json::parse(m.payload), json({{"action", "collect"}}));
  EXPECT_EQ(ws_request_from_json({{"type", 1}}).type, MsgType::kPing);
  EXPECT_EQ(ws_request_from_json({{"type", "ping"}}).payload, "");
  EXPECT_THROW(ws_request_from_json({{"type", "REPLY"}}), ProtocolError);
  EXPECT_THROW(ws_request_from_json({{"type", "NOPE"}}), ProtocolError);
  EXPECT_THROW(ws_request_from_json({{"payload", {}}}), ProtocolError);
  EXPECT_THROW(ws_request_from_json({{"type", "RESET"}, {"payload", 3}}), ProtocolError);
  EXPECT_THROW(ws_request_from_json(json::array()), ProtocolError);
}

TEST(WebsocketJson, ResponseMapping) {
  const json r = ws_response_to_json(
      {{MsgType::kReply, R"({"a":1})"}, {MsgType::kBuffer, "foo"}, {MsgType::kBuffer, ""}});
  EXPECT_EQ(r["type"], "REPLY");
  EXPECT_EQ(r["payload"], json({{"a", 1}}));
  EXPECT_EQ(r["buffers"], json({"Zm9v", ""}));
  const json p = ws_response_to_json({{MsgType::kPong, ""}});
  EXPECT_EQ(p, json({{"type", "PONG"}}));
}

// ---- live server ----

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("tesse_net_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "open.json") << scene_to_json(testing::open_room(30.0, 30.0, {15.0, 15.0}));
    ServerOptions opt;
    opt.port = 0;
    opt.odom_port = 0;
    opt.ws_port = 0;
    opt.scene_dir = dir;
    server = std::make_unique<Server>(opt);
    server->start();
  }
  void TearDown() override {
    server->stop();
    std::filesystem::remove_all(dir);
  }

  std::filesystem::path dir;
  std::unique_ptr<Server> server;
};

TEST_F(ServerTest, PingOverTcp) {
  CommandClient client("127.0.0.1", server->port());
  client.send_raw(encode_frame({MsgType::kPing, ""}));
  EXPECT_EQ(client.read_frame(), (Message{MsgType::kPong, ""}));
}

TEST_F(ServerTest, StepStreamsOneOdometryPacketPerTick) {
  CommandClient client("127.0.0.1", server->port());
  const json info = client.call(MsgType::kReset, {{"scene_file", "open.json"},
                                                  {"episode_seed", 2},
                                                  {"task", {{"n_targets", 1}}}});
  OdometryListener odom;
  odom.subscribe("127.0.0.1", server->odom_port(), info["session_id"].get<std::uint64_t>());
  const Pose2 start = pose_from_json(info["spawn"]);
  const std::uint64_t tick0 = info["tick"];

  client.call(MsgType::kForce, {{"force", 4.0}, {"torque", 0.2}});
  const json r = client.call(MsgType::kStep, {{"ticks", 200}});
  EXPECT_FALSE(r["collided"]);
  const auto packets = odom.drain(200, std::chrono::milliseconds(1000));
  ASSERT_EQ(packets.size(), 200u);
  Vec2 integrated;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    EXPECT_EQ(packets[i].tick, tick0 + 1 + i);
    integrated += packets[i].velocity * 0.005;
  }
  const Vec2 moved = pose_from_json(r["pose"]).position - start.position;
  EXPECT_GT(norm(moved), 0.1);
  EXPECT_NEAR(integrated.x, moved.x, 1e-6);
  EXPECT_NEAR(integrated.y, moved.y, 1e-6);
  EXPECT_NEAR(packets.back().position.x, pose_from_json(r["pose"]).position.x, 1e-12);
}

TEST_F(ServerTest, StationaryAgentReportsZeroVelocity) {
  CommandClient client("127.0.0.1", server->port());
  const json info = client.call(MsgType::kReset, {{"scene_file", "open.json"},
                                                  {"task", {{"n_targets", 1}}}});
  OdometryListener odom;
  odom.subscribe("127.0.0.1", server->odom_port(), info["session_id"].get<std::uint64_t>());
  client.call(MsgType::kStep, {{"ticks", 20}});
  const auto packets = odom.drain(20, std::chrono::milliseconds(1000));
  ASSERT_EQ(packets.size(), 20u);
  for (const Odometry& o : packets) {
    EXPECT_EQ(o.velocity.x, 0.0);
    EXPECT_EQ(o.velocity.y, 0.0);
    EXPECT_EQ(o.acceleration.x, 0.0);
    EXPECT_FALSE(o.collision);
  }
}

TEST_F(ServerTest, RemoteErrorsMapToLibraryErrors) {
  CommandClient client("127.0.0.1", server->port());
  EXPECT_THROW(client.call(MsgType::kAction, {{"action", "collect"}}), StateError);
  EXPECT_THROW(client.call(MsgType::kReset, {{"scene_file", "../etc"}}), Error);
}

TEST_F(ServerTest, ScenePathEscapeIsRejected) {
  CommandClient client("127.0.0.1", server->port());
  try {
    client.call(MsgType::kReset, {{"scene_file", "../open.json"}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("plain file name"), std::string::npos);
  }
}

TEST_F(ServerTest, WebsocketMirrorsCommandStream) {
  namespace beast = boost::beast;
  namespace asio = boost::asio;
  asio::io_context io;
  asio::ip::tcp::resolver resolver(io);
  beast::websocket::stream<asio::ip::tcp::socket> ws(io);
  asio::connect(ws.next_layer(),
                resolver.resolve("127.0.0.1", std::to_string(server->ws_port())));
  ws.handshake("127.0.0.1", "/");
  auto roundtrip = [&](const json& req) {
    ws.write(asio::buffer(req.dump()));
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  };
  EXPECT_EQ(roundtrip({{"type", "PING"}}), json({{"type", "PONG"}}));
  const json reset = roundtrip({{"type", "RESET"},
                                {"payload", {{"scene_seed", 4}, {"episode_seed", 1}}}});
  EXPECT_EQ(reset["type"], "REPLY");

  Session local(1, std::make_shared<SceneStore>());
  const json expected = parse_reply(local.handle(request(
      MsgType::kReset, {{"scene_seed", 4}, {"episode_seed", 1}}))[0]);
  EXPECT_EQ(reset["payload"]["scene_digest"], expected["scene_digest"]);
  EXPECT_EQ(reset["payload"]["spawn"], expected["spawn"]);

  const json step = roundtrip({{"type", "ACTION"}, {"payload", {{"action", "move_forward"}}}});
  EXPECT_EQ(step["payload"]["step"], 1);
  const json obs = roundtrip({{"type", "GET_OBS"}, {"payload", {{"modalities", {"seg"}}}}});
  ASSERT_EQ(obs["buffers"].size(), 1u);
  EXPECT_EQ(base64_decode(obs["buffers"][0].get<std::string>()).size(), 160u * 120);
  const json err = roundtrip({{"type", "ACTION"}, {"payload", {{"action", 9}}}});
  EXPECT_EQ(err["type"], "ERROR");
  EXPECT_EQ(err["payload"]["code"], "protocol");
}

}  // namespace
}  // namespace tesse
