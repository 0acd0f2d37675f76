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

#include <algorithm>
#include <cctype>

#include "tesse/error.hpp"
#include "tesse/session.hpp"

namespace tesse {
namespace {

using nlohmann::json;

[[noreturn]] void bad_type(const std::string& path, const char* expected) {
  throw ProtocolError(path + ": expected " + expected);
}

const json* field(const json& j, const std::string& ctx, const char* key) {
  if (!j.is_object()) bad_type(ctx, "object");
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

void read(const json& j, const std::string& ctx, const char* key, double& out) {
  if (const json* v = field(j, ctx, key)) {
    if (!v->is_number()) bad_type(ctx + "/" + key, "number");
    out = v->get<double>();
  }
}

void read(const json& j, const std::string& ctx, const char* key, int& out) {
  if (const json* v = field(j, ctx, key)) {
    if (!v->is_number_integer()) bad_type(ctx + "/" + key, "integer");
    out = v->get<int>();
  }
}

void read(const json& j, const std::string& ctx, const char* key, bool& out) {
  if (const json* v = field(j, ctx, key)) {
    if (!v->is_boolean()) bad_type(ctx + "/" + key, "boolean");
    out = v->get<bool>();
  }
}

void read(const json& j, const std::string& ctx, const char* key,
          std::uint64_t& out) {
  if (const json* v = field(j, ctx, key)) {
    if (!v->is_number_unsigned()) bad_type(ctx + "/" + key, "unsigned integer");
    out = v->get<std::uint64_t>();
  }
}

void read(const json& j, const std::string& ctx, const char* key,
          std::string& out) {
  if (const json* v = field(j, ctx, key)) {
    if (!v->is_string()) bad_type(ctx + "/" + key, "string");
    out = v->get<std::string>();
  }
}

template <typename T>
T require(const json& j, const std::string& ctx, const char* key) {
  if (!field(j, ctx, key)) {
    throw ProtocolError(ctx + "/" + key + ": missing");
  }
  T out{};
  read(j, ctx, key, out);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_dims(const json& h, int& w, int& hgt) {
  const json* dims = field(h, "", "dims");
  if (!dims) throw ProtocolError("/dims: missing");
  w = require<int>(*dims, "/dims", "width");
  hgt = require<int>(*dims, "/dims", "height");
  if (w <= 0 || hgt <= 0) throw ProtocolError("/dims: non-positive size");
}

std::size_t modality_size(Modality m, int w, int h, std::size_t lidar_beams) {
  const auto px = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  switch (m) {
    case Modality::kColor: return px * 3;
    case Modality::kDepth: return px * 4;
    case Modality::kSeg: return px;
    case Modality::kInst: return px * 2;
    case Modality::kLidar: return lidar_beams * 4;
  }
  return 0;
}

const char* modality_dtype(Modality m) {
  switch (m) {
    case Modality::kColor: return "u8x3";
    case Modality::kDepth: return "f32";
    case Modality::kSeg: return "u8";
    case Modality::kInst: return "u16";
    case Modality::kLidar: return "f32";
  }
  return "";
}

}  // namespace

std::string_view mode_name(SimMode m) {
  return m == SimMode::kGroundTruth ? "gt" : "perception";
}

SimMode mode_from_name(std::string_view s) {
  const std::string l = lower(s);
  if (l == "gt" || l == "ground_truth") return SimMode::kGroundTruth;
  if (l == "perception") return SimMode::kPerception;
  throw Error("unknown mode '" + std::string(s) + "'");
}

json task_to_json(const TaskConfig& t) {
  return {{"n_targets", t.n_targets},
          {"episode_limit", t.episode_limit},
          {"collect_range", t.collect_range},
          {"require_los", t.require_los},
          {"weights",
           {{"w_p", t.weights.w_p}, {"w_c", t.weights.w_c}, {"w_a", t.weights.w_a}}},
          {"cell_size", t.cell_size},
          {"visit_radius", t.visit_radius}};
}

TaskConfig task_from_json(const json& j) {
  TaskConfig t;
  read(j, "/task", "n_targets", t.n_targets);
  read(j, "/task", "episode_limit", t.episode_limit);
  read(j, "/task", "collect_range", t.collect_range);
  read(j, "/task", "require_los", t.require_los);
  if (const json* w = field(j, "/task", "weights")) {
    read(*w, "/task/weights", "w_p", t.weights.w_p);
    read(*w, "/task/weights", "w_c", t.weights.w_c);
    read(*w, "/task/weights", "w_a", t.weights.w_a);
  }
  read(j, "/task", "cell_size", t.cell_size);
  read(j, "/task", "visit_radius", t.visit_radius);
  t.validate();
  return t;
}

json noise_to_json(const NoiseConfig& n) {
  return {{"seg_flip_rate", n.seg_flip_rate},
          {"seg_boundary_width", n.seg_boundary_width},
          {"seg_patch_rate", n.seg_patch_rate},
          {"depth_focal_baseline", n.depth_focal_baseline},
          {"depth_disparity_sigma", n.depth_disparity_sigma},
          {"depth_dropout_rate", n.depth_dropout_rate},
          {"vio_sigma_trans", n.vio_sigma_trans},
          {"vio_sigma_rot", n.vio_sigma_rot},
          {"seed", n.seed}};
}

NoiseConfig noise_from_json(const json& j) {
  NoiseConfig n;
  read(j, "/noise", "seg_flip_rate", n.seg_flip_rate);
  read(j, "/noise", "seg_boundary_width", n.seg_boundary_width);
  read(j, "/noise", "seg_patch_rate", n.seg_patch_rate);
  read(j, "/noise", "depth_focal_baseline", n.depth_focal_baseline);
  read(j, "/noise", "depth_disparity_sigma", n.depth_disparity_sigma);
  read(j, "/noise", "depth_dropout_rate", n.depth_dropout_rate);
  read(j, "/noise", "vio_sigma_trans", n.vio_sigma_trans);
  read(j, "/noise", "vio_sigma_rot", n.vio_sigma_rot);
  read(j, "/noise", "seed", n.seed);
  n.validate();
  return n;
}

SessionConfig SessionConfig::from_json(const json& j) {
  if (!j.is_object()) bad_type("", "object");
  SessionConfig c;
  if (field(j, "", "scene_seed")) c.scene_seed = require<std::uint64_t>(j, "", "scene_seed");
  if (field(j, "", "scene_file")) c.scene_file = require<std::string>(j, "", "scene_file");
  if (c.scene_seed && c.scene_file) {
    throw Error("session config sets both scene_seed and scene_file");
  }
  if (!c.scene_seed && !c.scene_file) {
    throw Error("session config needs scene_seed or scene_file");
  }
  if (field(j, "", "episode_seed")) {
    c.episode_seed = require<std::uint64_t>(j, "", "episode_seed");
  }
  std::string mode = "gt";
  read(j, "", "mode", mode);
  c.mode = mode_from_name(mode);
  read(j, "", "step_mode", c.step_mode);
  if (const json* t = field(j, "", "task")) c.task = task_from_json(*t);
  if (const json* n = field(j, "", "noise")) c.noise = noise_from_json(*n);
  return c;
}

json SessionConfig::to_json() const {
  json j = {{"mode", mode_name(mode)},
            {"step_mode", step_mode},
            {"task", task_to_json(task)},
            {"noise", noise_to_json(noise)}};
  if (scene_seed) j["scene_seed"] = *scene_seed;
  if (scene_file) j["scene_file"] = *scene_file;
  if (episode_seed) j["episode_seed"] = *episode_seed;
  return j;
}

json result_to_json(const EpisodeResult& r) {
  return {{"recall", r.recall},     {"precision", r.precision},
          {"collisions", r.collisions}, {"actions", r.actions},
          {"limit", r.limit},       {"score", r.score},
          {"explored_m2", r.explored_m2}};
}

EpisodeResult result_from_json(const json& j) {
  EpisodeResult r;
  r.recall = require<double>(j, "/result", "recall");
  r.precision = require<double>(j, "/result", "precision");
  r.collisions = require<int>(j, "/result", "collisions");
  r.actions = require<int>(j, "/result", "actions");
  r.limit = require<int>(j, "/result", "limit");
  r.score = require<double>(j, "/result", "score");
  r.explored_m2 = require<double>(j, "/result", "explored_m2");
  return r;
}

json pose_to_json(const Pose2& p) {
  return {{"x", p.position.x}, {"y", p.position.y}, {"yaw", p.yaw}};
}

Pose2 pose_from_json(const json& j) {
  return {{require<double>(j, "/pose", "x"), require<double>(j, "/pose", "y")},
          require<double>(j, "/pose", "yaw")};
}

json ResetInfo::to_json() const {
  return {{"session_id", session_id},
          {"scene_digest", scene_digest},
          {"episode_seed", episode_seed},
          {"mode", mode_name(mode)},
          {"spawn", pose_to_json(spawn)},
          {"n_targets", n_targets},
          {"episode_limit", episode_limit},
          {"camera",
           {{"width", camera.width},
            {"height", camera.height},
            {"hfov_deg", camera.hfov_deg},
            {"max_range", camera.max_range},
            {"camera_height", camera.camera_height}}},
          {"task", task_to_json(task)},
          {"tick", tick}};
}

ResetInfo ResetInfo::from_json(const json& j) {
  ResetInfo r;
  r.session_id = require<std::uint64_t>(j, "", "session_id");
  r.scene_digest = require<std::string>(j, "", "scene_digest");
  r.episode_seed = require<std::uint64_t>(j, "", "episode_seed");
  r.mode = mode_from_name(require<std::string>(j, "", "mode"));
  r.spawn = pose_from_json(j.at("spawn"));
  r.n_targets = require<int>(j, "", "n_targets");
  r.episode_limit = require<int>(j, "", "episode_limit");
  const json& c = j.at("camera");
  read(c, "/camera", "width", r.camera.width);
  read(c, "/camera", "height", r.camera.height);
  read(c, "/camera", "hfov_deg", r.camera.hfov_deg);
  read(c, "/camera", "max_range", r.camera.max_range);
  read(c, "/camera", "camera_height", r.camera.camera_height);
  if (const json* t = field(j, "", "task")) r.task = task_from_json(*t);
  read(j, "", "tick", r.tick);
  return r;
}

json StepReceipt::to_json() const {
  return {{"step", step},
          {"action", action_name(action)},
          {"collided", collided},
          {"collected", collected},
          {"done", done},
          {"a", actions},
          {"c", collisions},
          {"found", found},
          {"attempts", attempts},
          {"successes", successes},
          {"reward", reward},
          {"tick", tick},
          {"pose", pose_to_json(pose)},
          {"displacement", {displacement.x, displacement.y}}};
}

StepReceipt StepReceipt::from_json(const json& j) {
  StepReceipt r;
  r.step = require<int>(j, "", "step");
  const auto a = action_from_name(require<std::string>(j, "", "action"));
  if (!a) throw ProtocolError("/action: unknown action");
  r.action = *a;
  r.collided = require<bool>(j, "", "collided");
  const json* col = field(j, "", "collected");
  if (!col || !col->is_array()) bad_type("/collected", "array");
  for (const json& v : *col) {
    if (!v.is_number_unsigned()) bad_type("/collected", "unsigned integers");
    r.collected.push_back(v.get<std::uint32_t>());
  }
  r.done = require<bool>(j, "", "done");
  r.actions = require<int>(j, "", "a");
  r.collisions = require<int>(j, "", "c");
  r.found = require<int>(j, "", "found");
  r.attempts = require<int>(j, "", "attempts");
  r.successes = require<int>(j, "", "successes");
  r.reward = require<double>(j, "", "reward");
  r.tick = require<std::uint64_t>(j, "", "tick");
  r.pose = pose_from_json(j.at("pose"));
  const json& d = j.at("displacement");
  r.displacement = {d.at(0).get<double>(), d.at(1).get<double>()};
  return r;
}

json TickReceipt::to_json() const {
  return {{"ticks", ticks},
          {"tick", tick},
          {"collided", collided},
          {"pose", pose_to_json(pose)},
          {"displacement", {displacement.x, displacement.y}}};
}

TickReceipt TickReceipt::from_json(const json& j) {
  TickReceipt r;
  r.ticks = require<int>(j, "", "ticks");
  r.tick = require<std::uint64_t>(j, "", "tick");
  r.collided = require<bool>(j, "", "collided");
  r.pose = pose_from_json(j.at("pose"));
  const json& d = j.at("displacement");
  r.displacement = {d.at(0).get<double>(), d.at(1).get<double>()};
  return r;
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kColor: return "color";
    case Modality::kDepth: return "depth";
    case Modality::kSeg: return "seg";
    case Modality::kInst: return "inst";
    case Modality::kLidar: return "lidar";
  }
  return "";
}

Modality modality_from_name(std::string_view s) {
  for (Modality m : {Modality::kColor, Modality::kDepth, Modality::kSeg,
                     Modality::kInst, Modality::kLidar}) {
    if (modality_name(m) == s) return m;
  }
  throw ProtocolError("unknown modality '" + std::string(s) + "'");
}

std::vector<Modality> default_modalities() {
  return {Modality::kColor, Modality::kDepth, Modality::kSeg, Modality::kInst};
}

bool Observation::has(Modality m) const {
  return std::find(modalities.begin(), modalities.end(), m) != modalities.end();
}

std::string modality_bytes(const Observation& obs, Modality m) {
  std::string out;
  switch (m) {
    case Modality::kColor:
      out.reserve(obs.color.data.size() * 3);
      for (const Rgb& c : obs.color.data) {
        out.push_back(static_cast<char>(c.r));
        out.push_back(static_cast<char>(c.g));
        out.push_back(static_cast<char>(c.b));
      }
      break;
    case Modality::kDepth:
      out.reserve(obs.depth.data.size() * 4);
      for (float v : obs.depth.data) put_f32(out, v);
      break;
    case Modality::kSeg:
      out.assign(obs.seg.data.begin(), obs.seg.data.end());
      break;
    case Modality::kInst:
      out.reserve(obs.inst.data.size() * 2);
      for (std::uint16_t v : obs.inst.data) put_u16(out, v);
      break;
    case Modality::kLidar:
      out.reserve(obs.lidar.size() * 4);
      for (float v : obs.lidar) put_f32(out, v);
      break;
  }
  return out;
}

std::vector<Message> encode_observation(const Observation& obs) {
  int w = 0;
  int h = 0;
  for (Modality m : obs.modalities) {
    if (m == Modality::kColor) w = obs.color.width, h = obs.color.height;
    if (m == Modality::kDepth) w = obs.depth.width, h = obs.depth.height;
    if (m == Modality::kSeg) w = obs.seg.width, h = obs.seg.height;
    if (m == Modality::kInst) w = obs.inst.width, h = obs.inst.height;
  }
  json header = {{"modalities", json::array()},
                 {"dims", {{"width", w}, {"height", h}}},
                 {"mode", mode_name(obs.mode)},
                 {"tick", obs.tick},
                 {"step", obs.step},
                 {"pose",
                  {{"x", obs.pose.position.x},
                   {"y", obs.pose.position.y},
                   {"yaw", obs.pose.yaw},
                   {"is_estimate", obs.pose.is_estimate}}},
                 {"buffers", json::array()}};
  if (obs.has(Modality::kDepth)) header["max_range"] = obs.depth.max_range;
  std::vector<Message> out(1);
  for (Modality m : obs.modalities) {
    Message buf{MsgType::kBuffer, modality_bytes(obs, m)};
    header["modalities"].push_back(modality_name(m));
    header["buffers"].push_back({{"name", modality_name(m)},
                                 {"dtype", modality_dtype(m)},
                                 {"bytes", buf.payload.size()}});
    out.push_back(std::move(buf));
  }
  out[0] = {MsgType::kReply, header.dump()};
  return out;
}

Observation decode_observation(const std::vector<Message>& frames) {
  if (frames.empty() || frames[0].type != MsgType::kReply) {
    throw ProtocolError("observation must start with a JSON header");
  }
  json h;
  try {
    h = json::parse(frames[0].payload);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("observation header: ") + e.what());
  }
  Observation obs;
  int w = 0;
  int hgt = 0;
  check_dims(h, w, hgt);
  obs.mode = mode_from_name(require<std::string>(h, "", "mode"));
  read(h, "", "tick", obs.tick);
  read(h, "", "step", obs.step);
  const json& p = h.at("pose");
  obs.pose.position = {require<double>(p, "/pose", "x"),
                       require<double>(p, "/pose", "y")};
  obs.pose.yaw = require<double>(p, "/pose", "yaw");
  obs.pose.is_estimate = require<bool>(p, "/pose", "is_estimate");
  const json* mods = field(h, "", "modalities");
  if (!mods || !mods->is_array()) bad_type("/modalities", "array");
  if (frames.size() != mods->size() + 1) {
    throw ProtocolError("header declares " + std::to_string(mods->size()) +
                        " buffers, got " + std::to_string(frames.size() - 1));
  }
  const auto px = static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt);
  for (std::size_t i = 0; i < mods->size(); ++i) {
    if (!(*mods)[i].is_string()) bad_type("/modalities", "strings");
    const Modality m = modality_from_name((*mods)[i].get<std::string>());
    const std::string& b = frames[i + 1].payload;
    if (frames[i + 1].type != MsgType::kBuffer) {
      throw ProtocolError("expected BUFFER frame for " +
                          std::string(modality_name(m)));
    }
    const std::size_t beams = m == Modality::kLidar ? b.size() / 4 : 0;
    if (b.size() != modality_size(m, w, hgt, beams) ||
        (m == Modality::kLidar && b.size() % 4 != 0)) {
      throw ProtocolError("buffer " + std::string(modality_name(m)) + " has " +
                          std::to_string(b.size()) + " bytes");
    }
    obs.modalities.push_back(m);
    switch (m) {
      case Modality::kColor:
        obs.color = ColorImage(w, hgt);
        for (std::size_t k = 0; k < px; ++k) {
          obs.color.data[k] = {static_cast<std::uint8_t>(b[3 * k]),
                               static_cast<std::uint8_t>(b[3 * k + 1]),
                               static_cast<std::uint8_t>(b[3 * k + 2])};
        }
        break;
      case Modality::kDepth:
        obs.depth = DepthImage(w, hgt);
        if (const json* mr = field(h, "", "max_range")) {
          obs.depth.max_range = mr->get<float>();
        }
        for (std::size_t k = 0; k < px; ++k) {
          obs.depth.data[k] = get_f32(b.data() + 4 * k);
        }
        break;
      case Modality::kSeg:
        obs.seg = SegImage(w, hgt);
        std::copy(b.begin(), b.end(), obs.seg.data.begin());
        break;
      case Modality::kInst:
        obs.inst = InstImage(w, hgt);
        for (std::size_t k = 0; k < px; ++k) {
          obs.inst.data[k] = get_u16(b.data() + 2 * k);
        }
        break;
      case Modality::kLidar:
        obs.lidar.resize(beams);
        for (std::size_t k = 0; k < beams; ++k) {
          obs.lidar[k] = get_f32(b.data() + 4 * k);
        }
        break;
    }
  }
  return obs;
}

}  // namespace tesse
