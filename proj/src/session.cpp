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

#include "tesse/session.hpp"

#include <fstream>
#include <sstream>

#include "tesse/error.hpp"

namespace tesse {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json parse_payload(const std::string& payload) {
  if (payload.empty()) return json::object();
  try {
    json j = json::parse(payload);
    if (!j.is_object()) throw ProtocolError("payload must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
}

Message reply(const json& j) { return {MsgType::kReply, j.dump()}; }

Message error_reply(std::string_view code, std::string_view message) {
  return {MsgType::kError,
          json{{"code", code}, {"message", message}}.dump()};
}

Action parse_action(const json& j) {
  auto it = j.find("action");
  if (it == j.end()) throw ProtocolError("/action: missing");
  if (it->is_number_unsigned()) {
    const auto v = it->get<std::uint64_t>();
    if (v > 3) throw ProtocolError("/action: id out of range");
    return static_cast<Action>(v);
  }
  if (it->is_string()) {
    if (auto a = action_from_name(it->get<std::string>())) return *a;
    throw ProtocolError("/action: unknown action name");
  }
  throw ProtocolError("/action: expected name or id");
}

int parse_ticks(const json& j, bool required) {
  auto it = j.find("ticks");
  if (it == j.end()) {
    if (required) throw ProtocolError("/ticks: missing");
    return 0;
  }
  if (!it->is_number_integer()) throw ProtocolError("/ticks: expected integer");
  const auto v = it->get<std::int64_t>();
  if (v < 0 || v > 1'000'000) throw Error("ticks must be in [0, 1000000]");
  return static_cast<int>(v);
}

double parse_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return 0.0;
  if (!it->is_number()) throw ProtocolError(std::string("/") + key + ": expected number");
  return it->get<double>();
}

}  // namespace

SceneStore::SceneStore(std::filesystem::path scene_dir)
    : dir_(std::move(scene_dir)) {}

std::shared_ptr<const SceneGeometry> SceneStore::by_seed(std::uint64_t seed) {
  std::lock_guard lk(mu_);
  auto it = seeds_.find(seed);
  if (it != seeds_.end()) return it->second;
  auto scene = std::make_shared<const SceneGeometry>(generate_scene(seed));
  seeds_.emplace(seed, scene);
  return scene;
}

std::shared_ptr<const SceneGeometry> SceneStore::by_file(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos ||
      name.find('\\') != std::string::npos || name == "." || name == "..") {
    throw Error("scene_file must be a plain file name");
  }
  if (dir_.empty()) throw Error("server has no scene directory");
  std::lock_guard lk(mu_);
  auto it = files_.find(name);
  if (it != files_.end()) return it->second;
  std::ifstream in(dir_ / name, std::ios::binary);
  if (!in) throw Error("cannot open scene file '" + name + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  WorldMap world = scene_from_json(ss.str());
  const auto violations = validate_scene(world);
  if (!violations.empty()) {
    throw Error("scene file '" + name + "' is invalid: " +
                violations.front().message);
  }
  auto scene = std::make_shared<const SceneGeometry>(std::move(world));
  files_.emplace(name, scene);
  return scene;
}

Session::Session(std::uint64_t id, std::shared_ptr<SceneStore> store,
                 OdometrySink* sink, SessionDefaults defaults)
    : id_(id), store_(std::move(store)), sink_(sink), defaults_(defaults) {
  if (!store_) store_ = std::make_shared<SceneStore>();
  config_.mode = defaults_.mode;
}

Session::~Session() { stop_ticker(); }

const Episode& Session::episode() const {
  require_episode();
  return *episode_;
}

void Session::require_episode() const {
  if (!episode_) throw StateError("no episode: send RESET first");
}

ResetInfo Session::reset(const SessionConfig& config) {
  stop_ticker();
  std::lock_guard lk(mu_);
  config.task.validate();
  config.noise.validate();
  auto scene = config.scene_file ? store_->by_file(*config.scene_file)
                                 : store_->by_seed(config.scene_seed.value_or(0));
  episode_seed_ = config.episode_seed.value_or(
      derive_seed(defaults_.master_seed, id_));
  EpisodeOptions options;
  options.task = config.task;
  options.actuation_noise = config.mode == SimMode::kPerception;
  episode_ = std::make_unique<Episode>(scene, options, episode_seed_);
  config_ = config;
  digest_ = scene_digest(scene->world());
  tick_ = 0;
  held_ = {};
  obs_rng_.seed(derive_seed(episode_seed_, config.noise.seed, 3));
  vio_ = VioEstimator(episode_->spawn_pose(), config.noise,
                      derive_seed(episode_seed_, config.noise.seed, 4));

  ResetInfo info;
  info.session_id = id_;
  info.scene_digest = digest_;
  info.episode_seed = episode_seed_;
  info.mode = config.mode;
  info.spawn = episode_->spawn_pose();
  info.n_targets = static_cast<int>(episode_->state().targets.size());
  info.episode_limit = config.task.episode_limit;
  info.camera = episode_->options().camera;
  info.task = config.task;
  info.tick = tick_;
  if (!config.step_mode) start_ticker();
  return info;
}

void Session::publish_trace(const AgentState& before,
                            const std::vector<AgentState>& trace, bool paced) {
  if (trace.empty()) return;
  std::vector<AgentState> full;
  full.reserve(trace.size() + 1);
  full.push_back(before);
  full.insert(full.end(), trace.begin(), trace.end());
  const auto& physics = episode_->options().physics;
  const auto odom = sample_odometry(full, physics, tick_ + 1);
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(physics.dt));
  for (const Odometry& o : odom) {
    if (paced) {
      std::this_thread::sleep_until(next_tick_);
      next_tick_ += period;
    }
    if (sink_) sink_->publish(id_, o);
  }
  tick_ += trace.size();
}

StepReceipt Session::act(Action action) {
  std::lock_guard lk(mu_);
  require_episode();
  const AgentState before = episode_->state().agent;
  StepRecord rec = episode_->step(action);
  publish_trace(before, rec.tick_trace, !config_.step_mode);
  held_ = {};
  if (config_.mode == SimMode::kPerception) vio_.update(rec.pose);

  const EpisodeState& s = episode_->state();
  StepReceipt r;
  r.step = rec.step;
  r.action = action;
  r.collided = rec.collided;
  for (std::size_t i : rec.collected) r.collected.push_back(s.targets[i].instance_id);
  r.done = rec.done;
  r.actions = s.steps_taken;
  r.collisions = s.collisions;
  r.found = s.found_count();
  r.attempts = s.collect_attempts;
  r.successes = s.collect_successes;
  r.reward = rec.reward;
  r.tick = tick_;
  r.pose = rec.pose;
  r.displacement = rec.pose.position - before.position;
  return r;
}

TickReceipt Session::force(ControlCommand cmd, int n_ticks) {
  std::lock_guard lk(mu_);
  require_episode();
  if (n_ticks < 0) throw Error("ticks must be >= 0");
  if (!std::isfinite(cmd.forward_force) || !std::isfinite(cmd.torque)) {
    throw Error("force command must be finite");
  }
  held_ = cmd;
  const AgentState before = episode_->state().agent;
  const auto trace = episode_->apply_force(held_, n_ticks);
  publish_trace(before, trace, !config_.step_mode);
  if (config_.mode == SimMode::kPerception && n_ticks > 0) {
    vio_.update(episode_->pose());
  }
  TickReceipt r;
  r.ticks = n_ticks;
  r.tick = tick_;
  for (const AgentState& s : trace) r.collided |= s.in_contact;
  r.pose = episode_->pose();
  r.displacement = r.pose.position - before.position;
  return r;
}

TickReceipt Session::step(int n_ticks) {
  {
    std::lock_guard lk(mu_);
    require_episode();
    if (!config_.step_mode) {
      throw StateError("STEP is only available in step mode");
    }
  }
  ControlCommand cmd;
  {
    std::lock_guard lk(mu_);
    cmd = held_;
  }
  return force(cmd, n_ticks);
}

Observation Session::observe(const std::vector<Modality>& modalities) {
  std::lock_guard lk(mu_);
  require_episode();
  return observe_locked(modalities);
}

Observation Session::observe_locked(const std::vector<Modality>& modalities) {
  Observation obs;
  obs.modalities = modalities;
  obs.mode = config_.mode;
  obs.tick = tick_;
  obs.step = episode_->state().steps_taken;
  const Pose2 truth = episode_->pose();
  const bool perception = config_.mode == SimMode::kPerception;
  if (perception) {
    obs.pose = vio_.estimate();
  } else {
    obs.pose = {truth.position, truth.yaw, false};
  }

  const bool need_frames =
      obs.has(Modality::kColor) || obs.has(Modality::kDepth) ||
      obs.has(Modality::kSeg) || obs.has(Modality::kInst);
  if (need_frames) {
    const auto overlays = episode_->target_overlays();
    Frames f = render_frames(episode_->scene(), truth,
                             episode_->options().camera, overlays);
    if (perception) {
      // Both products are always corrupted so the noise stream does not
      // depend on which modalities were requested.
      SegImage seg = corrupt_segmentation(f.seg, config_.noise, obs_rng_);
      f.depth = corrupt_depth(f.depth, f.seg, config_.noise, obs_rng_);
      f.seg = std::move(seg);
      f.inst = InstImage(f.inst.width, f.inst.height);
    }
    if (obs.has(Modality::kColor)) obs.color = std::move(f.color);
    if (obs.has(Modality::kDepth)) obs.depth = std::move(f.depth);
    if (obs.has(Modality::kSeg)) obs.seg = std::move(f.seg);
    if (obs.has(Modality::kInst)) obs.inst = std::move(f.inst);
  }
  if (obs.has(Modality::kLidar)) {
    const auto scan = lidar_scan(episode_->scene(), truth, kLidarBeams,
                                 episode_->options().camera.max_range,
                                 episode_->options().camera.camera_height);
    obs.lidar.assign(scan.ranges.begin(), scan.ranges.end());
  }
  return obs;
}

void Session::set_mode(SimMode mode, std::optional<NoiseConfig> noise) {
  std::lock_guard lk(mu_);
  if (noise) {
    noise->validate();
    config_.noise = *noise;
  }
  const bool switching = mode != config_.mode;
  config_.mode = mode;
  if (!episode_) return;
  episode_->set_actuation_noise(mode == SimMode::kPerception);
  if (switching || noise) {
    obs_rng_.seed(derive_seed(episode_seed_, config_.noise.seed,
                              5 + static_cast<std::uint64_t>(tick_)));
    vio_ = VioEstimator(episode_->pose(), config_.noise,
                        derive_seed(episode_seed_, config_.noise.seed,
                                    6 + static_cast<std::uint64_t>(tick_)));
  }
}

json Session::info() {
  std::lock_guard lk(mu_);
  json j = {{"session_id", id_},
            {"tick", tick_},
            {"mode", mode_name(config_.mode)},
            {"step_mode", config_.step_mode},
            {"active", episode_ != nullptr}};
  if (!episode_) return j;
  const EpisodeState& s = episode_->state();
  j["scene_digest"] = digest_;
  j["episode_seed"] = episode_seed_;
  j["done"] = s.done;
  j["steps"] = s.steps_taken;
  j["collisions"] = s.collisions;
  j["found"] = s.found_count();
  j["n_targets"] = s.targets.size();
  j["attempts"] = s.collect_attempts;
  j["successes"] = s.collect_successes;
  j["pose"] = pose_to_json(episode_->pose());
  j["result"] = result_to_json(episode_->result());
  return j;
}

std::string Session::export_mesh(MeshFormat format) {
  std::lock_guard lk(mu_);
  require_episode();
  return tesse::export_mesh(episode_->scene().world(), format);
}

std::vector<Message> Session::handle(const Message& request) {
  try {
    switch (request.type) {
      case MsgType::kPing:
        return {{MsgType::kPong, ""}};
      case MsgType::kReset:
        return {reply(reset(SessionConfig::from_json(
            parse_payload(request.payload))).to_json())};
      case MsgType::kAction:
        return {reply(act(parse_action(parse_payload(request.payload))).to_json())};
      case MsgType::kForce: {
        const json j = parse_payload(request.payload);
        const ControlCommand cmd{parse_number(j, "force"),
                                 parse_number(j, "torque")};
        return {reply(force(cmd, parse_ticks(j, false)).to_json())};
      }
      case MsgType::kStep:
        return {reply(step(parse_ticks(parse_payload(request.payload), true))
                          .to_json())};
      case MsgType::kGetObs: {
        const json j = parse_payload(request.payload);
        std::vector<Modality> mods = default_modalities();
        if (auto it = j.find("modalities"); it != j.end()) {
          if (!it->is_array()) throw ProtocolError("/modalities: expected array");
          mods.clear();
          for (const json& m : *it) {
            if (!m.is_string()) throw ProtocolError("/modalities: expected strings");
            mods.push_back(modality_from_name(m.get<std::string>()));
          }
        }
        return encode_observation(observe(mods));
      }
      case MsgType::kSetMode: {
        const json j = parse_payload(request.payload);
        auto it = j.find("mode");
        if (it == j.end() || !it->is_string()) {
          throw ProtocolError("/mode: expected string");
        }
        std::optional<NoiseConfig> noise;
        if (auto n = j.find("noise"); n != j.end()) noise = noise_from_json(*n);
        set_mode(mode_from_name(it->get<std::string>()), noise);
        return {reply({{"mode", it->get<std::string>()}})};
      }
      case MsgType::kExportMesh: {
        const json j = parse_payload(request.payload);
        std::string fmt = "ply";
        if (auto it = j.find("format"); it != j.end()) {
          if (!it->is_string()) throw ProtocolError("/format: expected string");
          fmt = it->get<std::string>();
        }
        const MeshFormat format = mesh_format_from_string(fmt);
        std::vector<Message> out;
        out.push_back({MsgType::kBuffer, export_mesh(format)});
        json header = {{"format", fmt},
                       {"buffers", {{{"name", "mesh"},
                                     {"bytes", out[0].payload.size()}}}}};
        if (format == MeshFormat::kObj) {
          out.push_back({MsgType::kBuffer, obj_material_library()});
          header["buffers"].push_back(
              {{"name", "mtl"}, {"bytes", out[1].payload.size()}});
        }
        out.insert(out.begin(), reply(header));
        return out;
      }
      case MsgType::kInfo:
        return {reply(info())};
      default:
        throw ProtocolError("message type " +
                            std::string(msg_type_name(request.type)) +
                            " is not a request");
    }
  } catch (const ProtocolError& e) {
    closed_ = true;
    return {error_reply("protocol", e.what())};
  } catch (const json::exception& e) {
    closed_ = true;
    return {error_reply("protocol", e.what())};
  } catch (const EpisodeFinishedError& e) {
    return {error_reply("episode_finished", e.what())};
  } catch (const StateError& e) {
    return {error_reply("state", e.what())};
  } catch (const SchemaError& e) {
    return {error_reply("schema", e.what())};
  } catch (const Error& e) {
    return {error_reply("invalid", e.what())};
  }
}

void Session::start_ticker() {
  ticker_stop_ = false;
  next_tick_ = Clock::now();
  ticker_ = std::thread([this] { ticker_loop(); });
}

void Session::stop_ticker() {
  {
    std::lock_guard lk(mu_);
    ticker_stop_ = true;
  }
  ticker_cv_.notify_all();
  if (ticker_.joinable()) ticker_.join();
}

void Session::ticker_loop() {
  std::unique_lock lk(mu_);
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(episode_->options().physics.dt));
  while (!ticker_stop_) {
    if (ticker_cv_.wait_until(lk, next_tick_, [this] { return ticker_stop_; })) {
      break;
    }
    if (Clock::now() < next_tick_) continue;
    const AgentState before = episode_->state().agent;
    const auto trace = episode_->apply_force(held_, 1);
    publish_trace(before, trace, false);
    if (config_.mode == SimMode::kPerception) vio_.update(episode_->pose());
    next_tick_ += period;
    if (Clock::now() - next_tick_ > std::chrono::milliseconds(100)) {
      next_tick_ = Clock::now();
    }
  }
}

}  // namespace tesse
