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
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tesse/perception.hpp"
#include "tesse/protocol.hpp"
#include "tesse/task.hpp"

namespace tesse {

enum class SimMode { kGroundTruth, kPerception };

std::string_view mode_name(SimMode m);  // "gt" / "perception"
/// Accepts gt, ground_truth, perception in any case. Throws Error otherwise.
SimMode mode_from_name(std::string_view s);

struct SessionConfig {
  std::optional<std::uint64_t> scene_seed;
  std::optional<std::string> scene_file;  // name inside the server scene dir
  std::optional<std::uint64_t> episode_seed;
  SimMode mode = SimMode::kGroundTruth;
  TaskConfig task;
  NoiseConfig noise;
  bool step_mode = true;

  /// Throws ProtocolError for wrong JSON types and Error for bad values.
  static SessionConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

nlohmann::json task_to_json(const TaskConfig& t);
TaskConfig task_from_json(const nlohmann::json& j);
nlohmann::json noise_to_json(const NoiseConfig& n);
NoiseConfig noise_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const EpisodeResult& r);
EpisodeResult result_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose2& p);
Pose2 pose_from_json(const nlohmann::json& j);

struct ResetInfo {
  std::uint64_t session_id = 0;
  std::string scene_digest;
  std::uint64_t episode_seed = 0;
  SimMode mode = SimMode::kGroundTruth;
  Pose2 spawn;
  int n_targets = 0;
  int episode_limit = 0;
  CameraIntrinsics camera;
  TaskConfig task;
  std::uint64_t tick = 0;

  nlohmann::json to_json() const;
  static ResetInfo from_json(const nlohmann::json& j);
};

/// Reply to ACTION. pose and displacement are ground truth and meant for
/// evaluation bookkeeping, not for policies.
struct StepReceipt {
  int step = 0;
  Action action = Action::kCollect;
  bool collided = false;
  std::vector<std::uint32_t> collected;  // target instance ids
  bool done = false;
  int actions = 0;
  int collisions = 0;
  int found = 0;
  int attempts = 0;
  int successes = 0;
  double reward = 0.0;
  std::uint64_t tick = 0;
  Pose2 pose;
  Vec2 displacement;

  nlohmann::json to_json() const;
  static StepReceipt from_json(const nlohmann::json& j);
};

/// Reply to STEP and FORCE.
struct TickReceipt {
  int ticks = 0;
  std::uint64_t tick = 0;
  bool collided = false;
  Pose2 pose;
  Vec2 displacement;

  nlohmann::json to_json() const;
  static TickReceipt from_json(const nlohmann::json& j);
};

enum class Modality : std::uint8_t { kColor, kDepth, kSeg, kInst, kLidar };

std::string_view modality_name(Modality m);
Modality modality_from_name(std::string_view s);  // throws ProtocolError

/// color, depth, seg and inst; lidar is opt-in.
std::vector<Modality> default_modalities();

struct Observation {
  std::vector<Modality> modalities;
  SimMode mode = SimMode::kGroundTruth;
  std::uint64_t tick = 0;
  int step = 0;
  PoseEstimate pose;
  ColorImage color;
  DepthImage depth;
  SegImage seg;
  InstImage inst;
  std::vector<float> lidar;  // ranges, beam i at yaw + 2 pi i / n

  bool has(Modality m) const;
};

inline constexpr int kLidarBeams = 360;

/// JSON header reply followed by one BUFFER frame per modality, in order.
std::vector<Message> encode_observation(const Observation& obs);
/// Inverse of encode_observation. Throws ProtocolError on size mismatches.
Observation decode_observation(const std::vector<Message>& frames);
/// Byte payload of one modality as it appears on the wire.
std::string modality_bytes(const Observation& obs, Modality m);

/// Receives one packet per physics tick.
class OdometrySink {
 public:
  virtual ~OdometrySink() = default;
  virtual void publish(std::uint64_t session_id, const Odometry& odom) = 0;
};

/// Process-wide cache of immutable scenes, keyed by seed or file name.
class SceneStore {
 public:
  explicit SceneStore(std::filesystem::path scene_dir = {});

  std::shared_ptr<const SceneGeometry> by_seed(std::uint64_t seed);
  /// name must be a plain file name inside the scene dir.
  std::shared_ptr<const SceneGeometry> by_file(const std::string& name);

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::uint64_t, std::shared_ptr<const SceneGeometry>> seeds_;
  std::map<std::string, std::shared_ptr<const SceneGeometry>> files_;
};

struct SessionDefaults {
  std::uint64_t master_seed = 0;
  SimMode mode = SimMode::kGroundTruth;
};

/// One simulation session: world, episode, sensors, noise streams and the
/// odometry clock. Commands are serialized by an internal mutex; in real-time
/// mode a ticker thread advances physics at 200 Hz between commands.
class Session {
 public:
  Session(std::uint64_t id, std::shared_ptr<SceneStore> store,
          OdometrySink* sink = nullptr, SessionDefaults defaults = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  std::uint64_t id() const { return id_; }

  ResetInfo reset(const SessionConfig& config);
  StepReceipt act(Action action);
  /// Holds cmd and advances n_ticks (n_ticks may be 0 in real-time mode).
  TickReceipt force(ControlCommand cmd, int n_ticks);
  /// Advances n_ticks under the held command. Step mode only.
  TickReceipt step(int n_ticks);
  Observation observe(const std::vector<Modality>& modalities);
  void set_mode(SimMode mode, std::optional<NoiseConfig> noise);
  nlohmann::json info();
  std::string export_mesh(MeshFormat format);

  /// Protocol dispatch. Errors become ERROR replies; after a ProtocolError
  /// closed() turns true and the connection should be dropped.
  std::vector<Message> handle(const Message& request);
  bool closed() const { return closed_; }

  /// Ground-truth state for tests and oracles.
  const Episode& episode() const;

 private:
  void require_episode() const;
  void publish_trace(const AgentState& before,
                     const std::vector<AgentState>& trace, bool paced);
  Observation observe_locked(const std::vector<Modality>& modalities);
  void start_ticker();
  void stop_ticker();
  void ticker_loop();

  std::uint64_t id_;
  std::shared_ptr<SceneStore> store_;
  OdometrySink* sink_;
  SessionDefaults defaults_;

  mutable std::mutex mu_;
  SessionConfig config_;
  std::unique_ptr<Episode> episode_;
  std::string digest_;
  std::uint64_t episode_seed_ = 0;
  std::uint64_t tick_ = 0;
  ControlCommand held_;
  Rng obs_rng_;
  VioEstimator vio_;
  bool closed_ = false;

  std::thread ticker_;
  std::condition_variable ticker_cv_;
  bool ticker_stop_ = false;
  std::chrono::steady_clock::time_point next_tick_;
};

}  // namespace tesse
