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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tesse/kinematics.hpp"
#include "tesse/rng.hpp"
#include "tesse/scene_geometry.hpp"
#include "tesse/sensors.hpp"

namespace tesse {

struct ScoreWeights {
  double w_p = 0.1;
  double w_c = 0.1;
  double w_a = 0.1;
  bool operator==(const ScoreWeights&) const = default;
};

struct TaskConfig {
  int n_targets = 30;
  int episode_limit = 400;
  double collect_range = 2.0;
  bool require_los = true;
  ScoreWeights weights;
  double cell_size = 0.5;     // explored-space grid
  double visit_radius = 1.0;  // explored-space disc

  void validate() const;
  bool operator==(const TaskConfig&) const = default;
};

/// s = r + w_p p - w_c c / l - w_a a / l, unclamped. Throws Error when l <= 0.
double compute_score(double recall, double precision, double collisions,
                     double actions, double limit, const ScoreWeights& w);

/// cell_size^2 times the number of lattice cells (centers at integer multiples
/// of cell_size) whose center lies within visit_radius of a trajectory point.
double explored_area(std::span<const Vec2> trajectory, double cell_size,
                     double visit_radius);

inline constexpr double kTargetClearance = 0.1;
inline constexpr double kTargetSpacing = 0.5;
inline constexpr double kTargetHalfSize = 0.125;
inline constexpr int kPlacementSamples = 10000;

/// Rejection-samples n points strictly inside office rooms, 0.1 m clear of
/// obstacles and 0.5 m apart. Throws PlacementError when infeasible.
std::vector<Vec2> place_targets(const WorldMap& world, int n, Rng& rng);

/// Renderable prism standing in for a target.
Obstacle target_prism(Vec2 position, std::uint32_t instance_id);

/// Geometric collect predicate for one target: range, field of view and,
/// optionally, line of sight at camera height.
bool target_collectable(const SceneGeometry& scene, const Pose2& agent,
                        Vec2 target, const TaskConfig& config,
                        const CameraIntrinsics& camera);

struct Target {
  Vec2 position;
  std::uint32_t instance_id = 0;
  bool found = false;
};

struct EpisodeState {
  std::shared_ptr<const SceneGeometry> scene;
  std::vector<Target> targets;
  AgentState agent;
  int steps_taken = 0;
  int collisions = 0;
  int collect_attempts = 0;
  int collect_successes = 0;
  std::vector<Vec2> trajectory;  // spawn position, then one per step
  bool done = false;

  int found_count() const;
};

/// Collects every not-yet-found target satisfying the predicate; always counts
/// the attempt. Returns the indices collected.
std::vector<std::size_t> attempt_collect(const AgentState& agent,
                                         EpisodeState& state,
                                         const TaskConfig& config,
                                         const CameraIntrinsics& camera);

struct EpisodeResult {
  double recall = 0.0;
  double precision = 0.0;
  int collisions = 0;
  int actions = 0;
  int limit = 0;
  double score = 0.0;
  double explored_m2 = 0.0;

  bool operator==(const EpisodeResult&) const = default;
};

/// Recall, precision (0 with no attempts), score and explored area.
EpisodeResult summarize_episode(int found, int n_targets, int attempts,
                                int successes, int collisions, int actions,
                                std::span<const Vec2> trajectory,
                                const TaskConfig& config);

struct StepRecord {
  int step = 0;
  Action action = Action::kCollect;
  Pose2 pose;  // ground truth after the step
  bool collided = false;
  std::vector<std::size_t> collected;
  double reward = 0.0;
  bool done = false;
  std::vector<AgentState> tick_trace;  // physics ticks of this step
};

struct EpisodeOptions {
  TaskConfig task;
  CameraIntrinsics camera;
  PhysicsParams physics;
  PDGains gains;
  bool actuation_noise = false;
};

/// One object-search episode over a shared immutable scene.
class Episode {
 public:
  Episode(std::shared_ptr<const SceneGeometry> scene, EpisodeOptions options,
          std::uint64_t episode_seed);

  /// Throws EpisodeFinishedError once done.
  StepRecord step(Action action);

  /// Raw force-mode ticks; not counted as actions.
  std::vector<AgentState> apply_force(ControlCommand cmd, int n_ticks);

  const EpisodeState& state() const { return state_; }
  const EpisodeOptions& options() const { return options_; }
  const SceneGeometry& scene() const { return *state_.scene; }
  Pose2 pose() const { return {state_.agent.position, state_.agent.yaw}; }
  Pose2 spawn_pose() const { return spawn_; }
  bool done() const { return state_.done; }
  EpisodeResult result() const;

  /// Prisms for the targets still to be found, for rendering.
  std::vector<Obstacle> target_overlays() const;

  void set_actuation_noise(bool enabled) { options_.actuation_noise = enabled; }

 private:
  EpisodeOptions options_;
  EpisodeState state_;
  Pose2 spawn_;
  Rng actuation_rng_;
};

/// Target collection reward: +1 per target found, -0.1 per step.
inline constexpr double kTargetReward = 1.0;
inline constexpr double kStepPenalty = -0.1;

}  // namespace tesse
