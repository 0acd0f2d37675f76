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
#include <string_view>
#include <vector>

#include "tesse/geometry.hpp"
#include "tesse/rng.hpp"
#include "tesse/scene_geometry.hpp"

namespace tesse {

/// Planar unicycle state. yaw is kept in (-pi, pi].
struct AgentState {
  Vec2 position;
  double yaw = 0.0;
  double linear_speed = 0.0;  // body-forward, m/s
  double angular_rate = 0.0;  // rad/s
  bool in_contact = false;

  Vec2 velocity() const { return heading(yaw) * linear_speed; }
  bool operator==(const AgentState&) const = default;
};

struct PhysicsParams {
  double dt = 0.005;  // one tick; also one odometry packet (200 Hz)
  double mass = 1.0;
  double inertia = 1.0;
  double linear_damping = 0.5;
  double angular_damping = 1.0;
  double agent_radius = 0.3;
  double max_force = 5.0;
  double max_torque = 3.0;
  double contact_slack = 0.001;
};

struct ControlCommand {
  double forward_force = 0.0;
  double torque = 0.0;
};

ControlCommand clamp_command(ControlCommand cmd, const PhysicsParams& params);

struct PDGains {
  double kp_lin = 8.0;
  double kd_lin = 4.0;
  double kp_ang = 6.0;
  double kd_ang = 2.0;
  double position_tolerance = 0.01;
  double angle_tolerance = 0.0087;
  double timeout = 2.0;  // simulated seconds
  // Settling also requires the agent to have nearly stopped.
  double settle_speed = 0.05;
  double settle_rate = 0.05;
};

enum class Action : std::uint8_t {
  kMoveForward = 0,
  kTurnLeft = 1,
  kTurnRight = 2,
  kCollect = 3,
};

inline constexpr double kForwardStep = 0.5;    // meters
inline constexpr double kTurnStepDeg = 8.0;    // degrees

std::string_view action_name(Action a);
std::optional<Action> action_from_name(std::string_view s);

/// One semi-implicit Euler step. No collision handling. Throws NumericError
/// on non-finite input.
AgentState integrate_tick(const AgentState& state, const ControlCommand& cmd,
                          const PhysicsParams& params);

struct CollisionResult {
  AgentState state;
  bool collided = false;
};

/// Stop-and-slide: stops the disc at first contact backed off by the slack
/// along the contact normal, keeps the tangential part of the motion and
/// removes the normal part of the velocity.
CollisionResult resolve_collision(const AgentState& prev,
                                  const AgentState& proposed,
                                  const SceneGeometry& scene,
                                  const PhysicsParams& params);

/// integrate_tick followed by resolve_collision.
AgentState physics_tick(const AgentState& state, ControlCommand cmd,
                        const SceneGeometry& scene,
                        const PhysicsParams& params);

struct ActionOutcome {
  AgentState final_state;
  std::vector<AgentState> tick_trace;  // state after each tick
  bool collided = false;
};

/// Drives a movement action with a PD loop until it settles or times out.
/// When actuation_noise is set, each applied force and torque is perturbed by
/// zero-mean Gaussian noise with sigma equal to 5% of the command magnitude.
ActionOutcome execute_discrete_action(const AgentState& state, Action action,
                                      const SceneGeometry& scene,
                                      const PDGains& gains,
                                      const PhysicsParams& params,
                                      Rng* actuation_noise = nullptr);

inline constexpr double kActuationNoiseFraction = 0.05;

struct Odometry {
  std::uint64_t tick = 0;
  Vec2 position;
  double yaw = 0.0;
  Vec2 velocity;
  Vec2 acceleration;
  double angular_rate = 0.0;
  bool collision = false;
};

/// One record per tick for trace[1..]; trace[0] is the state before the first
/// tick. Acceleration is (v_k - v_{k-1}) / dt. Throws Error for traces
/// shorter than two states.
std::vector<Odometry> sample_odometry(std::span<const AgentState> trace,
                                      const PhysicsParams& params,
                                      std::uint64_t first_tick = 1);

}  // namespace tesse
