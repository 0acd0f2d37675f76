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

#include "tesse/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tesse/error.hpp"

namespace tesse {
namespace {

constexpr int kMaxSlideIterations = 4;

bool finite_state(const AgentState& s) {
  return std::isfinite(s.position.x) && std::isfinite(s.position.y) &&
         std::isfinite(s.yaw) && std::isfinite(s.linear_speed) &&
         std::isfinite(s.angular_rate);
}

}  // namespace

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kMoveForward:
      return "move_forward";
    case Action::kTurnLeft:
      return "turn_left";
    case Action::kTurnRight:
      return "turn_right";
    case Action::kCollect:
      return "collect";
  }
  return "unknown";
}

std::optional<Action> action_from_name(std::string_view s) {
  for (Action a : {Action::kMoveForward, Action::kTurnLeft, Action::kTurnRight,
                   Action::kCollect}) {
    if (action_name(a) == s) return a;
  }
  return std::nullopt;
}

ControlCommand clamp_command(ControlCommand cmd, const PhysicsParams& params) {
  cmd.forward_force = std::clamp(cmd.forward_force, -params.max_force, params.max_force);
  cmd.torque = std::clamp(cmd.torque, -params.max_torque, params.max_torque);
  return cmd;
}

AgentState integrate_tick(const AgentState& state, const ControlCommand& cmd,
                          const PhysicsParams& params) {
  if (!finite_state(state) || !std::isfinite(cmd.forward_force) ||
      !std::isfinite(cmd.torque)) {
    throw NumericError("integrate_tick: non-finite state or command");
  }
  const double dt = params.dt;
  AgentState next = state;
  next.linear_speed = state.linear_speed +
                      dt * (cmd.forward_force / params.mass -
                            params.linear_damping * state.linear_speed);
  next.angular_rate = state.angular_rate +
                      dt * (cmd.torque / params.inertia -
                            params.angular_damping * state.angular_rate);
  next.yaw = wrap_angle(state.yaw + next.angular_rate * dt);
  next.position = state.position + heading(next.yaw) * (next.linear_speed * dt);
  next.in_contact = false;
  return next;
}

CollisionResult resolve_collision(const AgentState& prev,
                                  const AgentState& proposed,
                                  const SceneGeometry& scene,
                                  const PhysicsParams& params) {
  const double r = params.agent_radius;
  Vec2 p = prev.position;
  Vec2 remaining = proposed.position - prev.position;
  std::array<Vec2, kMaxSlideIterations> normals{};
  int n_contacts = 0;

  for (int it = 0; it < kMaxSlideIterations; ++it) {
    if (remaining.x == 0.0 && remaining.y == 0.0) break;
    const auto contact = scene.sweep_disc(p, remaining, r);
    if (!contact) {
      p += remaining;
      remaining = {};
      break;
    }
    const Vec2 n = contact->normal;
    normals[n_contacts++] = n;
    const Vec2 rest = remaining * (1.0 - contact->fraction);
    p = p + remaining * contact->fraction - n * params.contact_slack;
    const double into = dot(rest, n);
    remaining = into > 0.0 ? rest - n * into : rest;
  }
  if (n_contacts == 0) return {proposed, false};

  AgentState out = proposed;
  // A slide that ends wedged in a concave corner falls back to the last
  // collision-free position.
  out.position = (remaining.x == 0.0 && remaining.y == 0.0 &&
                  !scene.disc_collides(p, r))
                     ? p
                     : prev.position;
  Vec2 v = proposed.velocity();
  for (int i = 0; i < n_contacts; ++i) {
    const double into = dot(v, normals[i]);
    if (into > 0.0) v = v - normals[i] * into;
  }
  out.linear_speed = dot(v, heading(proposed.yaw));
  out.in_contact = true;
  return {out, true};
}

AgentState physics_tick(const AgentState& state, ControlCommand cmd,
                        const SceneGeometry& scene,
                        const PhysicsParams& params) {
  const AgentState proposed = integrate_tick(state, clamp_command(cmd, params), params);
  return resolve_collision(state, proposed, scene, params).state;
}

ActionOutcome execute_discrete_action(const AgentState& state, Action action,
                                      const SceneGeometry& scene,
                                      const PDGains& gains,
                                      const PhysicsParams& params,
                                      Rng* actuation_noise) {
  ActionOutcome out{state, {}, false};
  if (action == Action::kCollect) return out;

  const Vec2 start = state.position;
  const double yaw0 = state.yaw;
  Vec2 goal = start;
  double yaw_goal = yaw0;
  switch (action) {
    case Action::kMoveForward:
      goal = start + heading(yaw0) * kForwardStep;
      break;
    case Action::kTurnLeft:
      yaw_goal = wrap_angle(yaw0 + deg2rad(kTurnStepDeg));
      break;
    case Action::kTurnRight:
      yaw_goal = wrap_angle(yaw0 - deg2rad(kTurnStepDeg));
      break;
    case Action::kCollect:
      break;
  }

  const int max_ticks = static_cast<int>(std::lround(gains.timeout / params.dt));
  AgentState s = state;
  out.tick_trace.reserve(static_cast<std::size_t>(max_ticks));
  for (int k = 0; k < max_ticks; ++k) {
    const double e_lin = dot(goal - s.position, heading(s.yaw));
    const double e_ang = wrap_angle(yaw_goal - s.yaw);
    if (std::abs(e_lin) <= gains.position_tolerance &&
        std::abs(e_ang) <= gains.angle_tolerance &&
        std::abs(s.linear_speed) <= gains.settle_speed &&
        std::abs(s.angular_rate) <= gains.settle_rate) {
      break;
    }
    ControlCommand cmd{gains.kp_lin * e_lin - gains.kd_lin * s.linear_speed,
                       gains.kp_ang * e_ang - gains.kd_ang * s.angular_rate};
    cmd = clamp_command(cmd, params);
    if (actuation_noise != nullptr) {
      cmd.forward_force += gaussian(*actuation_noise,
                                    kActuationNoiseFraction * std::abs(cmd.forward_force));
      cmd.torque += gaussian(*actuation_noise,
                             kActuationNoiseFraction * std::abs(cmd.torque));
      cmd = clamp_command(cmd, params);
    }
    s = physics_tick(s, cmd, scene, params);
    out.collided |= s.in_contact;
    out.tick_trace.push_back(s);
  }
  out.final_state = s;
  return out;
}

std::vector<Odometry> sample_odometry(std::span<const AgentState> trace,
                                      const PhysicsParams& params,
                                      std::uint64_t first_tick) {
  if (trace.size() < 2) {
    throw Error("sample_odometry: need at least two states to difference");
  }
  std::vector<Odometry> out;
  out.reserve(trace.size() - 1);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const AgentState& s = trace[k];
    const Vec2 v = s.velocity();
    const Vec2 v_prev = trace[k - 1].velocity();
    out.push_back({first_tick + (k - 1), s.position, s.yaw, v,
                   (v - v_prev) / params.dt, s.angular_rate, s.in_contact});
  }
  return out;
}

}  // namespace tesse
