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

#include "tesse/task.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "tesse/error.hpp"

namespace tesse {

void TaskConfig::validate() const {
  if (n_targets < 1) throw Error("task.n_targets must be >= 1");
  if (episode_limit <= 0) throw Error("task.episode_limit must be > 0");
  if (!(collect_range > 0.0)) throw Error("task.collect_range must be > 0");
  if (!(cell_size > 0.0)) throw Error("task.cell_size must be > 0");
  if (!(visit_radius >= 0.0)) throw Error("task.visit_radius must be >= 0");
}

double compute_score(double recall, double precision, double collisions,
                     double actions, double limit, const ScoreWeights& w) {
  if (!(limit > 0.0)) throw Error("score: episode limit must be positive");
  return recall + w.w_p * precision - w.w_c * collisions / limit -
         w.w_a * actions / limit;
}

double explored_area(std::span<const Vec2> trajectory, double cell_size,
                     double visit_radius) {
  if (!(cell_size > 0.0)) throw Error("explored_area: cell_size must be > 0");
  std::set<std::pair<long long, long long>> cells;
  const double r2 = visit_radius * visit_radius;
  for (const Vec2& p : trajectory) {
    const auto lo_x = static_cast<long long>(
        std::ceil((p.x - visit_radius) / cell_size));
    const auto hi_x = static_cast<long long>(
        std::floor((p.x + visit_radius) / cell_size));
    const auto lo_y = static_cast<long long>(
        std::ceil((p.y - visit_radius) / cell_size));
    const auto hi_y = static_cast<long long>(
        std::floor((p.y + visit_radius) / cell_size));
    for (long long ix = lo_x; ix <= hi_x; ++ix) {
      for (long long iy = lo_y; iy <= hi_y; ++iy) {
        const double dx = static_cast<double>(ix) * cell_size - p.x;
        const double dy = static_cast<double>(iy) * cell_size - p.y;
        if (dx * dx + dy * dy <= r2) cells.emplace(ix, iy);
      }
    }
  }
  return static_cast<double>(cells.size()) * cell_size * cell_size;
}

std::vector<Vec2> place_targets(const WorldMap& world, int n, Rng& rng) {
  if (n < 0) throw PlacementError("negative target count");
  std::vector<const Room*> offices;
  std::vector<double> weights;
  for (const Room& r : world.rooms) {
    if (r.type != RoomType::kOffice) continue;
    offices.push_back(&r);
    weights.push_back(std::abs(signed_area(r.polygon)));
  }
  if (n == 0) return {};
  if (offices.empty()) throw PlacementError("scene has no office rooms");

  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<Vec2> out;
  for (int tries = 0; tries < kPlacementSamples && std::ssize(out) < n;
       ++tries) {
    const Room& room = *offices[pick(rng)];
    const Rect box = bounding_box(room.polygon);
    const Vec2 p{uniform(rng, box.min.x, box.max.x),
                 uniform(rng, box.min.y, box.max.y)};
    if (!point_strictly_inside(p, room.polygon)) continue;
    bool ok = true;
    for (const Obstacle& o : world.obstacles) {
      if (point_in_polygon(p, o.polygon) ||
          point_polygon_boundary_distance(p, o.polygon) < kTargetClearance) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (const Vec2& q : out) {
      if (norm(p - q) < kTargetSpacing) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(p);
  }
  if (std::ssize(out) < n) {
    throw PlacementError("placed " + std::to_string(out.size()) + " of " +
                         std::to_string(n) + " targets after " +
                         std::to_string(kPlacementSamples) + " samples");
  }
  return out;
}

Obstacle target_prism(Vec2 position, std::uint32_t instance_id) {
  const Vec2 h{kTargetHalfSize, kTargetHalfSize};
  const HeightBand band = default_band(SemanticClass::kTarget);
  return Obstacle{rect_polygon({position - h, position + h}),
                  SemanticClass::kTarget, instance_id, band.top, band.base};
}

bool target_collectable(const SceneGeometry& scene, const Pose2& agent,
                        Vec2 target, const TaskConfig& config,
                        const CameraIntrinsics& camera) {
  const Vec2 d = target - agent.position;
  const double dist = norm(d);
  if (dist > config.collect_range) return false;
  if (dist == 0.0) return true;
  const double bearing = wrap_angle(std::atan2(d.y, d.x) - agent.yaw);
  if (std::abs(bearing) > deg2rad(camera.hfov_deg / 2.0)) return false;
  if (!config.require_los) return true;
  return !scene.first_hit(agent.position, d / dist, dist, camera.camera_height)
              .has_value();
}

int EpisodeState::found_count() const {
  return static_cast<int>(std::count_if(targets.begin(), targets.end(),
                                        [](const Target& t) { return t.found; }));
}

std::vector<std::size_t> attempt_collect(const AgentState& agent,
                                         EpisodeState& state,
                                         const TaskConfig& config,
                                         const CameraIntrinsics& camera) {
  std::vector<std::size_t> got;
  const Pose2 pose{agent.position, agent.yaw};
  for (std::size_t i = 0; i < state.targets.size(); ++i) {
    Target& t = state.targets[i];
    if (t.found) continue;
    if (target_collectable(*state.scene, pose, t.position, config, camera)) {
      t.found = true;
      got.push_back(i);
    }
  }
  ++state.collect_attempts;
  if (!got.empty()) ++state.collect_successes;
  return got;
}

EpisodeResult summarize_episode(int found, int n_targets, int attempts,
                                int successes, int collisions, int actions,
                                std::span<const Vec2> trajectory,
                                const TaskConfig& config) {
  EpisodeResult r;
  r.recall = n_targets > 0 ? static_cast<double>(found) / n_targets : 0.0;
  r.precision = attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
  r.collisions = collisions;
  r.actions = actions;
  r.limit = config.episode_limit;
  r.score = compute_score(r.recall, r.precision, collisions, actions,
                          config.episode_limit, config.weights);
  r.explored_m2 =
      explored_area(trajectory, config.cell_size, config.visit_radius);
  return r;
}

Episode::Episode(std::shared_ptr<const SceneGeometry> scene,
                 EpisodeOptions options, std::uint64_t episode_seed)
    : options_(std::move(options)),
      actuation_rng_(derive_seed(episode_seed, 2)) {
  if (!scene) throw Error("episode requires a scene");
  options_.task.validate();
  state_.scene = std::move(scene);
  const WorldMap& world = state_.scene->world();
  if (world.spawn_points.empty()) throw StateError("scene has no spawn points");

  Rng rng(derive_seed(episode_seed, 1));
  const auto positions = place_targets(world, options_.task.n_targets, rng);
  std::uint32_t next_id = 1;
  for (const Obstacle& o : world.obstacles) {
    next_id = std::max(next_id, o.instance_id + 1);
  }
  if (next_id + positions.size() > 65535) {
    throw PlacementError("target instance ids exceed 16 bits");
  }
  for (const Vec2& p : positions) {
    state_.targets.push_back({p, next_id++, false});
  }

  const int spawn_idx =
      uniform_int(rng, 0, static_cast<int>(world.spawn_points.size()) - 1);
  spawn_.position = world.spawn_points[static_cast<std::size_t>(spawn_idx)];
  spawn_.yaw = wrap_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
  state_.agent.position = spawn_.position;
  state_.agent.yaw = spawn_.yaw;
  state_.trajectory.push_back(spawn_.position);
  state_.done = options_.task.n_targets == 0;
}

StepRecord Episode::step(Action action) {
  if (state_.done) {
    throw EpisodeFinishedError("episode finished after " +
                               std::to_string(state_.steps_taken) + " actions");
  }
  StepRecord rec;
  rec.action = action;
  if (action == Action::kCollect) {
    rec.collected = attempt_collect(state_.agent, state_, options_.task,
                                    options_.camera);
  } else {
    ActionOutcome out = execute_discrete_action(
        state_.agent, action, *state_.scene, options_.gains, options_.physics,
        options_.actuation_noise ? &actuation_rng_ : nullptr);
    state_.agent = out.final_state;
    state_.agent.in_contact = false;
    rec.collided = out.collided;
    rec.tick_trace = std::move(out.tick_trace);
    if (rec.collided) ++state_.collisions;
  }
  ++state_.steps_taken;
  state_.trajectory.push_back(state_.agent.position);
  rec.step = state_.steps_taken;
  rec.pose = pose();
  rec.reward = kTargetReward * static_cast<double>(rec.collected.size()) +
               kStepPenalty;
  state_.done = state_.found_count() == std::ssize(state_.targets) ||
                state_.steps_taken >= options_.task.episode_limit;
  rec.done = state_.done;
  return rec;
}

std::vector<AgentState> Episode::apply_force(ControlCommand cmd, int n_ticks) {
  if (n_ticks < 0) throw Error("tick count must be >= 0");
  std::vector<AgentState> trace;
  trace.reserve(static_cast<std::size_t>(n_ticks));
  for (int i = 0; i < n_ticks; ++i) {
    state_.agent =
        physics_tick(state_.agent, cmd, *state_.scene, options_.physics);
    trace.push_back(state_.agent);
  }
  return trace;
}

EpisodeResult Episode::result() const {
  return summarize_episode(state_.found_count(),
                           static_cast<int>(state_.targets.size()),
                           state_.collect_attempts, state_.collect_successes,
                           state_.collisions, state_.steps_taken,
                           state_.trajectory, options_.task);
}

std::vector<Obstacle> Episode::target_overlays() const {
  std::vector<Obstacle> out;
  for (const Target& t : state_.targets) {
    if (!t.found) out.push_back(target_prism(t.position, t.instance_id));
  }
  return out;
}

}  // namespace tesse
