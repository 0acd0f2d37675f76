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

#include "tesse/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tesse/error.hpp"

namespace tesse {
namespace {

constexpr std::int8_t kMinEvidence = -4;
constexpr std::int8_t kMaxEvidence = 8;

}  // namespace

Action random_policy_act(Rng& rng) {
  return static_cast<Action>(uniform_int(rng, 0, 3));
}

void RandomPolicy::reset(const ResetInfo& start) {
  rng_.seed(derive_seed(seed_, start.episode_seed));
}

Action RandomPolicy::act(const Observation&) { return random_policy_act(rng_); }

OccupancyGrid::OccupancyGrid(Vec2 center, double cell, int n)
    : origin_(center - Vec2{cell * n / 2.0, cell * n / 2.0}),
      cell_(cell),
      n_(n),
      evidence_(static_cast<std::size_t>(n) * n, 0),
      seen_(static_cast<std::size_t>(n) * n, 0),
      blocked_(static_cast<std::size_t>(n) * n, 0) {}

bool OccupancyGrid::in_bounds(int ix, int iy) const {
  return ix >= 0 && iy >= 0 && ix < n_ && iy < n_;
}

std::optional<std::pair<int, int>> OccupancyGrid::cell_of(Vec2 p) const {
  const int ix = static_cast<int>(std::floor((p.x - origin_.x) / cell_));
  const int iy = static_cast<int>(std::floor((p.y - origin_.y) / cell_));
  if (!in_bounds(ix, iy)) return std::nullopt;
  return std::pair{ix, iy};
}

Vec2 OccupancyGrid::center_of(int ix, int iy) const {
  return {origin_.x + (ix + 0.5) * cell_, origin_.y + (iy + 0.5) * cell_};
}

bool OccupancyGrid::known(int ix, int iy) const {
  return in_bounds(ix, iy) && seen_[static_cast<std::size_t>(iy) * n_ + ix];
}

bool OccupancyGrid::occupied(int ix, int iy) const {
  if (!known(ix, iy)) return false;
  const std::size_t k = static_cast<std::size_t>(iy) * n_ + ix;
  return blocked_[k] != 0 || evidence_[k] > 0;
}

void OccupancyGrid::mark_blocked(Vec2 p) {
  auto c = cell_of(p);
  if (!c) return;
  const std::size_t k = static_cast<std::size_t>(c->second) * n_ + c->first;
  seen_[k] = 1;
  blocked_[k] = 1;
}

void OccupancyGrid::add_hit(Vec2 p, int weight) {
  auto c = cell_of(p);
  if (!c) return;
  const std::size_t k = static_cast<std::size_t>(c->second) * n_ + c->first;
  seen_[k] = 1;
  evidence_[k] = static_cast<std::int8_t>(
      std::min<int>(kMaxEvidence, evidence_[k] + weight));
}

void OccupancyGrid::add_pass(Vec2 p, bool keep_hits) {
  auto c = cell_of(p);
  if (!c) return;
  const std::size_t k = static_cast<std::size_t>(c->second) * n_ + c->first;
  if (keep_hits && seen_[k] && evidence_[k] > 0) return;
  seen_[k] = 1;
  evidence_[k] = static_cast<std::int8_t>(
      std::max<int>(kMinEvidence, evidence_[k] - 1));
}

FrontierPolicy::FrontierPolicy(std::uint64_t seed, FrontierParams params)
    : seed_(seed), params_(params) {}

void FrontierPolicy::reset(const ResetInfo& start) {
  camera_ = start.camera;
  grid_ = OccupancyGrid(start.spawn.position, params_.cell, params_.grid_cells);
  rng_.seed(derive_seed(seed_, start.episode_seed, 7));
  last_pose_ = start.spawn;
  last_action_.reset();
  cooldown_ = 0;
  goal_.reset();
  goal_steps_ = 0;
  blacklist_.clear();
  history_.clear();
  pending_bump_ = false;
  failed_collects_.clear();
  last_sighting_.reset();
}

void FrontierPolicy::integrate(const Observation& obs) {
  if (!obs.has(Modality::kDepth) || !obs.has(Modality::kSeg)) {
    throw Error("frontier policy needs depth and seg");
  }
  const DepthImage& depth = obs.depth;
  const SegImage& seg = obs.seg;
  const Vec2 pos = obs.pose.position;
  const double yaw = obs.pose.yaw;
  const auto target = class_id(SemanticClass::kTarget);
  const double max_z = depth.max_range * 0.999;
  // Below this range the lowest image row passes over short obstacles.
  const double blind =
      (camera_.camera_height - params_.obstacle_min_elevation) /
      -camera_.row_tan(depth.height - 1);

  for (double dx = -0.25; dx <= 0.25; dx += params_.cell) {
    for (double dy = -0.25; dy <= 0.25; dy += params_.cell) {
      grid_.add_pass(pos + Vec2{dx, dy});
    }
  }
  for (int c = 0; c < depth.width; c += 2) {
    const double tan_c = camera_.column_tan(c);
    double obstacle_z = std::numeric_limits<double>::infinity();
    for (int r = 0; r < depth.height; ++r) {
      const double z = depth.at(c, r);
      if (z >= max_z || seg.at(c, r) == target) continue;
      const double elev = camera_.camera_height + z * camera_.row_tan(r);
      if (elev > params_.obstacle_min_elevation &&
          elev < params_.obstacle_max_elevation) {
        obstacle_z = std::min(obstacle_z, z);
      }
    }
    const double k = std::sqrt(1.0 + tan_c * tan_c);
    const Vec2 dir = rotate(Vec2{1.0, tan_c} / k, yaw);
    const double hit_dist = obstacle_z * k;
    const double free_dist =
        std::min(hit_dist - params_.cell, params_.max_fuse_range);
    for (double s = 0.0; s <= free_dist; s += params_.cell * 0.5) {
      grid_.add_pass(pos + dir * s, s < blind);
    }
    if (hit_dist <= params_.max_fuse_range) grid_.add_hit(pos + dir * hit_dist);
  }
}

std::optional<FrontierPolicy::TargetSighting> FrontierPolicy::find_target(
    const Observation& obs) const {
  const auto target = class_id(SemanticClass::kTarget);
  const double max_z = obs.depth.max_range * 0.999;
  TargetSighting s;
  s.nearest = std::numeric_limits<double>::infinity();
  double col_sum = 0.0;
  for (int r = 0; r < obs.seg.height; ++r) {
    for (int c = 0; c < obs.seg.width; ++c) {
      if (obs.seg.at(c, r) != target) continue;
      const double z = obs.depth.at(c, r);
      if (z >= max_z) continue;
      const double tan_c = camera_.column_tan(c);
      const double d = z * std::sqrt(1.0 + tan_c * tan_c);
      ++s.pixels;
      col_sum += c;
      if (d < s.nearest) {
        s.nearest = d;
        s.world = obs.pose.position + rotate(Vec2{z, z * tan_c}, obs.pose.yaw);
      }
    }
  }
  if (s.pixels < params_.min_target_pixels) return std::nullopt;
  s.mean_column = col_sum / s.pixels;
  return s;
}

Action FrontierPolicy::steer_toward(Vec2 goal, const Pose2& pose) {
  const Vec2 d = goal - pose.position;
  const double bearing = wrap_angle(std::atan2(d.y, d.x) - pose.yaw);
  if (std::abs(bearing) > deg2rad(params_.turn_threshold_deg)) {
    return bearing > 0.0 ? Action::kTurnLeft : Action::kTurnRight;
  }
  return Action::kMoveForward;
}

void FrontierPolicy::plan_from(const Pose2& pose) {
  const int n = grid_.size();
  dist_.assign(static_cast<std::size_t>(n) * n,
               std::numeric_limits<double>::infinity());
  parent_.assign(dist_.size(), -1);
  const auto start = grid_.cell_of(pose.position);
  if (!start) return;
  auto index = [n](int x, int y) { return static_cast<std::size_t>(y) * n + x; };
  auto clearance = [&](int x, int y) {
    int best = 3;
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        if (grid_.occupied(x + dx, y + dy)) {
          best = std::min(best, std::max(std::abs(dx), std::abs(dy)));
        }
      }
    }
    return best;
  };
  const int sx = start->first;
  const int sy = start->second;
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const std::size_t s0 = index(start->first, start->second);
  dist_[s0] = 0.0;
  open.emplace(0.0, static_cast<std::int32_t>(s0));
  while (!open.empty()) {
    const auto [d, k] = open.top();
    open.pop();
    if (d > dist_[static_cast<std::size_t>(k)]) continue;
    const int x = k % n;
    const int y = k / n;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx;
        const int ny = y + dy;
        if (!grid_.free(nx, ny)) continue;
        if (dx != 0 && dy != 0 &&
            (!grid_.free(x + dx, y) || !grid_.free(x, y + dy))) {
          continue;
        }
        const int clear = clearance(nx, ny);
        const bool escape = std::abs(nx - sx) <= 2 && std::abs(ny - sy) <= 2;
        if (clear <= 1 && !escape) continue;
        const double step = (dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0;
        const double nd = d + step + (clear <= 1 ? 8.0 : clear == 2 ? 2.0 : 0.0);
        const std::size_t nk = index(nx, ny);
        if (nd < dist_[nk]) {
          dist_[nk] = nd;
          parent_[nk] = k;
          open.emplace(nd, static_cast<std::int32_t>(nk));
        }
      }
    }
  }
}

template <typename Accept>
std::optional<Action> FrontierPolicy::follow_best(const Pose2& pose,
                                                  Accept&& accept,
                                                  std::pair<int, int>* chosen) {
  const int n = grid_.size();
  // Ranked by estimated actions: path cells per forward move plus turns.
  const double cells_per_move = 0.5 / grid_.cell();
  const double turn_step = deg2rad(8.0);
  double best_cost = std::numeric_limits<double>::infinity();
  std::int32_t best = -1;
  for (std::size_t k = 0; k < dist_.size(); ++k) {
    const double d = dist_[k] / cells_per_move;
    if (!std::isfinite(d) || d >= best_cost) continue;
    const int x = static_cast<int>(k) % n;
    const int y = static_cast<int>(k) / n;
    if (!accept(x, y)) continue;
    const Vec2 v = grid_.center_of(x, y) - pose.position;
    const double angle = std::abs(wrap_angle(std::atan2(v.y, v.x) - pose.yaw));
    const double cost = d + angle / turn_step;
    if (cost < best_cost) {
      best_cost = cost;
      best = static_cast<std::int32_t>(k);
    }
  }
  if (best < 0) return std::nullopt;
  if (chosen) *chosen = {best % n, best / n};

  std::vector<std::int32_t> path;
  for (std::int32_t k = best; k >= 0; k = parent_[static_cast<std::size_t>(k)]) {
    path.push_back(k);
  }
  std::reverse(path.begin(), path.end());
  Vec2 waypoint = grid_.center_of(best % n, best / n);
  for (std::int32_t k : path) {
    const Vec2 c = grid_.center_of(k % n, k / n);
    if (norm(c - pose.position) >= params_.lookahead) {
      waypoint = c;
      break;
    }
  }
  return steer_toward(waypoint, pose);
}

std::optional<Action> FrontierPolicy::frontier_action(const Pose2& pose) {
  auto is_frontier = [&](int x, int y) {
    int unknown = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (grid_.in_bounds(x + dx, y + dy) && !grid_.known(x + dx, y + dy)) {
          ++unknown;
        }
      }
    }
    if (unknown < 3) return false;
    for (const auto& b : blacklist_) {
      if (std::abs(b.first - x) <= 2 && std::abs(b.second - y) <= 2) return false;
    }
    return norm(grid_.center_of(x, y) - pose.position) >= 0.75;
  };
  std::pair<int, int> goal;
  auto action = follow_best(pose, is_frontier, &goal);
  if (!action) return std::nullopt;
  if (goal_ && *goal_ != goal) {
    const int n = grid_.size();
    const double held = dist_[static_cast<std::size_t>(goal_->second) * n + goal_->first];
    const double fresh = dist_[static_cast<std::size_t>(goal.second) * n + goal.first];
    if (std::isfinite(held) && is_frontier(goal_->first, goal_->second) &&
        fresh > 0.7 * held - 2.0) {
      const std::pair<int, int> kept = *goal_;
      action = follow_best(pose, [&](int x, int y) {
        return x == kept.first && y == kept.second;
      });
      goal = kept;
    }
  }
  if (goal_ && std::abs(goal_->first - goal.first) <= 2 &&
      std::abs(goal_->second - goal.second) <= 2) {
    if (++goal_steps_ > params_.goal_patience) {
      blacklist_.push_back(goal);
      goal_.reset();
      goal_steps_ = 0;
    }
  } else {
    goal_ = goal;
    goal_steps_ = 0;
  }
  return action;
}

Action FrontierPolicy::act(const Observation& obs) {
  integrate(obs);
  const Pose2 pose{obs.pose.position, obs.pose.yaw};
  if (pending_bump_) {
    if (norm(pose.position - last_pose_.position) < 0.2) {
      for (double da : {-0.5, 0.0, 0.5}) {
        grid_.mark_blocked(last_pose_.position +
                           heading(last_pose_.yaw + da) * 0.4);
      }
    }
    pending_bump_ = false;
  }
  last_pose_ = pose;
  if (cooldown_ > 0) --cooldown_;
  plan_from(pose);

  std::optional<Action> action;
  auto sighting = cooldown_ == 0 ? find_target(obs) : std::nullopt;
  last_sighting_.reset();
  int failures = 0;
  if (sighting) {
    for (const auto& [p, count] : failed_collects_) {
      if (norm(p - sighting->world) < 0.5) failures = std::max(failures, count);
    }
    if (failures >= params_.max_collect_failures) sighting.reset();
  }
  if (sighting) {
    last_sighting_ = sighting->world;
    const double collect_distance =
        params_.collect_distance - params_.retry_shrink * failures;
    const double half = obs.seg.width / 2.0;
    const double offset =
        (sighting->mean_column - (obs.seg.width - 1) / 2.0) / half;
    const Action toward = offset < 0.0 ? Action::kTurnLeft : Action::kTurnRight;
    if (sighting->nearest <= collect_distance) {
      action = std::abs(offset) <= params_.collect_center_fraction
                   ? Action::kCollect
                   : toward;
    } else if (std::abs(offset) > 0.6 && failures == 0) {
      action = toward;
    } else {
      const Vec2 goal = sighting->world;
      const double reach = collect_distance - 0.4;
      action = follow_best(pose, [&](int x, int y) {
        return norm(grid_.center_of(x, y) - goal) <= reach;
      });
    }
  }
  if (!action) action = frontier_action(pose);
  if (!action) action = static_cast<Action>(uniform_int(rng_, 0, 2));

  auto is_turn = [](Action a) {
    return a == Action::kTurnLeft || a == Action::kTurnRight;
  };
  if (is_turn(*action) && history_.size() >= 3) {
    const std::size_t n = history_.size();
    const bool alternating = history_[n - 1] != *action &&
                             history_[n - 2] == *action &&
                             history_[n - 3] != *action &&
                             is_turn(history_[n - 1]) && is_turn(history_[n - 3]);
    const bool dithering =
        n >= 8 && std::all_of(history_.end() - 8, history_.end(), is_turn) &&
        std::count(history_.end() - 8, history_.end(), Action::kTurnLeft) % 8 != 0;
    if (dithering && goal_) {
      blacklist_.push_back(*goal_);
      goal_.reset();
      goal_steps_ = 0;
    }
    if (alternating || dithering) {
      cooldown_ = params_.failed_collect_cooldown;
      const auto ahead = grid_.cell_of(pose.position + heading(pose.yaw) * 0.5);
      action = (ahead && !grid_.occupied(ahead->first, ahead->second))
                   ? Action::kMoveForward
                   : static_cast<Action>(uniform_int(rng_, 1, 2));
    }
  }
  history_.push_back(*action);
  if (history_.size() > 8) history_.erase(history_.begin());
  last_action_ = *action;
  return *action;
}

void FrontierPolicy::feedback(bool collided, std::size_t n_collected) {
  if (!last_action_) return;
  if (collided && *last_action_ == Action::kMoveForward) {
    pending_bump_ = true;
    cooldown_ = std::max(cooldown_, 2);
  }
  if (*last_action_ == Action::kCollect && n_collected == 0 && last_sighting_) {
    auto it = std::find_if(failed_collects_.begin(), failed_collects_.end(),
                           [&](const auto& f) {
                             return norm(f.first - *last_sighting_) < 0.5;
                           });
    if (it == failed_collects_.end()) {
      failed_collects_.emplace_back(*last_sighting_, 1);
    } else {
      ++it->second;
    }
  }
}

std::unique_ptr<AgentPolicy> make_policy(std::string_view name,
                                         std::uint64_t seed) {
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  if (name == "frontier") return std::make_unique<FrontierPolicy>(seed);
  throw Error("unknown policy '" + std::string(name) + "'");
}

}  // namespace tesse
