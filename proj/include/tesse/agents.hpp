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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tesse/session.hpp"

namespace tesse {

/// A navigation policy. act must be deterministic given the observation
/// history and the seed handed over by reset.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual std::string_view name() const = 0;
  virtual void reset(const ResetInfo& start) = 0;
  virtual Action act(const Observation& obs) = 0;
  /// Outcome of the last action as seen by the agent.
  virtual void feedback(bool /*collided*/, std::size_t /*n_collected*/) {}
  /// Modalities act() reads; empty means act() ignores the observation.
  virtual std::vector<Modality> modalities() const { return {}; }
};

/// Uniform over the four actions.
Action random_policy_act(Rng& rng);

class RandomPolicy : public AgentPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed = 0) : seed_(seed) {}
  std::string_view name() const override { return "random"; }
  void reset(const ResetInfo& start) override;
  Action act(const Observation& obs) override;

 private:
  std::uint64_t seed_;
  Rng rng_;
};

/// Always the same action; useful as a do-nothing baseline.
class ConstantPolicy : public AgentPolicy {
 public:
  explicit ConstantPolicy(Action a) : action_(a) {}
  std::string_view name() const override { return "constant"; }
  void reset(const ResetInfo&) override {}
  Action act(const Observation&) override { return action_; }

 private:
  Action action_;
};

struct FrontierParams {
  double cell = 0.25;
  int grid_cells = 256;            // square map centered on the spawn
  double max_fuse_range = 4.0;     // free space is only trusted this far
  double obstacle_min_elevation = 0.15;
  double obstacle_max_elevation = 1.5;
  double collect_distance = 1.8;
  double retry_shrink = 0.5;
  int max_collect_failures = 3;
  int min_target_pixels = 4;
  double collect_center_fraction = 0.3;  // of the image half-width
  double turn_threshold_deg = 12.0;
  double lookahead = 0.75;
  int failed_collect_cooldown = 4;
  int goal_patience = 40;  // steps before an unreached frontier is dropped
};

/// Occupancy grid with integer evidence; unknown until first observed.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec2 center, double cell, int n);

  bool in_bounds(int ix, int iy) const;
  std::optional<std::pair<int, int>> cell_of(Vec2 p) const;
  Vec2 center_of(int ix, int iy) const;
  bool known(int ix, int iy) const;
  bool occupied(int ix, int iy) const;
  bool free(int ix, int iy) const { return known(ix, iy) && !occupied(ix, iy); }
  void add_hit(Vec2 p, int weight = 2);
  /// With keep_hits, cells already believed occupied are left alone.
  void add_pass(Vec2 p, bool keep_hits = false);
  /// Permanent obstacle mark (bumped into something the depth missed).
  void mark_blocked(Vec2 p);
  int size() const { return n_; }
  double cell() const { return cell_; }

 private:
  Vec2 origin_;
  double cell_ = 0.25;
  int n_ = 0;
  std::vector<std::int8_t> evidence_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint8_t> blocked_;
};

/// Scripted explorer: fuses depth into an occupancy grid, walks toward the
/// nearest frontier and collects targets it sees in the segmentation.
class FrontierPolicy : public AgentPolicy {
 public:
  explicit FrontierPolicy(std::uint64_t seed = 0, FrontierParams params = {});
  std::string_view name() const override { return "frontier"; }
  void reset(const ResetInfo& start) override;
  Action act(const Observation& obs) override;
  void feedback(bool collided, std::size_t n_collected) override;
  std::vector<Modality> modalities() const override {
    return {Modality::kDepth, Modality::kSeg};
  }

  const OccupancyGrid& grid() const { return grid_; }
  /// Fuses one observation into the map.
  void integrate(const Observation& obs);

 private:
  struct TargetSighting {
    int pixels = 0;
    double mean_column = 0.0;
    double nearest = 0.0;  // horizontal distance of the closest target pixel
    Vec2 world;
  };
  std::optional<TargetSighting> find_target(const Observation& obs) const;
  Action steer_toward(Vec2 goal, const Pose2& pose);
  /// Shortest paths over known free cells from the agent's cell.
  void plan_from(const Pose2& pose);
  /// Steers along the planned path to the cheapest accepted cell, ties
  /// broken by bearing. nullopt when no accepted cell is reachable.
  template <typename Accept>
  std::optional<Action> follow_best(const Pose2& pose, Accept&& accept,
                                    std::pair<int, int>* chosen = nullptr);
  std::optional<Action> frontier_action(const Pose2& pose);

  std::uint64_t seed_;
  FrontierParams params_;
  CameraIntrinsics camera_;
  OccupancyGrid grid_;
  Rng rng_;
  Pose2 last_pose_;
  std::optional<Action> last_action_;
  std::vector<Action> history_;
  int cooldown_ = 0;
  std::optional<std::pair<int, int>> goal_;
  int goal_steps_ = 0;
  std::vector<std::pair<int, int>> blacklist_;
  std::vector<std::pair<Vec2, int>> failed_collects_;
  std::optional<Vec2> last_sighting_;
  bool pending_bump_ = false;
  std::vector<double> dist_;
  std::vector<std::int32_t> parent_;
};

std::unique_ptr<AgentPolicy> make_policy(std::string_view name,
                                         std::uint64_t seed);

}  // namespace tesse
