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
#include <vector>

#include "tesse/geometry.hpp"
#include "tesse/world.hpp"

namespace tesse {

struct RayHit {
  double t = 0.0;  // ray parameter; Euclidean distance when dir is a unit vector
  SemanticClass cls = SemanticClass::kWall;
  std::uint32_t instance = 0;
  double base = 0.0;
  double top = 0.0;
};

/// First contact of a moving disc with the scene.
struct SweepContact {
  double fraction = 1.0;  // of the motion vector, in [0, 1]
  Vec2 normal;            // unit, pointing from the disc into the obstacle
};

/// Immutable uniform-grid index over a WorldMap's obstacles, shared by the
/// sensors (raycasts) and the physics (disc sweeps). Safe for concurrent reads.
class SceneGeometry {
 public:
  explicit SceneGeometry(WorldMap world, AgentFootprint agent = {},
                         double cell_size = 1.0);

  const WorldMap& world() const { return world_; }
  const AgentFootprint& agent() const { return agent_; }

  /// Nearest hit along origin + t * dir for t in [0, max_t] against obstacles
  /// whose band contains slice_height. Ties go to the lowest instance id.
  std::optional<RayHit> first_hit(Vec2 origin, Vec2 dir, double max_t,
                                  double slice_height) const;

  /// Every obstacle edge crossing along the ray for t in [0, max_t], sorted by
  /// (t, instance). Each obstacle edge contributes at most once.
  void all_hits(Vec2 origin, Vec2 dir, double max_t,
                std::vector<RayHit>& out) const;

  /// True when a disc of the given radius overlaps a motion-blocking obstacle
  /// or leaves the bounds.
  bool disc_collides(Vec2 center, double radius) const;

  /// Distance from p to the nearest motion-blocking obstacle edge or bound.
  double clearance(Vec2 p) const;

  /// Earliest contact of a disc swept from start along motion, if any.
  std::optional<SweepContact> sweep_disc(Vec2 start, Vec2 motion,
                                         double radius) const;

 private:
  template <typename Fn>
  void for_cells_in(const Rect& box, Fn&& fn) const;
  template <typename Fn>
  void traverse(Vec2 origin, Vec2 dir, double max_t, Fn&& visit_cell) const;

  WorldMap world_;
  AgentFootprint agent_;
  double cell_ = 1.0;
  Vec2 origin_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;  // obstacle indices
  std::vector<Segment> bound_edges_;
};

/// Raycast at a horizontal slice; direction must be a unit vector so the
/// returned t is the Euclidean distance.
inline std::optional<RayHit> raycast(const SceneGeometry& scene, Vec2 origin,
                                     Vec2 direction, double max_range,
                                     double slice_height) {
  return scene.first_hit(origin, direction, max_range, slice_height);
}

}  // namespace tesse
