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
#include <string>
#include <string_view>
#include <vector>

#include "tesse/geometry.hpp"
#include "tesse/semantics.hpp"

namespace tesse {

/// An extruded polygonal obstacle. The solid occupies the polygon footprint
/// between elevations [base, height].
struct Obstacle {
  Polygon polygon;  // counter-clockwise, meters
  SemanticClass cls = SemanticClass::kClutter;
  std::uint32_t instance_id = 0;
  double height = 0.0;  // top elevation
  double base = 0.0;    // bottom elevation

  bool operator==(const Obstacle&) const = default;
};

struct Room {
  Polygon polygon;
  RoomType type = RoomType::kOffice;
  bool operator==(const Room&) const = default;
};

struct WorldMap {
  Rect bounds;
  std::vector<Room> rooms;
  std::vector<Obstacle> obstacles;
  std::vector<Vec2> spawn_points;
  std::uint64_t scene_seed = 0;

  bool operator==(const WorldMap&) const = default;
};

/// Agent footprint used for clearance checks. Obstacles whose base sits at
/// or above agent_height (door lintels) do not block motion.
struct AgentFootprint {
  double radius = 0.3;
  double height = 1.5;
};

inline bool blocks_motion(const Obstacle& o, const AgentFootprint& agent) {
  return o.base < agent.height;
}

struct GenerationParams {
  double width = 24.0;           // x extent
  double depth = 16.0;           // y extent
  double corridor_width = 2.0;   // central hallway spine
  double min_room_width = 3.0;
  double max_room_width = 5.5;
  int min_rooms = 6;
  int max_rooms = 12;
  double wall_thickness = 0.1;
  double door_width = 1.0;
  double clutter_density = 0.04;      // items per m^2 of room floor
  double office_storage_prob = 0.5;   // extra cabinet in an office
  double storage_shelf_fill = 0.7;    // fraction of wall run lined by shelves
  int spawn_points = 4;
  AgentFootprint agent;
};

/// Builds an office floor: a corridor spine with rooms budded off both sides.
/// Pure function of (seed, params). Throws GenerationError when the params
/// cannot fit the minimum room count.
WorldMap generate_scene(std::uint64_t seed, const GenerationParams& params = {});

/// Scenes 1 to 5 use the default params with scene_seed equal to the id.
/// Scenes 4 and 5 are the held-out evaluation scenes.
WorldMap canonical_scene(int scene_id);

enum class ViolationKind {
  kBounds,
  kRoomPolygon,
  kRoomOverlap,
  kObstaclePolygon,
  kObstacleClass,
  kObstacleHeight,
  kObstacleInstance,
  kObstacleOutsideRooms,
  kSpawnMissing,
  kSpawnCollision,
  kConnectivity,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  std::optional<std::size_t> index;  // room, obstacle or spawn index
};

/// Returns every broken WorldMap invariant; empty means valid. Connectivity
/// is checked by flood fill over a 0.1 m grid inflated by the agent radius.
std::vector<Violation> validate_scene(const WorldMap& world,
                                      const AgentFootprint& agent = {});

/// Occupancy grid over the bounds; a cell is blocked when a disc of the agent
/// radius centered on the cell center would overlap an obstacle or the bounds.
struct ClearanceGrid {
  Rect bounds;
  double cell = 0.1;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> blocked;

  Vec2 center(int ix, int iy) const {
    return {bounds.min.x + (ix + 0.5) * cell, bounds.min.y + (iy + 0.5) * cell};
  }
  bool is_blocked(int ix, int iy) const {
    return blocked[static_cast<std::size_t>(iy) * nx + ix] != 0;
  }
};

ClearanceGrid build_clearance_grid(const WorldMap& world,
                                   const AgentFootprint& agent, double cell);

/// True when a disc at p clears all motion-blocking obstacles and the bounds.
bool disc_is_free(const WorldMap& world, Vec2 p, const AgentFootprint& agent,
                  double extra_clearance = 0.0);

enum class MeshFormat { kPly, kObj };

/// Extrudes obstacles and emits floor/ceiling quads over the bounds, in the
/// simulation frame (x, y planar, z up). PLY is binary little-endian with
/// per-vertex color, class and instance; OBJ uses one group per instance and
/// one material per class.
std::string export_mesh(const WorldMap& world, MeshFormat format);
MeshFormat mesh_format_from_string(std::string_view s);

/// Material library matching the usemtl names written by the OBJ exporter.
std::string obj_material_library();

std::string scene_to_json(const WorldMap& world);
/// Throws SchemaError carrying the JSON pointer of the offending field.
WorldMap scene_from_json(std::string_view text);

/// Stable digest of the serialized scene (hex FNV-1a 64).
std::string scene_digest(const WorldMap& world);

}  // namespace tesse
