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

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "tesse/world.hpp"

namespace tesse {
namespace {

bool obstacle_class_allowed(SemanticClass c) {
  return c != SemanticClass::kFloor && c != SemanticClass::kCeiling &&
         c != SemanticClass::kTarget;
}

std::string room_label(const WorldMap& w, std::size_t i) {
  std::ostringstream os;
  os << "room " << i << " (" << room_type_name(w.rooms[i].type) << ")";
  return os.str();
}

}  // namespace

bool disc_is_free(const WorldMap& world, Vec2 p, const AgentFootprint& agent,
                  double extra_clearance) {
  const double r = agent.radius + extra_clearance;
  const Rect& b = world.bounds;
  if (p.x - r < b.min.x || p.x + r > b.max.x || p.y - r < b.min.y ||
      p.y + r > b.max.y) {
    return false;
  }
  for (const Obstacle& o : world.obstacles) {
    if (!blocks_motion(o, agent)) continue;
    if (disc_intersects_polygon(p, r, o.polygon)) return false;
  }
  return true;
}

ClearanceGrid build_clearance_grid(const WorldMap& world,
                                   const AgentFootprint& agent, double cell) {
  ClearanceGrid g;
  g.bounds = world.bounds;
  g.cell = cell;
  g.nx = std::max(1, static_cast<int>(std::ceil(world.bounds.width() / cell - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil(world.bounds.height() / cell - 1e-9)));
  g.blocked.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  const double r = agent.radius;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const Vec2 c = g.center(ix, iy);
      const Rect& b = world.bounds;
      if (c.x - r < b.min.x || c.x + r > b.max.x || c.y - r < b.min.y ||
          c.y + r > b.max.y) {
        g.blocked[static_cast<std::size_t>(iy) * g.nx + ix] = 1;
      }
    }
  }
  for (const Obstacle& o : world.obstacles) {
    if (!blocks_motion(o, agent)) continue;
    const Rect bb = bounding_box(o.polygon);
    const int x0 = std::max(0, static_cast<int>(std::floor((bb.min.x - r - g.bounds.min.x) / cell)));
    const int x1 = std::min(g.nx - 1, static_cast<int>(std::floor((bb.max.x + r - g.bounds.min.x) / cell)));
    const int y0 = std::max(0, static_cast<int>(std::floor((bb.min.y - r - g.bounds.min.y) / cell)));
    const int y1 = std::min(g.ny - 1, static_cast<int>(std::floor((bb.max.y + r - g.bounds.min.y) / cell)));
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        auto& cellv = g.blocked[static_cast<std::size_t>(iy) * g.nx + ix];
        if (cellv) continue;
        if (disc_intersects_polygon(g.center(ix, iy), r, o.polygon)) cellv = 1;
      }
    }
  }
  return g;
}

std::vector<Violation> validate_scene(const WorldMap& world,
                                      const AgentFootprint& agent) {
  std::vector<Violation> out;
  auto report = [&](ViolationKind k, std::string msg,
                    std::optional<std::size_t> idx = std::nullopt) {
    out.push_back({k, std::move(msg), idx});
  };

  const Rect& b = world.bounds;
  if (!(b.width() > 0.0 && b.height() > 0.0) || !std::isfinite(b.area())) {
    report(ViolationKind::kBounds, "bounds are empty or non-finite");
    return out;
  }

  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    if (!is_simple(world.rooms[i].polygon)) {
      report(ViolationKind::kRoomPolygon, room_label(world, i) + " polygon is not simple", i);
    }
  }
  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < world.rooms.size(); ++j) {
      if (world.rooms[i].polygon.size() < 3 || world.rooms[j].polygon.size() < 3) continue;
      if (polygon_interiors_overlap(world.rooms[i].polygon, world.rooms[j].polygon)) {
        report(ViolationKind::kRoomOverlap,
               room_label(world, i) + " overlaps " + room_label(world, j), i);
      }
    }
  }

  std::set<std::uint32_t> instances;
  for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
    const Obstacle& o = world.obstacles[i];
    const std::string label = "obstacle " + std::to_string(i) + " (instance " +
                              std::to_string(o.instance_id) + ")";
    if (!is_simple(o.polygon)) {
      report(ViolationKind::kObstaclePolygon, label + " polygon is not simple", i);
    }
    if (!obstacle_class_allowed(o.cls)) {
      report(ViolationKind::kObstacleClass,
             label + " has non-obstacle class " + std::string(class_name(o.cls)), i);
    }
    if (!(o.height > 0.0) || !(o.base >= 0.0) || !(o.base < o.height)) {
      report(ViolationKind::kObstacleHeight, label + " has invalid height band", i);
    }
    if (o.instance_id == 0 || !instances.insert(o.instance_id).second) {
      report(ViolationKind::kObstacleInstance, label + " instance id is zero or duplicated", i);
    }
    bool inside = !o.polygon.empty();
    for (const Vec2& v : o.polygon) {
      const bool in_any = std::any_of(world.rooms.begin(), world.rooms.end(),
                                      [&](const Room& r) { return point_in_polygon(v, r.polygon); });
      if (!in_any) {
        inside = false;
        break;
      }
    }
    if (!inside) {
      report(ViolationKind::kObstacleOutsideRooms, label + " lies outside every room", i);
    }
  }

  if (world.spawn_points.empty()) {
    report(ViolationKind::kSpawnMissing, "scene has no spawn points");
  }
  for (std::size_t i = 0; i < world.spawn_points.size(); ++i) {
    if (!disc_is_free(world, world.spawn_points[i], agent)) {
      report(ViolationKind::kSpawnCollision,
             "spawn point " + std::to_string(i) + " collides at agent radius", i);
    }
  }
  if (!out.empty()) return out;

  // Connectivity: flood fill on the inflated grid from each spawn point.
  const ClearanceGrid g = build_clearance_grid(world, agent, 0.1);
  auto cell_of = [&](Vec2 p) {
    const int ix = std::clamp(static_cast<int>((p.x - b.min.x) / g.cell), 0, g.nx - 1);
    const int iy = std::clamp(static_cast<int>((p.y - b.min.y) / g.cell), 0, g.ny - 1);
    return std::pair{ix, iy};
  };
  // A free spawn may fall in a blocked cell by discretization; use the
  // nearest free neighbor.
  auto seed_cell = [&](Vec2 p) -> std::optional<std::pair<int, int>> {
    const auto [cx, cy] = cell_of(p);
    std::optional<std::pair<int, int>> best;
    double best_d = 1e9;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = cx + dx;
        const int y = cy + dy;
        if (x < 0 || y < 0 || x >= g.nx || y >= g.ny || g.is_blocked(x, y)) continue;
        const double d = norm(g.center(x, y) - p);
        if (d < best_d) {
          best_d = d;
          best = std::pair{x, y};
        }
      }
    }
    return best;
  };

  std::vector<int> label(g.blocked.size(), -1);
  int next_label = 0;
  auto flood = [&](std::pair<int, int> start) {
    const int id = next_label++;
    std::deque<std::pair<int, int>> q{start};
    label[static_cast<std::size_t>(start.second) * g.nx + start.first] = id;
    while (!q.empty()) {
      const auto [x, y] = q.front();
      q.pop_front();
      constexpr int kDx[] = {1, -1, 0, 0};
      constexpr int kDy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k];
        const int ny = y + kDy[k];
        if (nx < 0 || ny < 0 || nx >= g.nx || ny >= g.ny) continue;
        const std::size_t idx = static_cast<std::size_t>(ny) * g.nx + nx;
        if (g.blocked[idx] || label[idx] >= 0) continue;
        label[idx] = id;
        q.emplace_back(nx, ny);
      }
    }
    return id;
  };

  std::vector<int> spawn_component;
  for (std::size_t i = 0; i < world.spawn_points.size(); ++i) {
    const auto s = seed_cell(world.spawn_points[i]);
    if (!s) {
      report(ViolationKind::kConnectivity,
             "spawn point " + std::to_string(i) + " has no free grid cell", i);
      spawn_component.push_back(-1);
      continue;
    }
    const std::size_t idx = static_cast<std::size_t>(s->second) * g.nx + s->first;
    spawn_component.push_back(label[idx] >= 0 ? label[idx] : flood(*s));
  }
  for (std::size_t i = 1; i < spawn_component.size(); ++i) {
    if (spawn_component[i] != spawn_component[0]) {
      report(ViolationKind::kConnectivity,
             "spawn point " + std::to_string(i) + " is not connected to spawn point 0", i);
    }
  }
  if (spawn_component.empty() || spawn_component[0] < 0) return out;

  const int main = spawn_component[0];
  for (std::size_t r = 0; r < world.rooms.size(); ++r) {
    const Rect bb = bounding_box(world.rooms[r].polygon);
    bool reached = false;
    const int x0 = std::max(0, static_cast<int>((bb.min.x - b.min.x) / g.cell));
    const int x1 = std::min(g.nx - 1, static_cast<int>((bb.max.x - b.min.x) / g.cell));
    const int y0 = std::max(0, static_cast<int>((bb.min.y - b.min.y) / g.cell));
    const int y1 = std::min(g.ny - 1, static_cast<int>((bb.max.y - b.min.y) / g.cell));
    for (int y = y0; y <= y1 && !reached; ++y) {
      for (int x = x0; x <= x1 && !reached; ++x) {
        if (label[static_cast<std::size_t>(y) * g.nx + x] != main) continue;
        reached = point_strictly_inside(g.center(x, y), world.rooms[r].polygon);
      }
    }
    if (!reached) {
      report(ViolationKind::kConnectivity,
             room_label(world, r) + " is unreachable from the spawn points", r);
    }
  }
  return out;
}

}  // namespace tesse
