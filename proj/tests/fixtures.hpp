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

#include <memory>

#include "tesse/scene_geometry.hpp"
#include "tesse/world.hpp"

namespace tesse::testing {

inline Obstacle box(double x0, double y0, double x1, double y1,
                    SemanticClass cls, std::uint32_t id, double top = 2.5,
                    double base = 0.0) {
  return {rect_polygon({{x0, y0}, {x1, y1}}), cls, id, top, base};
}

/// One office over the given bounds with no obstacles.
inline WorldMap open_room(double w, double h, Vec2 spawn) {
  WorldMap m;
  m.bounds = {{0.0, 0.0}, {w, h}};
  m.rooms.push_back({rect_polygon(m.bounds), RoomType::kOffice});
  m.spawn_points.push_back(spawn);
  return m;
}

/// Bounds far larger than any test ray, no obstacles.
inline WorldMap unbounded_world() {
  return open_room(2000.0, 2000.0, {1000.0, 1000.0});
}

inline std::shared_ptr<const SceneGeometry> geometry(WorldMap w) {
  return std::make_shared<const SceneGeometry>(std::move(w));
}

}  // namespace tesse::testing
