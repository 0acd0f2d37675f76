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
#include <sstream>

#include "tesse/error.hpp"
#include "tesse/rng.hpp"
#include "tesse/world.hpp"

namespace tesse {
namespace {

constexpr double kMinExtent = 10.0;
constexpr double kMinRoomDepth = 3.0;
constexpr double kDoorKeepOut = 1.2;  // furniture-free radius around doors
constexpr double kFurnitureGap = 0.05;

struct Cell {
  Rect rect;  // room rectangle; walls are centered on its edges
  RoomType type = RoomType::kOffice;
  bool below = true;  // below the spine (y < corridor) or above
  std::vector<Vec2> doors;
};

class Builder {
 public:
  Builder(std::uint64_t seed, const GenerationParams& p)
      : p_(p), rng_(derive_seed(seed, 0x5ce9e)) {
    world_.scene_seed = seed;
    world_.bounds = {{0.0, 0.0}, {p.width, p.depth}};
  }

  WorldMap build() {
    check_feasible();
    layout_rooms();
    build_walls();
    for (std::size_t i = 0; i < cells_.size(); ++i) furnish(i);
    place_spawn_points();
    repair_connectivity();
    return std::move(world_);
  }

 private:
  void check_feasible() const {
    if (p_.width < kMinExtent || p_.depth < kMinExtent) {
      std::ostringstream os;
      os << "floor extents " << p_.width << " m x " << p_.depth
         << " m below the " << kMinExtent << " m x " << kMinExtent
         << " m minimum";
      throw GenerationError(os.str());
    }
    if (p_.min_room_width <= p_.door_width + 1.0 ||
        p_.max_room_width < p_.min_room_width) {
      throw GenerationError("room width range cannot hold a door");
    }
    if (p_.min_rooms < 1 || p_.max_rooms < p_.min_rooms) {
      throw GenerationError("room-count range is empty");
    }
    const double room_depth = (p_.depth - p_.corridor_width) / 2.0;
    if (room_depth < kMinRoomDepth) {
      throw GenerationError("room depth below 3 m minimum after corridor");
    }
    const int per_side = static_cast<int>(std::floor(p_.width / p_.min_room_width));
    if (2 * per_side < p_.min_rooms) {
      std::ostringstream os;
      os << "min_rooms " << p_.min_rooms << " exceeds capacity "
         << 2 * per_side << " of the floor extents";
      throw GenerationError(os.str());
    }
    const int min_per_side =
        static_cast<int>(std::ceil(p_.width / p_.max_room_width - 1e-9));
    if (2 * min_per_side > p_.max_rooms) {
      throw GenerationError("max_rooms too small to tile the floor width");
    }
  }

  RoomType draw_room_type() {
    const double u = uniform01(rng_);
    if (u < 0.50) return RoomType::kOffice;
    if (u < 0.65) return RoomType::kConference;
    if (u < 0.80) return RoomType::kStorage;
    if (u < 0.90) return RoomType::kBathroom;
    return RoomType::kHallway;
  }

  std::vector<double> split_width(int n) {
    const double w = p_.width;
    std::vector<double> widths(n, w / n);
    // Jitter pairwise so the total is preserved and widths stay in range.
    for (int i = 0; i + 1 < n; ++i) {
      const double lo = std::max(p_.min_room_width - widths[i],
                                 widths[i + 1] - p_.max_room_width);
      const double hi = std::min(p_.max_room_width - widths[i],
                                 widths[i + 1] - p_.min_room_width);
      if (hi > lo) {
        const double d = uniform(rng_, lo, hi) * 0.6;
        widths[i] += d;
        widths[i + 1] -= d;
      }
    }
    return widths;
  }

  void layout_rooms() {
    const int max_side = static_cast<int>(std::floor(p_.width / p_.min_room_width));
    const int min_side =
        static_cast<int>(std::ceil(p_.width / p_.max_room_width - 1e-9));
    const int lo = std::max(min_side, (p_.min_rooms + 1) / 2);
    const int hi = std::min(max_side, p_.max_rooms / 2);
    const int n_below = uniform_int(rng_, std::min(lo, hi), std::max(lo, hi));
    const int n_above = std::clamp(
        uniform_int(rng_, std::min(lo, hi), std::max(lo, hi)), min_side,
        std::max(min_side, p_.max_rooms - n_below));

    const double y0 = 0.0;
    const double yc0 = (p_.depth - p_.corridor_width) / 2.0;
    const double yc1 = yc0 + p_.corridor_width;
    const double y1 = p_.depth;
    spine_ = {{0.0, yc0}, {p_.width, yc1}};

    for (int side = 0; side < 2; ++side) {
      const int n = side == 0 ? n_below : n_above;
      const auto widths = split_width(n);
      double x = 0.0;
      for (int i = 0; i < n; ++i) {
        Cell c;
        const double x_end = (i + 1 == n) ? p_.width : x + widths[i];
        c.rect = side == 0 ? Rect{{x, y0}, {x_end, yc0}}
                           : Rect{{x, yc1}, {x_end, y1}};
        c.below = side == 0;
        c.type = draw_room_type();
        cells_.push_back(c);
        x = x_end;
      }
    }
    // Targets need offices; guarantee at least two.
    int offices = 0;
    for (const auto& c : cells_) offices += c.type == RoomType::kOffice;
    for (std::size_t i = 0; offices < 2 && i < cells_.size(); i += 2) {
      if (cells_[i].type != RoomType::kOffice) {
        cells_[i].type = RoomType::kOffice;
        ++offices;
      }
    }

    world_.rooms.push_back({rect_polygon(spine_), RoomType::kHallway});
    for (const auto& c : cells_) world_.rooms.push_back({rect_polygon(c.rect), c.type});
  }

  std::uint32_t add(const Rect& r, SemanticClass cls) {
    const HeightBand band = default_band(cls);
    Obstacle o;
    o.polygon = rect_polygon(r);
    o.cls = cls;
    o.instance_id = next_instance_++;
    o.height = band.top;
    o.base = band.base;
    world_.obstacles.push_back(std::move(o));
    return world_.obstacles.back().instance_id;
  }

  // Horizontal wall along y from x0 to x1 with door gaps centered at gaps.
  void horizontal_wall(double y, double x0, double x1, std::vector<double> gaps) {
    const double h = p_.wall_thickness / 2.0;
    std::sort(gaps.begin(), gaps.end());
    double x = x0;
    for (double g : gaps) {
      const double g0 = g - p_.door_width / 2.0;
      const double g1 = g + p_.door_width / 2.0;
      if (g0 > x) add({{x, y - h}, {g0, y + h}}, SemanticClass::kWall);
      add({{g0, y - h}, {g1, y + h}}, SemanticClass::kDoor);
      x = g1;
    }
    if (x1 > x) add({{x, y - h}, {x1, y + h}}, SemanticClass::kWall);
  }

  void vertical_wall(double x, double y0, double y1, std::vector<double> gaps) {
    const double h = p_.wall_thickness / 2.0;
    std::sort(gaps.begin(), gaps.end());
    double y = y0;
    for (double g : gaps) {
      const double g0 = g - p_.door_width / 2.0;
      const double g1 = g + p_.door_width / 2.0;
      if (g0 > y) add({{x - h, y}, {x + h, g0}}, SemanticClass::kWall);
      add({{x - h, g0}, {x + h, g1}}, SemanticClass::kDoor);
      y = g1;
    }
    if (y1 > y) add({{x - h, y}, {x + h, y1}}, SemanticClass::kWall);
  }

  void build_walls() {
    const double t = p_.wall_thickness;
    const double W = p_.width;
    const double D = p_.depth;
    // Outer shell, inside the bounds.
    add({{0.0, 0.0}, {W, t}}, SemanticClass::kWall);
    add({{0.0, D - t}, {W, D}}, SemanticClass::kWall);
    add({{0.0, t}, {t, D - t}}, SemanticClass::kWall);
    add({{W - t, t}, {W, D - t}}, SemanticClass::kWall);

    const double margin = 0.5 + p_.door_width / 2.0 + t;
    std::vector<double> gaps_below;
    std::vector<double> gaps_above;
    for (auto& c : cells_) {
      const double gx = uniform(rng_, c.rect.min.x + margin, c.rect.max.x - margin);
      const double y = c.below ? c.rect.max.y : c.rect.min.y;
      c.doors.push_back({gx, y});
      (c.below ? gaps_below : gaps_above).push_back(gx);
    }
    horizontal_wall(spine_.min.y, t, W - t, gaps_below);
    horizontal_wall(spine_.max.y, t, W - t, gaps_above);

    // Partition walls; a side hallway also opens into its neighbors.
    for (std::size_t i = 0; i + 1 < cells_.size(); ++i) {
      Cell& a = cells_[i];
      Cell& b = cells_[i + 1];
      if (a.below != b.below) continue;
      const double x = a.rect.max.x;
      const double y0 = a.below ? t : a.rect.min.y;
      const double y1 = a.below ? a.rect.max.y : D - t;
      std::vector<double> gaps;
      if (a.type == RoomType::kHallway || b.type == RoomType::kHallway) {
        const double m = 0.5 + p_.door_width / 2.0 + t;
        const double gy = uniform(rng_, a.rect.min.y + m, a.rect.max.y - m);
        gaps.push_back(gy);
        a.doors.push_back({x, gy});
        b.doors.push_back({x, gy});
      }
      vertical_wall(x, y0, y1, gaps);
    }
  }

  // Usable interior of a room, clear of the walls.
  Rect interior(const Cell& c) const {
    const double h = p_.wall_thickness / 2.0 + 0.02;
    const double outer = p_.wall_thickness + 0.02;
    Rect r = c.rect;
    r.min.x += (r.min.x <= 0.0 ? outer : h);
    r.max.x -= (r.max.x >= p_.width ? outer : h);
    if (c.below) {
      r.min.y += outer;
      r.max.y -= h;
    } else {
      r.min.y += h;
      r.max.y -= outer;
    }
    return r;
  }

  bool fits(const Cell& c, const Rect& r) const {
    const Rect in = interior(c);
    if (r.min.x < in.min.x || r.min.y < in.min.y || r.max.x > in.max.x ||
        r.max.y > in.max.y) {
      return false;
    }
    for (const Vec2& d : c.doors) {
      const double dx = std::max({r.min.x - d.x, 0.0, d.x - r.max.x});
      const double dy = std::max({r.min.y - d.y, 0.0, d.y - r.max.y});
      if (std::hypot(dx, dy) < kDoorKeepOut) return false;
    }
    for (const Rect& o : placed_) {
      if (r.min.x < o.max.x + kFurnitureGap && o.min.x < r.max.x + kFurnitureGap &&
          r.min.y < o.max.y + kFurnitureGap && o.min.y < r.max.y + kFurnitureGap) {
        return false;
      }
    }
    return true;
  }

  bool try_add(const Cell& c, const Rect& r, SemanticClass cls) {
    if (!fits(c, r)) return false;
    placed_.push_back(r);
    add(r, cls);
    return true;
  }

  // Rect of size (w, d) against the wall far from the spine, at x offset.
  Rect against_back(const Cell& c, double x, double w, double d) const {
    const Rect in = interior(c);
    return c.below ? Rect{{x, in.min.y}, {x + w, in.min.y + d}}
                   : Rect{{x, in.max.y - d}, {x + w, in.max.y}};
  }

  void furnish_office(const Cell& c) {
    const Rect in = interior(c);
    const double dw = 1.2;
    const double dd = 0.6;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const double x = uniform(rng_, in.min.x, std::max(in.min.x, in.max.x - dw));
      const Rect desk = against_back(c, x, dw, dd);
      if (!fits(c, desk)) continue;
      placed_.push_back(desk);
      add(desk, SemanticClass::kTable);
      // Monitor on the desk, toward the wall.
      const double mx = desk.min.x + (dw - 0.5) / 2.0;
      const Rect mon = c.below ? Rect{{mx, desk.min.y + 0.05}, {mx + 0.5, desk.min.y + 0.2}}
                               : Rect{{mx, desk.max.y - 0.2}, {mx + 0.5, desk.max.y - 0.05}};
      add(mon, SemanticClass::kMonitor);
      const double cx = desk.min.x + (dw - 0.5) / 2.0;
      const Rect chair = c.below ? Rect{{cx, desk.max.y + 0.1}, {cx + 0.5, desk.max.y + 0.6}}
                                 : Rect{{cx, desk.min.y - 0.6}, {cx + 0.5, desk.min.y - 0.1}};
      try_add(c, chair, SemanticClass::kChair);
      break;
    }
    if (uniform01(rng_) < p_.office_storage_prob) {
      const bool left = uniform01(rng_) < 0.5;
      const double x = left ? in.min.x : in.max.x - 0.5;
      try_add(c, against_back(c, x, 0.5, 0.5), SemanticClass::kStorage);
    }
  }

  void furnish_conference(const Cell& c) {
    const Rect in = interior(c);
    const double clear = 1.3;  // walkway + chair band on each side
    const double tw = in.width() - 2.0 * clear;
    const double td = in.height() - 2.0 * clear;
    if (tw < 0.8 || td < 0.8) return;
    const Vec2 mid = (in.min + in.max) / 2.0;
    const Rect table{{mid.x - tw / 2.0, mid.y - td / 2.0},
                     {mid.x + tw / 2.0, mid.y + td / 2.0}};
    if (!try_add(c, table, SemanticClass::kTable)) return;
    for (double x = table.min.x + 0.15; x + 0.45 <= table.max.x; x += 0.9) {
      try_add(c, {{x, table.min.y - 0.55}, {x + 0.45, table.min.y - 0.1}},
              SemanticClass::kChair);
      try_add(c, {{x, table.max.y + 0.1}, {x + 0.45, table.max.y + 0.55}},
              SemanticClass::kChair);
    }
  }

  void furnish_storage(const Cell& c) {
    const Rect in = interior(c);
    const double run = in.width() * p_.storage_shelf_fill;
    for (double x = in.min.x; x + 0.8 <= in.min.x + run; x += 0.9) {
      try_add(c, against_back(c, x, 0.8, 0.5), SemanticClass::kStorage);
    }
    // Side shelves along the left wall.
    for (double y = in.min.y + 0.6; y + 0.8 <= in.max.y - 0.6; y += 0.9) {
      try_add(c, {{in.min.x, y}, {in.min.x + 0.5, y + 0.8}}, SemanticClass::kStorage);
    }
  }

  void furnish_bathroom(const Cell& c) {
    const Rect in = interior(c);
    for (double x = in.min.x + 0.2; x + 0.5 <= in.max.x - 0.2; x += 1.0) {
      try_add(c, against_back(c, x, 0.5, 0.4), SemanticClass::kClutter);
    }
  }

  void furnish_hallway(const Cell& c) {
    const Rect in = interior(c);
    if (uniform01(rng_) < 0.5 && in.width() > 2.4) {
      const double x = uniform(rng_, in.min.x, in.max.x - 1.6);
      try_add(c, against_back(c, x, 1.6, 0.7), SemanticClass::kCouch);
    }
  }

  void scatter_clutter(const Cell& c) {
    const Rect in = interior(c);
    const int n = static_cast<int>(std::floor(in.area() * p_.clutter_density +
                                              uniform01(rng_)));
    for (int i = 0; i < n; ++i) {
      for (int attempt = 0; attempt < 10; ++attempt) {
        const double s = uniform(rng_, 0.25, 0.45);
        const double x = uniform(rng_, in.min.x, in.max.x - s);
        const double y = uniform(rng_, in.min.y, in.max.y - s);
        // Keep clutter against a wall so room centers stay open.
        const bool near_wall = x - in.min.x < 0.3 || in.max.x - (x + s) < 0.3 ||
                               y - in.min.y < 0.3 || in.max.y - (y + s) < 0.3;
        if (!near_wall) continue;
        if (try_add(c, {{x, y}, {x + s, y + s}}, SemanticClass::kClutter)) break;
      }
    }
  }

  void furnish(std::size_t i) {
    const Cell& c = cells_[i];
    room_first_obstacle_.push_back(world_.obstacles.size());
    switch (c.type) {
      case RoomType::kOffice:
        furnish_office(c);
        break;
      case RoomType::kConference:
        furnish_conference(c);
        break;
      case RoomType::kStorage:
        furnish_storage(c);
        break;
      case RoomType::kBathroom:
        furnish_bathroom(c);
        break;
      case RoomType::kHallway:
        furnish_hallway(c);
        break;
    }
    if (c.type != RoomType::kStorage) scatter_clutter(c);
  }

  void place_spawn_points() {
    const int n = std::max(1, p_.spawn_points);
    const double y = (spine_.min.y + spine_.max.y) / 2.0;
    for (int i = 0; i < n; ++i) {
      const double x = p_.width * (i + 0.5) / n;
      if (disc_is_free(world_, {x, y}, p_.agent, 0.05)) {
        world_.spawn_points.push_back({x, y});
      }
    }
    if (world_.spawn_points.empty()) {
      throw GenerationError("no collision-free spawn point in the corridor");
    }
  }

  // Furniture can close off a room; drop pieces, newest first, until every
  // room is reachable again.
  void repair_connectivity() {
    const std::size_t first_furniture =
        room_first_obstacle_.empty() ? world_.obstacles.size()
                                     : room_first_obstacle_.front();
    for (;;) {
      const auto violations = validate_scene(world_, p_.agent);
      if (violations.empty()) return;
      bool only_connectivity = true;
      for (const auto& v : violations) {
        only_connectivity &= v.kind == ViolationKind::kConnectivity;
      }
      if (!only_connectivity || world_.obstacles.size() <= first_furniture) {
        throw GenerationError("generated scene invalid: " +
                              violations.front().message);
      }
      world_.obstacles.pop_back();
    }
  }

  GenerationParams p_;
  Rng rng_;
  WorldMap world_;
  Rect spine_;
  std::vector<Cell> cells_;
  std::vector<Rect> placed_;
  std::vector<std::size_t> room_first_obstacle_;
  std::uint32_t next_instance_ = 1;
};

}  // namespace

WorldMap generate_scene(std::uint64_t seed, const GenerationParams& params) {
  return Builder(seed, params).build();
}

WorldMap canonical_scene(int scene_id) {
  if (scene_id < 1 || scene_id > 5) {
    throw GenerationError("canonical scene ids are 1..5, got " +
                          std::to_string(scene_id));
  }
  return generate_scene(static_cast<std::uint64_t>(scene_id));
}

}  // namespace tesse
