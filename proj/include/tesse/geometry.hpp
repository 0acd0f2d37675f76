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

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace tesse {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 heading(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Axis-aligned rectangle; min is the lower-left corner.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return width() * height(); }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  bool operator==(const Rect&) const = default;
};

using Polygon = std::vector<Vec2>;

Polygon rect_polygon(const Rect& r);

/// Signed area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> poly);

/// True when no two non-adjacent edges touch and no edge is degenerate.
bool is_simple(std::span<const Vec2> poly);

/// Closed point-in-polygon test: boundary points count as inside.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// Strict interior test: boundary points (within eps) are outside.
bool point_strictly_inside(Vec2 p, std::span<const Vec2> poly,
                           double eps = 1e-9);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Distance from p to the polygon boundary (0 on the boundary).
double point_polygon_boundary_distance(Vec2 p, std::span<const Vec2> poly);

/// True when the disc (center, radius) overlaps the closed polygon region.
bool disc_intersects_polygon(Vec2 center, double radius,
                             std::span<const Vec2> poly);

/// Closed segment-segment intersection (touching counts).
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

/// True when the segments cross at a single point interior to both.
bool segments_cross_properly(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

/// Parametric ray hit: origin + t * dir meets segment [a, b]. Returns t >= 0.
/// dir need not be normalized; t is then in units of |dir|.
std::optional<double> ray_segment_intersection(Vec2 origin, Vec2 dir, Vec2 a,
                                               Vec2 b);

/// Ear-clipping triangulation of a simple polygon (either winding).
/// Returns index triples into poly, counter-clockwise.
std::vector<std::array<std::size_t, 3>> triangulate(std::span<const Vec2> poly);

/// True when the interiors of two simple polygons overlap with positive area.
bool polygon_interiors_overlap(std::span<const Vec2> a,
                               std::span<const Vec2> b);

Rect bounding_box(std::span<const Vec2> poly);

}  // namespace tesse
