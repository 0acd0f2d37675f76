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

#include "tesse/geometry.hpp"

#include <algorithm>
#include <limits>

namespace tesse {
namespace {

constexpr double kEps = 1e-12;

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > kEps) return 1;
  if (v < -kEps) return -1;
  return 0;
}

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  return std::min(a.x, b.x) - kEps <= p.x && p.x <= std::max(a.x, b.x) + kEps &&
         std::min(a.y, b.y) - kEps <= p.y && p.y <= std::max(a.y, b.y) + kEps;
}

Vec2 interior_sample(std::span<const Vec2> poly) {
  // Centroid of the first ear is always strictly inside a simple polygon.
  const auto tris = triangulate(poly);
  if (tris.empty()) return poly.front();
  const auto& t = tris.front();
  return (poly[t[0]] + poly[t[1]] + poly[t[2]]) / 3.0;
}

bool any_sample_inside(std::span<const Vec2> a, std::span<const Vec2> b) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = a[i];
    const Vec2 mid = (a[i] + a[(i + 1) % n]) / 2.0;
    if (point_strictly_inside(p, b) || point_strictly_inside(mid, b)) {
      return true;
    }
  }
  return point_strictly_inside(interior_sample(a), b);
}

}  // namespace

Polygon rect_polygon(const Rect& r) {
  return {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
}

double signed_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * acc;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

bool segments_cross_properly(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(poly[(i + 1) % n] - poly[i]) < kEps) return false;
  }
  if (std::abs(signed_area(poly)) < kEps) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = poly[i];
    const Vec2 a2 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if (point_segment_distance(p, a, b) <= 1e-9) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_strictly_inside(Vec2 p, std::span<const Vec2> poly, double eps) {
  return point_in_polygon(p, poly) &&
         point_polygon_boundary_distance(p, poly) > eps;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + ab * t));
}

double point_polygon_boundary_distance(Vec2 p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  }
  return best;
}

bool disc_intersects_polygon(Vec2 center, double radius,
                             std::span<const Vec2> poly) {
  if (point_in_polygon(center, poly)) return true;
  return point_polygon_boundary_distance(center, poly) < radius;
}

std::optional<double> ray_segment_intersection(Vec2 origin, Vec2 dir, Vec2 a,
                                               Vec2 b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < kEps) return std::nullopt;  // parallel
  const Vec2 ao = a - origin;
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::vector<std::array<std::size_t, 3>> triangulate(std::span<const Vec2> poly) {
  std::vector<std::array<std::size_t, 3>> out;
  const std::size_t n = poly.size();
  if (n < 3) return out;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (signed_area(poly) < 0.0) std::reverse(idx.begin(), idx.end());

  auto is_ear = [&](std::size_t k) {
    const std::size_t m = idx.size();
    const Vec2 a = poly[idx[(k + m - 1) % m]];
    const Vec2 b = poly[idx[k]];
    const Vec2 c = poly[idx[(k + 1) % m]];
    if (cross(b - a, c - b) <= kEps) return false;  // reflex or degenerate
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k || j == (k + 1) % m || j == (k + m - 1) % m) continue;
      const Vec2 p = poly[idx[j]];
      if (cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 &&
          cross(a - c, p - c) >= 0.0) {
        return false;
      }
    }
    return true;
  };

  std::size_t guard = 0;
  while (idx.size() > 3 && guard < n * n) {
    ++guard;
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (!is_ear(k)) continue;
      const std::size_t m = idx.size();
      out.push_back({idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) break;
  }
  if (idx.size() == 3) out.push_back({idx[0], idx[1], idx[2]});
  return out;
}

bool polygon_interiors_overlap(std::span<const Vec2> a,
                               std::span<const Vec2> b) {
  const Rect ba = bounding_box(a);
  const Rect bb = bounding_box(b);
  if (ba.max.x <= bb.min.x || bb.max.x <= ba.min.x || ba.max.y <= bb.min.y ||
      bb.max.y <= ba.min.y) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_cross_properly(a[i], a[(i + 1) % a.size()], b[j],
                                  b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return any_sample_inside(a, b) || any_sample_inside(b, a);
}

Rect bounding_box(std::span<const Vec2> poly) {
  Rect r{{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()}};
  for (const Vec2& p : poly) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

}  // namespace tesse
