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

#include "tesse/scene_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tesse {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool hit_less(const RayHit& a, const RayHit& b) {
  if (a.t != b.t) return a.t < b.t;
  return a.instance < b.instance;
}

void edge_contact(Vec2 p0, Vec2 m, double r, Vec2 a, Vec2 b,
                  std::optional<SweepContact>& best) {
  auto offer = [&](double t, Vec2 n) {
    if (!best || t < best->fraction) best = SweepContact{t, n};
  };
  const Vec2 ab = b - a;
  const double len = norm(ab);
  if (len > 0.0) {
    const Vec2 u = ab / len;
    Vec2 nrm{-u.y, u.x};
    double s0 = dot(p0 - a, nrm);
    if (s0 < 0.0) {
      nrm = nrm * -1.0;
      s0 = -s0;
    }
    const double ds = dot(m, nrm);
    const double s1 = s0 + ds;
    if (s0 >= r && s1 < r) {
      const double t = (s0 - r) / (s0 - s1);
      const double along = dot(p0 + m * t - a, u);
      if (along >= 0.0 && along <= len) offer(t, nrm * -1.0);
    } else if (s0 < r && ds < 0.0) {
      const double along = dot(p0 - a, u);
      if (along >= 0.0 && along <= len) offer(0.0, nrm * -1.0);
    }
  }
  for (const Vec2 e : {a, b}) {
    const Vec2 f = p0 - e;
    const double qa = dot(m, m);
    const double qb = 2.0 * dot(f, m);
    const double qc = dot(f, f) - r * r;
    if (qc < 0.0) {
      if (qb < 0.0) offer(0.0, (e - p0) / std::max(norm(e - p0), 1e-12));
      continue;
    }
    if (qa <= 0.0) continue;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
    if (t >= 0.0 && t <= 1.0) {
      const Vec2 q = p0 + m * t;
      offer(t, (e - q) / r);
    }
  }
}

}  // namespace

SceneGeometry::SceneGeometry(WorldMap world, AgentFootprint agent,
                             double cell_size)
    : world_(std::move(world)), agent_(agent), cell_(cell_size) {
  const Rect& b = world_.bounds;
  origin_ = {b.min.x - cell_, b.min.y - cell_};
  nx_ = static_cast<int>(std::ceil(b.width() / cell_)) + 2;
  ny_ = static_cast<int>(std::ceil(b.height() / cell_)) + 2;
  nx_ = std::max(nx_, 1);
  ny_ = std::max(ny_, 1);
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::uint32_t i = 0; i < world_.obstacles.size(); ++i) {
    for_cells_in(bounding_box(world_.obstacles[i].polygon),
                 [&](std::size_t c) { cells_[c].push_back(i); });
  }
  const Polygon corners = rect_polygon(b);
  for (std::size_t i = 0; i < 4; ++i) {
    bound_edges_.push_back({corners[i], corners[(i + 1) % 4]});
  }
}

template <typename Fn>
void SceneGeometry::for_cells_in(const Rect& box, Fn&& fn) const {
  const int x0 = std::clamp(static_cast<int>(std::floor((box.min.x - origin_.x) / cell_)), 0, nx_ - 1);
  const int x1 = std::clamp(static_cast<int>(std::floor((box.max.x - origin_.x) / cell_)), 0, nx_ - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor((box.min.y - origin_.y) / cell_)), 0, ny_ - 1);
  const int y1 = std::clamp(static_cast<int>(std::floor((box.max.y - origin_.y) / cell_)), 0, ny_ - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) fn(static_cast<std::size_t>(y) * nx_ + x);
  }
}

template <typename Fn>
void SceneGeometry::traverse(Vec2 origin, Vec2 dir, double max_t,
                             Fn&& visit_cell) const {
  // Clip the ray to the grid box.
  const Vec2 lo = origin_;
  const Vec2 hi{origin_.x + nx_ * cell_, origin_.y + ny_ * cell_};
  double t0 = 0.0;
  double t1 = max_t;
  for (int axis = 0; axis < 2; ++axis) {
    const double o = axis == 0 ? origin.x : origin.y;
    const double d = axis == 0 ? dir.x : dir.y;
    const double l = axis == 0 ? lo.x : lo.y;
    const double h = axis == 0 ? hi.x : hi.y;
    if (d == 0.0) {
      if (o < l || o > h) return;
      continue;
    }
    double ta = (l - o) / d;
    double tb = (h - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return;

  const Vec2 p = origin + dir * t0;
  int ix = std::clamp(static_cast<int>(std::floor((p.x - lo.x) / cell_)), 0, nx_ - 1);
  int iy = std::clamp(static_cast<int>(std::floor((p.y - lo.y) / cell_)), 0, ny_ - 1);
  const int step_x = dir.x > 0.0 ? 1 : -1;
  const int step_y = dir.y > 0.0 ? 1 : -1;
  double t_max_x = kInf;
  double t_max_y = kInf;
  double t_dx = kInf;
  double t_dy = kInf;
  if (dir.x != 0.0) {
    const double bx = lo.x + (ix + (step_x > 0 ? 1 : 0)) * cell_;
    t_max_x = (bx - origin.x) / dir.x;
    t_dx = cell_ / std::abs(dir.x);
  }
  if (dir.y != 0.0) {
    const double by = lo.y + (iy + (step_y > 0 ? 1 : 0)) * cell_;
    t_max_y = (by - origin.y) / dir.y;
    t_dy = cell_ / std::abs(dir.y);
  }
  for (;;) {
    const double t_exit = std::min(t_max_x, t_max_y);
    if (!visit_cell(static_cast<std::size_t>(iy) * nx_ + ix, t_exit)) return;
    if (t_exit > t1) return;
    if (t_max_x < t_max_y) {
      ix += step_x;
      t_max_x += t_dx;
    } else {
      iy += step_y;
      t_max_y += t_dy;
    }
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return;
  }
}

std::optional<RayHit> SceneGeometry::first_hit(Vec2 origin, Vec2 dir,
                                               double max_t,
                                               double slice_height) const {
  std::optional<RayHit> best;
  traverse(origin, dir, max_t, [&](std::size_t cell, double t_exit) {
    for (std::uint32_t idx : cells_[cell]) {
      const Obstacle& o = world_.obstacles[idx];
      if (slice_height < o.base || slice_height > o.height) continue;
      const std::size_t n = o.polygon.size();
      for (std::size_t k = 0; k < n; ++k) {
        const auto t = ray_segment_intersection(origin, dir, o.polygon[k],
                                                o.polygon[(k + 1) % n]);
        if (!t || *t > max_t) continue;
        const RayHit h{*t, o.cls, o.instance_id, o.base, o.height};
        if (!best || hit_less(h, *best)) best = h;
      }
    }
    return !(best && best->t <= t_exit);
  });
  return best;
}

void SceneGeometry::all_hits(Vec2 origin, Vec2 dir, double max_t,
                             std::vector<RayHit>& out) const {
  out.clear();
  std::vector<std::uint32_t> seen;
  traverse(origin, dir, max_t, [&](std::size_t cell, double) {
    for (std::uint32_t idx : cells_[cell]) {
      if (std::find(seen.begin(), seen.end(), idx) != seen.end()) continue;
      seen.push_back(idx);
      const Obstacle& o = world_.obstacles[idx];
      const std::size_t n = o.polygon.size();
      for (std::size_t k = 0; k < n; ++k) {
        const auto t = ray_segment_intersection(origin, dir, o.polygon[k],
                                                o.polygon[(k + 1) % n]);
        if (!t || *t > max_t) continue;
        out.push_back({*t, o.cls, o.instance_id, o.base, o.height});
      }
    }
    return true;
  });
  std::sort(out.begin(), out.end(), hit_less);
}

bool SceneGeometry::disc_collides(Vec2 center, double radius) const {
  const Rect& b = world_.bounds;
  if (center.x - radius < b.min.x || center.x + radius > b.max.x ||
      center.y - radius < b.min.y || center.y + radius > b.max.y) {
    return true;
  }
  bool hit = false;
  const Rect box{{center.x - radius, center.y - radius},
                 {center.x + radius, center.y + radius}};
  for_cells_in(box, [&](std::size_t cell) {
    if (hit) return;
    for (std::uint32_t idx : cells_[cell]) {
      const Obstacle& o = world_.obstacles[idx];
      if (!blocks_motion(o, agent_)) continue;
      if (disc_intersects_polygon(center, radius, o.polygon)) {
        hit = true;
        return;
      }
    }
  });
  return hit;
}

double SceneGeometry::clearance(Vec2 p) const {
  double best = kInf;
  for (const Segment& s : bound_edges_) {
    best = std::min(best, point_segment_distance(p, s.a, s.b));
  }
  for (const Obstacle& o : world_.obstacles) {
    if (!blocks_motion(o, agent_)) continue;
    if (point_in_polygon(p, o.polygon)) return 0.0;
    best = std::min(best, point_polygon_boundary_distance(p, o.polygon));
  }
  return best;
}

std::optional<SweepContact> SceneGeometry::sweep_disc(Vec2 start, Vec2 motion,
                                                      double radius) const {
  std::optional<SweepContact> best;
  for (const Segment& s : bound_edges_) edge_contact(start, motion, radius, s.a, s.b, best);
  const Vec2 end = start + motion;
  const Rect box{{std::min(start.x, end.x) - radius, std::min(start.y, end.y) - radius},
                 {std::max(start.x, end.x) + radius, std::max(start.y, end.y) + radius}};
  std::vector<std::uint32_t> seen;
  for_cells_in(box, [&](std::size_t cell) {
    for (std::uint32_t idx : cells_[cell]) {
      if (std::find(seen.begin(), seen.end(), idx) != seen.end()) continue;
      seen.push_back(idx);
      const Obstacle& o = world_.obstacles[idx];
      if (!blocks_motion(o, agent_)) continue;
      const std::size_t n = o.polygon.size();
      for (std::size_t k = 0; k < n; ++k) {
        edge_contact(start, motion, radius, o.polygon[k], o.polygon[(k + 1) % n], best);
      }
    }
  });
  return best;
}

}  // namespace tesse
