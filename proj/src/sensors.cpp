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

#include "tesse/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tesse/error.hpp"

namespace tesse {
namespace {

void overlay_hits(std::span<const Obstacle> overlays, Vec2 origin, Vec2 dir,
                  double max_t, std::vector<RayHit>& out) {
  for (const Obstacle& o : overlays) {
    const std::size_t n = o.polygon.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto t = ray_segment_intersection(origin, dir, o.polygon[k],
                                              o.polygon[(k + 1) % n]);
      if (t && *t <= max_t) out.push_back({*t, o.cls, o.instance_id, o.base, o.height});
    }
  }
}

}  // namespace

double CameraIntrinsics::focal_px() const {
  return 0.5 * (width - 1) / std::tan(deg2rad(hfov_deg) / 2.0);
}

double CameraIntrinsics::column_tan(int c) const {
  return (0.5 * (width - 1) - c) / focal_px();
}

double CameraIntrinsics::row_tan(int r) const {
  return (0.5 * (height - 1) - r) / focal_px();
}

Rgb shade(SemanticClass c, double z) {
  const Rgb base = class_color(c);
  const double k = 1.0 / (1.0 + z / 10.0);
  auto s = [k](std::uint8_t v) {
    return static_cast<std::uint8_t>(std::lround(v * k));
  };
  return {s(base.r), s(base.g), s(base.b)};
}

Frames render_frames(const SceneGeometry& scene, const Pose2& pose,
                     const CameraIntrinsics& cam,
                     std::span<const Obstacle> overlays) {
  const int W = cam.width;
  const int H = cam.height;
  Frames f{ColorImage(W, H), DepthImage(W, H), SegImage(W, H), InstImage(W, H)};
  f.depth.max_range = static_cast<float>(cam.max_range);

  const Vec2 forward = heading(pose.yaw);
  const Vec2 left{-forward.y, forward.x};
  const double max_z = cam.max_range;
  const double h = cam.camera_height;
  const double up = kCeilingHeight - h;

  std::vector<double> row_tan(static_cast<std::size_t>(H));
  for (int r = 0; r < H; ++r) row_tan[r] = cam.row_tan(r);

  std::vector<RayHit> hits;
  for (int c = 0; c < W; ++c) {
    const Vec2 dir = forward + left * cam.column_tan(c);
    scene.all_hits(pose.position, dir, max_z, hits);
    if (!overlays.empty()) {
      overlay_hits(overlays, pose.position, dir, max_z, hits);
      std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
        return a.t != b.t ? a.t < b.t : a.instance < b.instance;
      });
    }
    for (int r = 0; r < H; ++r) {
      const double tr = row_tan[r];
      // Distance at which this row meets the floor or ceiling plane.
      double z_plane = max_z;
      SemanticClass plane = SemanticClass::kFloor;
      if (tr < 0.0) {
        z_plane = h / -tr;
      } else if (tr > 0.0) {
        z_plane = up / tr;
        plane = SemanticClass::kCeiling;
      }
      z_plane = std::min(z_plane, max_z);

      double z = z_plane;
      SemanticClass cls = plane;
      std::uint16_t inst = 0;
      for (const RayHit& hit : hits) {
        if (hit.t >= z_plane) break;
        const double e = h + hit.t * tr;
        if (e >= hit.base && e <= hit.top) {
          z = hit.t;
          cls = hit.cls;
          inst = static_cast<std::uint16_t>(hit.instance);
          break;
        }
      }
      f.depth.at(c, r) = static_cast<float>(z);
      f.seg.at(c, r) = class_id(cls);
      f.inst.at(c, r) = inst;
      f.color.at(c, r) = shade(cls, z);
    }
  }
  return f;
}

LidarScan lidar_scan(const SceneGeometry& scene, const Pose2& pose,
                     int n_beams, double max_range, double slice_height) {
  LidarScan scan;
  scan.angles.reserve(static_cast<std::size_t>(n_beams));
  scan.ranges.reserve(static_cast<std::size_t>(n_beams));
  for (int i = 0; i < n_beams; ++i) {
    const double a = wrap_angle(pose.yaw + 2.0 * std::numbers::pi * i / n_beams);
    const auto hit = raycast(scene, pose.position, heading(a), max_range, slice_height);
    scan.angles.push_back(a);
    scan.ranges.push_back(hit ? hit->t : max_range);
  }
  return scan;
}

double mean_iou(const SegImage& predicted, const SegImage& truth, int n_classes) {
  if (predicted.width != truth.width || predicted.height != truth.height) {
    throw Error("mean_iou: image dimensions differ");
  }
  std::vector<std::size_t> inter(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::size_t> uni(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    const int p = predicted.data[i];
    const int t = truth.data[i];
    if (p >= n_classes || t >= n_classes) throw Error("mean_iou: class id out of range");
    if (p == t) {
      ++inter[p];
      ++uni[p];
    } else {
      ++uni[p];
      ++uni[t];
    }
  }
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < n_classes; ++k) {
    if (uni[k] == 0) continue;
    sum += static_cast<double>(inter[k]) / static_cast<double>(uni[k]);
    ++present;
  }
  return present == 0 ? 1.0 : sum / present;
}

}  // namespace tesse
