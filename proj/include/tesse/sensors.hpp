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
#include "tesse/scene_geometry.hpp"
#include "tesse/semantics.hpp"

namespace tesse {

struct CameraIntrinsics {
  int width = 160;
  int height = 120;
  double hfov_deg = 80.0;
  double max_range = 20.0;
  double camera_height = 1.2;

  /// Focal length in pixels. Column 0 and column width-1 sit exactly at
  /// +hfov/2 and -hfov/2 (left edge is the agent's left).
  double focal_px() const;
  /// Tangent of the horizontal angle of column c (positive = left).
  double column_tan(int c) const;
  /// Tangent of the vertical angle of row r (positive = up).
  double row_tan(int r) const;
};

template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;  // row-major

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}
  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Image&) const = default;
};

/// z-depth in meters; no-hit pixels hold max_range.
struct DepthImage : Image<float> {
  using Image<float>::Image;
  float max_range = 20.0f;
};
using SegImage = Image<std::uint8_t>;
using InstImage = Image<std::uint16_t>;
using ColorImage = Image<Rgb>;

struct Pose2 {
  Vec2 position;
  double yaw = 0.0;
  bool operator==(const Pose2&) const = default;
};

struct Frames {
  ColorImage color;
  DepthImage depth;
  SegImage seg;
  InstImage inst;
};

/// Column raycast renderer over the extruded scene. Each row of a column takes
/// the first surface (in depth order) whose height band contains the row's
/// elevation at that depth; otherwise floor below the horizon, ceiling above.
/// overlays are extra renderable prisms (targets) that never block motion.
Frames render_frames(const SceneGeometry& scene, const Pose2& pose,
                     const CameraIntrinsics& intrinsics,
                     std::span<const Obstacle> overlays = {});

struct LidarScan {
  std::vector<double> angles;  // world frame, starting at the agent yaw
  std::vector<double> ranges;  // Euclidean, capped at max_range
};

LidarScan lidar_scan(const SceneGeometry& scene, const Pose2& pose,
                     int n_beams = 360, double max_range = 20.0,
                     double slice_height = 1.2);

/// Mean over classes present in either image of |pred & truth| / |pred | truth|.
/// Throws Error on size mismatch. Returns 1 for two empty images.
double mean_iou(const SegImage& predicted, const SegImage& truth,
                int n_classes = kNumClasses);

/// Color for a class shaded by distance: palette * 1 / (1 + z / 10).
Rgb shade(SemanticClass c, double z);

}  // namespace tesse
