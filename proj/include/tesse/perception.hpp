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
#include <span>
#include <vector>

#include "tesse/rng.hpp"
#include "tesse/sensors.hpp"

namespace tesse {

/// Perception-track noise model. The default seg_flip_rate is the calibrated
/// operating point (mIoU ~0.81 against ground truth at patch rate 0.3).
struct NoiseConfig {
  double seg_flip_rate = 0.33;
  int seg_boundary_width = 2;
  double seg_patch_rate = 0.3;
  double depth_focal_baseline = 32.0;  // m * px
  double depth_disparity_sigma = 0.5;  // px
  double depth_dropout_rate = 0.02;
  double vio_sigma_trans = 0.01;  // m per m traveled
  double vio_sigma_rot = 0.005;   // rad per rad turned
  std::uint64_t seed = 0;

  /// Throws Error naming the first field out of range.
  void validate() const;
};

/// (a) boundary pixels flip to a neighboring class with seg_flip_rate;
/// (b) with seg_patch_rate one 8-16 px square is relabeled to a confusable
/// class. Random draws do not depend on the rates, so outputs for different
/// rates share their randomness.
SegImage corrupt_segmentation(const SegImage& seg, const NoiseConfig& cfg,
                              Rng& rng);

/// Class a patch centered on `cls` is relabeled to.
SemanticClass confusable_class(SemanticClass cls, Rng& rng);

/// Mean per-frame mIoU of corrupted frames against themselves, using per-frame
/// streams derived from cfg.seed.
double measure_seg_miou(std::span<const SegImage> frames, const NoiseConfig& cfg);

/// Bisects seg_flip_rate (patch rate held) until the mean mIoU over the
/// samples is within tolerance of the target. Throws CalibrationError when the
/// target is outside the range reachable with flip rates in [0, 1].
NoiseConfig calibrate_seg_noise(double target_miou,
                                std::span<const SegImage> sample_frames,
                                const NoiseConfig& cfg_template,
                                double tolerance = 0.01);

/// Renders per_scene segmentation frames from uniformly drawn collision-free
/// poses in each generated scene.
std::vector<SegImage> sample_seg_frames(std::span<const std::uint64_t> scene_seeds,
                                        int per_scene, std::uint64_t seed,
                                        const CameraIntrinsics& camera = {});

/// Stereo-style corruption: disparity quantization plus Gaussian disparity
/// noise, with dropout to max_range that is 10x likelier at class boundaries.
DepthImage corrupt_depth(const DepthImage& depth, const SegImage& seg,
                         const NoiseConfig& cfg, Rng& rng);

struct PoseEstimate {
  Vec2 position;
  double yaw = 0.0;
  bool is_estimate = true;
};

/// Rigid motion expressed in the frame of the starting pose.
struct PoseDelta {
  Vec2 translation;
  double rotation = 0.0;
};

PoseDelta relative_motion(const Pose2& from, const Pose2& to);
PoseEstimate compose(const PoseEstimate& pose, const PoseDelta& delta);

/// Random-walk odometry drift: translation noise sigma scales with distance
/// moved, rotation noise with angle turned. Drift is never corrected.
PoseEstimate vio_update(const PoseEstimate& prev, const PoseDelta& true_delta,
                        const NoiseConfig& cfg, Rng& rng);

/// Owns the running estimate for one episode.
class VioEstimator {
 public:
  VioEstimator() = default;
  VioEstimator(const Pose2& spawn, const NoiseConfig& cfg, std::uint64_t seed);

  /// Feeds the new ground-truth pose; returns the updated estimate.
  const PoseEstimate& update(const Pose2& truth);
  const PoseEstimate& estimate() const { return estimate_; }

 private:
  NoiseConfig cfg_;
  Rng rng_;
  Pose2 last_truth_;
  PoseEstimate estimate_;
};

}  // namespace tesse
