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

#include "tesse/perception.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tesse/error.hpp"
#include "tesse/scene_geometry.hpp"
#include "tesse/world.hpp"

namespace tesse {
namespace {

constexpr int kPatchMin = 8;
constexpr int kPatchMax = 16;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Class of the nearest differing pixel within Chebyshev radius w, scanning
// rings outward in a fixed order; -1 when the neighborhood is uniform.
int neighbor_class(const SegImage& seg, int x, int y, int w) {
  const std::uint8_t self = seg.at(x, y);
  for (int ring = 1; ring <= w; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      const int yy = y + dy;
      if (yy < 0 || yy >= seg.height) continue;
      const bool edge_row = dy == -ring || dy == ring;
      for (int dx = -ring; dx <= ring; dx += edge_row ? 1 : 2 * ring) {
        const int xx = x + dx;
        if (xx < 0 || xx >= seg.width) continue;
        const std::uint8_t c = seg.at(xx, yy);
        if (c != self) return c;
      }
    }
  }
  return -1;
}

}  // namespace

void NoiseConfig::validate() const {
  auto fail = [](const char* field) {
    throw Error(std::string("noise config: ") + field + " out of range");
  };
  if (!is_probability(seg_flip_rate)) fail("seg_flip_rate");
  if (!is_probability(seg_patch_rate)) fail("seg_patch_rate");
  if (!is_probability(depth_dropout_rate)) fail("depth_dropout_rate");
  if (seg_boundary_width < 0) fail("seg_boundary_width");
  if (!(depth_focal_baseline > 0.0)) fail("depth_focal_baseline");
  if (!(depth_disparity_sigma >= 0.0)) fail("depth_disparity_sigma");
  if (!(vio_sigma_trans >= 0.0)) fail("vio_sigma_trans");
  if (!(vio_sigma_rot >= 0.0)) fail("vio_sigma_rot");
}

SemanticClass confusable_class(SemanticClass cls, Rng& rng) {
  // Drawn unconditionally so stream consumption is class-independent.
  static constexpr SemanticClass kAny[] = {
      SemanticClass::kWall,  SemanticClass::kMonitor, SemanticClass::kDoor,
      SemanticClass::kTable, SemanticClass::kChair,   SemanticClass::kStorage,
      SemanticClass::kCouch, SemanticClass::kTarget};
  const SemanticClass any = kAny[uniform_int(rng, 0, std::size(kAny) - 1)];
  switch (cls) {
    case SemanticClass::kTable:
      return SemanticClass::kStorage;
    case SemanticClass::kStorage:
      return SemanticClass::kTable;
    case SemanticClass::kChair:
      return SemanticClass::kCouch;
    case SemanticClass::kCouch:
      return SemanticClass::kChair;
    case SemanticClass::kWall:
      return SemanticClass::kDoor;
    case SemanticClass::kDoor:
      return SemanticClass::kWall;
    case SemanticClass::kClutter:
      return any;
    default:
      return SemanticClass::kClutter;
  }
}

SegImage corrupt_segmentation(const SegImage& seg, const NoiseConfig& cfg,
                              Rng& rng) {
  Rng flip_rng(rng());
  Rng patch_rng(rng());
  SegImage out = seg;

  if (cfg.seg_boundary_width > 0) {
    for (int y = 0; y < seg.height; ++y) {
      for (int x = 0; x < seg.width; ++x) {
        const int other = neighbor_class(seg, x, y, cfg.seg_boundary_width);
        if (other < 0) continue;
        if (uniform01(flip_rng) < cfg.seg_flip_rate) {
          out.at(x, y) = static_cast<std::uint8_t>(other);
        }
      }
    }
  }

  const double u = uniform01(patch_rng);
  const int size = uniform_int(patch_rng, kPatchMin, kPatchMax);
  const int px = uniform_int(patch_rng, 0, std::max(0, seg.width - 1));
  const int py = uniform_int(patch_rng, 0, std::max(0, seg.height - 1));
  const SemanticClass center =
      class_from_id(seg.data.empty() ? 0 : seg.at(px, py)).value_or(SemanticClass::kClutter);
  const SemanticClass relabel = confusable_class(center, patch_rng);
  if (u < cfg.seg_patch_rate && !seg.data.empty()) {
    const int x0 = std::max(0, px - size / 2);
    const int y0 = std::max(0, py - size / 2);
    const int x1 = std::min(seg.width, x0 + size);
    const int y1 = std::min(seg.height, y0 + size);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) out.at(x, y) = class_id(relabel);
    }
  }
  return out;
}

double measure_seg_miou(std::span<const SegImage> frames, const NoiseConfig& cfg) {
  if (frames.empty()) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Rng rng(derive_seed(cfg.seed, 0x5e6, i));
    sum += mean_iou(corrupt_segmentation(frames[i], cfg, rng), frames[i]);
  }
  return sum / static_cast<double>(frames.size());
}

NoiseConfig calibrate_seg_noise(double target_miou,
                                std::span<const SegImage> sample_frames,
                                const NoiseConfig& cfg_template,
                                double tolerance) {
  NoiseConfig cfg = cfg_template;
  if (target_miou >= 1.0) {
    cfg.seg_flip_rate = 0.0;
    cfg.seg_patch_rate = 0.0;
    return cfg;
  }
  if (!(target_miou > 0.0)) throw CalibrationError("target mIoU must be in (0, 1]");
  if (sample_frames.empty()) throw CalibrationError("no sample frames");

  auto at = [&](double rate) {
    cfg.seg_flip_rate = rate;
    return measure_seg_miou(sample_frames, cfg);
  };
  const double best = at(0.0);
  const double worst = at(1.0);
  if (target_miou > best || target_miou < worst) {
    std::ostringstream os;
    os << "target mIoU " << target_miou << " unreachable; achievable range ["
       << worst << ", " << best << "] at patch rate " << cfg.seg_patch_rate;
    throw CalibrationError(os.str());
  }
  // mIoU is non-increasing in the flip rate.
  double lo = 0.0;
  double hi = 1.0;
  double rate = 0.0;
  double m = best;
  for (int it = 0; it < 40 && std::abs(m - target_miou) > tolerance / 10.0; ++it) {
    rate = 0.5 * (lo + hi);
    m = at(rate);
    if (m > target_miou) {
      lo = rate;
    } else {
      hi = rate;
    }
  }
  cfg.seg_flip_rate = rate;
  return cfg;
}

std::vector<SegImage> sample_seg_frames(std::span<const std::uint64_t> scene_seeds,
                                        int per_scene, std::uint64_t seed,
                                        const CameraIntrinsics& camera) {
  std::vector<SegImage> out;
  for (std::uint64_t scene_seed : scene_seeds) {
    const SceneGeometry scene(generate_scene(scene_seed));
    const Rect b = scene.world().bounds;
    Rng rng(derive_seed(seed, scene_seed));
    int made = 0;
    for (int tries = 0; made < per_scene; ++tries) {
      if (tries > 1000 * per_scene) throw Error("no free pose for frame sampling");
      const Vec2 p{uniform(rng, b.min.x, b.max.x), uniform(rng, b.min.y, b.max.y)};
      const double yaw = uniform(rng, -std::numbers::pi, std::numbers::pi);
      if (scene.disc_collides(p, scene.agent().radius)) continue;
      out.push_back(render_frames(scene, Pose2{p, yaw}, camera).seg);
      ++made;
    }
  }
  return out;
}

DepthImage corrupt_depth(const DepthImage& depth, const SegImage& seg,
                         const NoiseConfig& cfg, Rng& rng) {
  if (depth.width != seg.width || depth.height != seg.height) {
    throw Error("corrupt_depth: depth and segmentation sizes differ");
  }
  DepthImage out = depth;
  const double fb = cfg.depth_focal_baseline;
  const double max_range = depth.max_range;
  const double edge_rate = std::min(1.0, 10.0 * cfg.depth_dropout_rate);
  const double sigma = cfg.depth_disparity_sigma;
  std::normal_distribution<double> disparity_noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double z = depth.at(x, y);
      const double d =
          std::round(fb / z) + (sigma > 0.0 ? disparity_noise(rng) : 0.0);
      double zn = fb / std::max(d, 0.5);
      zn = std::min(zn, max_range);
      const bool edge = neighbor_class(seg, x, y, 1) >= 0;
      const double u = unit(rng);
      if (u < (edge ? edge_rate : cfg.depth_dropout_rate)) zn = max_range;
      out.at(x, y) = static_cast<float>(zn);
    }
  }
  return out;
}

PoseDelta relative_motion(const Pose2& from, const Pose2& to) {
  return {rotate(to.position - from.position, -from.yaw),
          wrap_angle(to.yaw - from.yaw)};
}

PoseEstimate compose(const PoseEstimate& pose, const PoseDelta& delta) {
  return {pose.position + rotate(delta.translation, pose.yaw),
          wrap_angle(pose.yaw + delta.rotation), pose.is_estimate};
}

PoseEstimate vio_update(const PoseEstimate& prev, const PoseDelta& true_delta,
                        const NoiseConfig& cfg, Rng& rng) {
  const double dist = norm(true_delta.translation);
  const double sigma_t = cfg.vio_sigma_trans * dist;
  const double sigma_r = cfg.vio_sigma_rot * std::abs(true_delta.rotation);
  PoseDelta noisy = true_delta;
  noisy.translation.x += gaussian(rng, sigma_t);
  noisy.translation.y += gaussian(rng, sigma_t);
  noisy.rotation += gaussian(rng, sigma_r);
  PoseEstimate out = compose(prev, noisy);
  out.is_estimate = true;
  return out;
}

VioEstimator::VioEstimator(const Pose2& spawn, const NoiseConfig& cfg,
                           std::uint64_t seed)
    : cfg_(cfg),
      rng_(seed),
      last_truth_(spawn),
      estimate_{spawn.position, spawn.yaw, true} {}

const PoseEstimate& VioEstimator::update(const Pose2& truth) {
  estimate_ = vio_update(estimate_, relative_motion(last_truth_, truth), cfg_, rng_);
  last_truth_ = truth;
  return estimate_;
}

}  // namespace tesse
