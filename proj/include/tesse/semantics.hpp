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
#include <cstdint>
#include <optional>
#include <string_view>

namespace tesse {

/// Semantic classes shared by the scene, the renderer and the task. The
/// numeric ids are part of the wire format and the scene schema.
enum class SemanticClass : std::uint8_t {
  kFloor = 0,
  kCeiling = 1,
  kWall = 2,
  kMonitor = 3,
  kDoor = 4,
  kTable = 5,
  kChair = 6,
  kStorage = 7,
  kCouch = 8,
  kClutter = 9,
  kTarget = 10,
};

inline constexpr int kNumClasses = 11;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  constexpr bool operator==(const Rgb&) const = default;
};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "floor", "ceiling", "wall",    "monitor", "door",  "table",
    "chair", "storage", "couch",   "clutter", "target"};

inline constexpr std::array<Rgb, kNumClasses> kClassPalette = {{
    {128, 128, 128},  // floor
    {224, 224, 224},  // ceiling
    {70, 130, 180},   // wall
    {20, 20, 60},     // monitor
    {160, 82, 45},    // door
    {205, 133, 63},   // table
    {220, 20, 60},    // chair
    {85, 107, 47},    // storage
    {148, 0, 211},    // couch
    {255, 215, 0},    // clutter
    {0, 255, 0},      // target
}};

constexpr std::uint8_t class_id(SemanticClass c) {
  return static_cast<std::uint8_t>(c);
}
constexpr std::string_view class_name(SemanticClass c) {
  return kClassNames[class_id(c)];
}
constexpr Rgb class_color(SemanticClass c) { return kClassPalette[class_id(c)]; }

constexpr std::optional<SemanticClass> class_from_id(int id) {
  if (id < 0 || id >= kNumClasses) return std::nullopt;
  return static_cast<SemanticClass>(id);
}

/// Default extrusion band (base, top) in meters for an obstacle class.
struct HeightBand {
  double base = 0.0;
  double top = 0.0;
};

inline constexpr double kCeilingHeight = 2.5;

constexpr HeightBand default_band(SemanticClass c) {
  switch (c) {
    case SemanticClass::kWall:
      return {0.0, 2.5};
    case SemanticClass::kDoor:
      return {2.1, 2.5};  // lintel over a 1 m opening
    case SemanticClass::kStorage:
      return {0.0, 2.0};
    case SemanticClass::kTable:
      return {0.0, 0.75};
    case SemanticClass::kChair:
    case SemanticClass::kCouch:
      return {0.0, 0.9};
    case SemanticClass::kMonitor:
      return {0.75, 1.2};
    case SemanticClass::kClutter:
      return {0.0, 0.5};
    case SemanticClass::kTarget:
      return {0.0, 1.0};
    default:
      return {0.0, kCeilingHeight};
  }
}

enum class RoomType : std::uint8_t {
  kOffice = 0,
  kHallway = 1,
  kConference = 2,
  kStorage = 3,
  kBathroom = 4,
};

inline constexpr std::array<std::string_view, 5> kRoomTypeNames = {
    "office", "hallway", "conference", "storage", "bathroom"};

constexpr std::string_view room_type_name(RoomType t) {
  return kRoomTypeNames[static_cast<std::size_t>(t)];
}

constexpr std::optional<RoomType> room_type_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kRoomTypeNames.size(); ++i) {
    if (kRoomTypeNames[i] == s) return static_cast<RoomType>(i);
  }
  return std::nullopt;
}

}  // namespace tesse
