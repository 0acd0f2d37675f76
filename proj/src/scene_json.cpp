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

#include <cstdio>

#include <nlohmann/json.hpp>

#include "tesse/error.hpp"
#include "tesse/rng.hpp"
#include "tesse/world.hpp"

namespace tesse {
namespace {

using nlohmann::json;

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

json polygon_json(const Polygon& poly) {
  json a = json::array();
  for (const Vec2& p : poly) a.push_back(point_json(p));
  return a;
}

const json& require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "required field missing");
  return *it;
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "number is not finite");
  return v;
}

Vec2 read_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [x, y]");
  return {read_number(j[0], path + "/0"), read_number(j[1], path + "/1")};
}

Polygon read_polygon(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected array of points");
  if (j.size() < 3) throw SchemaError(path, "polygon needs at least 3 vertices");
  Polygon poly;
  for (std::size_t i = 0; i < j.size(); ++i) {
    poly.push_back(read_point(j[i], path + "/" + std::to_string(i)));
  }
  return poly;
}

const json& require_array(const json& obj, const std::string& key,
                          const std::string& path) {
  const json& a = require(obj, key, path);
  if (!a.is_array()) throw SchemaError(path + "/" + key, "expected array");
  return a;
}

}  // namespace

std::string scene_to_json(const WorldMap& world) {
  json j;
  j["scene_seed"] = world.scene_seed;
  j["bounds"] = {{"min", point_json(world.bounds.min)},
                 {"max", point_json(world.bounds.max)}};
  json rooms = json::array();
  for (const Room& r : world.rooms) {
    rooms.push_back({{"type", std::string(room_type_name(r.type))},
                     {"polygon", polygon_json(r.polygon)}});
  }
  j["rooms"] = std::move(rooms);
  json obstacles = json::array();
  for (const Obstacle& o : world.obstacles) {
    obstacles.push_back({{"class", class_id(o.cls)},
                         {"instance_id", o.instance_id},
                         {"height", o.height},
                         {"base", o.base},
                         {"polygon", polygon_json(o.polygon)}});
  }
  j["obstacles"] = std::move(obstacles);
  json spawns = json::array();
  for (const Vec2& p : world.spawn_points) spawns.push_back(point_json(p));
  j["spawn_points"] = std::move(spawns);
  return j.dump(1);
}

WorldMap scene_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("", "top level must be an object");

  WorldMap w;
  const json& seed = require(j, "scene_seed", "");
  if (!seed.is_number_integer()) throw SchemaError("/scene_seed", "expected integer");
  w.scene_seed = seed.get<std::uint64_t>();

  const json& bounds = require(j, "bounds", "");
  w.bounds.min = read_point(require(bounds, "min", "/bounds"), "/bounds/min");
  w.bounds.max = read_point(require(bounds, "max", "/bounds"), "/bounds/max");

  const json& rooms = require_array(j, "rooms", "");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string path = "/rooms/" + std::to_string(i);
    const json& type = require(rooms[i], "type", path);
    if (!type.is_string()) throw SchemaError(path + "/type", "expected string");
    const auto rt = room_type_from_name(type.get<std::string>());
    if (!rt) throw SchemaError(path + "/type", "unknown room type");
    w.rooms.push_back({read_polygon(require(rooms[i], "polygon", path), path + "/polygon"), *rt});
  }

  const json& obstacles = require_array(j, "obstacles", "");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string path = "/obstacles/" + std::to_string(i);
    const json& o = obstacles[i];
    Obstacle ob;
    const json& cls = require(o, "class", path);
    if (!cls.is_number_integer()) throw SchemaError(path + "/class", "expected integer class id");
    const auto c = class_from_id(cls.get<int>());
    if (!c) throw SchemaError(path + "/class", "class id out of range 0..10");
    ob.cls = *c;
    const json& inst = require(o, "instance_id", path);
    if (!inst.is_number_unsigned() || inst.get<std::uint64_t>() == 0 ||
        inst.get<std::uint64_t>() > 0xffff) {
      throw SchemaError(path + "/instance_id", "expected integer in 1..65535");
    }
    ob.instance_id = inst.get<std::uint32_t>();
    ob.height = read_number(require(o, "height", path), path + "/height");
    if (o.contains("base")) ob.base = read_number(o["base"], path + "/base");
    ob.polygon = read_polygon(require(o, "polygon", path), path + "/polygon");
    w.obstacles.push_back(std::move(ob));
  }

  const json& spawns = require_array(j, "spawn_points", "");
  for (std::size_t i = 0; i < spawns.size(); ++i) {
    w.spawn_points.push_back(read_point(spawns[i], "/spawn_points/" + std::to_string(i)));
  }
  return w;
}

std::string scene_digest(const WorldMap& world) {
  const std::string text = scene_to_json(world);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

}  // namespace tesse
