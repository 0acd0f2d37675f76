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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "tesse/error.hpp"
#include "tesse/world.hpp"

namespace tesse {
namespace {

using testing::box;
using testing::open_room;

bool obstacle_in_room(const Obstacle& o, const Room& r) {
  Vec2 c;
  for (const Vec2& v : o.polygon) c += v;
  c = c / static_cast<double>(o.polygon.size());
  return point_in_polygon(c, r.polygon);
}

int count_in_room(const WorldMap& w, const Room& r, SemanticClass cls) {
  int n = 0;
  for (const Obstacle& o : w.obstacles) {
    if (o.cls == cls && obstacle_in_room(o, r)) ++n;
  }
  return n;
}

struct PlyVertex {
  float x, y, z;
  std::uint8_t r, g, b, cls;
  std::uint16_t instance;
};

struct PlyFile {
  std::vector<PlyVertex> vertices;
  std::vector<std::vector<std::int32_t>> faces;
};

// Minimal reader for the exact layout the exporter promises.
PlyFile parse_ply(const std::string& bytes) {
  const std::size_t end = bytes.find("end_header\n");
  if (end == std::string::npos) throw std::runtime_error("no header");
  std::istringstream hdr(bytes.substr(0, end));
  std::string line;
  std::size_t n_vertices = 0;
  std::size_t n_faces = 0;
  std::vector<std::string> props;
  while (std::getline(hdr, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format" ) {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") throw std::runtime_error(fmt);
    } else if (word == "element") {
      std::string what;
      std::size_t n;
      ls >> what >> n;
      (what == "vertex" ? n_vertices : n_faces) = n;
    } else if (word == "property") {
      props.push_back(line.substr(9));
    }
  }
  const std::vector<std::string> expected = {
      "float x",       "float y",         "float z",
      "uchar red",     "uchar green",     "uchar blue",
      "uchar class",   "ushort instance", "list uchar int vertex_indices"};
  if (props != expected) throw std::runtime_error("unexpected properties");

  PlyFile f;
  const char* p = bytes.data() + end + std::strlen("end_header\n");
  const char* stop = bytes.data() + bytes.size();
  for (std::size_t i = 0; i < n_vertices; ++i) {
    PlyVertex v;
    std::memcpy(&v.x, p, 4);
    std::memcpy(&v.y, p + 4, 4);
    std::memcpy(&v.z, p + 8, 4);
    v.r = static_cast<std::uint8_t>(p[12]);
    v.g = static_cast<std::uint8_t>(p[13]);
    v.b = static_cast<std::uint8_t>(p[14]);
    v.cls = static_cast<std::uint8_t>(p[15]);
    std::memcpy(&v.instance, p + 16, 2);
    p += 18;
    f.vertices.push_back(v);
  }
  for (std::size_t i = 0; i < n_faces; ++i) {
    const auto k = static_cast<std::uint8_t>(*p++);
    std::vector<std::int32_t> face(k);
    std::memcpy(face.data(), p, 4u * k);
    p += 4u * k;
    f.faces.push_back(std::move(face));
  }
  if (p != stop) throw std::runtime_error("trailing bytes");
  return f;
}

TEST(Worldgen, SameSeedSerializesIdentically) {
  EXPECT_EQ(scene_to_json(generate_scene(7)), scene_to_json(generate_scene(7)));
  EXPECT_NE(scene_digest(generate_scene(7)), scene_digest(generate_scene(8)));
}

TEST(Worldgen, OfficesAreFurnished) {
  const WorldMap w = generate_scene(7);
  int offices = 0;
  for (const Room& r : w.rooms) {
    if (r.type != RoomType::kOffice) continue;
    ++offices;
    EXPECT_GE(count_in_room(w, r, SemanticClass::kTable), 1);
    EXPECT_GE(count_in_room(w, r, SemanticClass::kChair), 1);
    EXPECT_GE(count_in_room(w, r, SemanticClass::kMonitor), 1);
  }
  EXPECT_GT(offices, 0);
}

TEST(Worldgen, StorageRoomsHoldStorage) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const WorldMap w = generate_scene(seed);
    for (const Room& r : w.rooms) {
      if (r.type == RoomType::kStorage) {
        EXPECT_GE(count_in_room(w, r, SemanticClass::kStorage), 1) << seed;
      }
    }
  }
}

TEST(Worldgen, DoorsSpanOpenings) {
  const WorldMap w = generate_scene(7);
  const AgentFootprint agent;
  int doors = 0;
  for (const Obstacle& o : w.obstacles) {
    if (o.cls != SemanticClass::kDoor) continue;
    ++doors;
    EXPECT_FALSE(blocks_motion(o, agent));
  }
  EXPECT_GE(doors, static_cast<int>(w.rooms.size()) - 1);
}

TEST(Worldgen, TinyFloorIsInfeasible) {
  GenerationParams p;
  p.width = 2.0;
  p.depth = 2.0;
  p.min_rooms = 5;
  EXPECT_THROW(generate_scene(7, p), GenerationError);
}

TEST(Worldgen, TooManyRoomsIsInfeasible) {
  GenerationParams p;
  p.min_rooms = 40;
  p.max_rooms = 40;
  try {
    generate_scene(7, p);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("min_rooms"), std::string::npos);
  }
}

TEST(Worldgen, CanonicalScenesUseTheirIdAsSeed) {
  for (int id = 1; id <= 5; ++id) {
    EXPECT_EQ(canonical_scene(id), generate_scene(static_cast<std::uint64_t>(id)));
  }
  EXPECT_THROW(canonical_scene(6), GenerationError);
}

class GeneratedScene : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GeneratedScene, SatisfiesEveryInvariant) {
  const WorldMap w = generate_scene(GetParam());
  const auto v = validate_scene(w);
  for (const auto& x : v) ADD_FAILURE() << x.message;
  EXPECT_GE(w.rooms.size(), 6u);
  EXPECT_FALSE(w.spawn_points.empty());
}

TEST_P(GeneratedScene, JsonRoundTrips) {
  const WorldMap w = generate_scene(GetParam());
  EXPECT_EQ(scene_from_json(scene_to_json(w)), w);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GeneratedScene,
                         ::testing::Range<std::uint64_t>(1, 41));

WorldMap walled_off_pair() {
  WorldMap w;
  w.bounds = {{0.0, 0.0}, {10.0, 5.0}};
  w.rooms.push_back({rect_polygon({{0.0, 0.0}, {5.0, 5.0}}), RoomType::kOffice});
  w.rooms.push_back({rect_polygon({{5.0, 0.0}, {10.0, 5.0}}), RoomType::kStorage});
  w.obstacles.push_back(box(4.9, 0.0, 5.1, 5.0, SemanticClass::kWall, 1));
  w.spawn_points.push_back({2.5, 2.5});
  return w;
}

TEST(ValidateScene, WalledOffRoomIsUnreachable) {
  const auto v = validate_scene(walled_off_pair());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kConnectivity);
  EXPECT_EQ(v[0].index, 1u);
  EXPECT_NE(v[0].message.find("room 1"), std::string::npos);
}

TEST(ValidateScene, DoorwayRestoresConnectivity) {
  WorldMap w = walled_off_pair();
  w.obstacles[0] = box(4.9, 0.0, 5.1, 2.0, SemanticClass::kWall, 1);
  w.obstacles.push_back(box(4.9, 3.0, 5.1, 5.0, SemanticClass::kWall, 2));
  EXPECT_TRUE(validate_scene(w).empty());
}

TEST(ValidateScene, OverlappingRooms) {
  WorldMap w = open_room(10.0, 10.0, {1.0, 1.0});
  w.rooms.push_back({rect_polygon({{4.0, 4.0}, {8.0, 8.0}}), RoomType::kHallway});
  const auto v = validate_scene(w);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, ViolationKind::kRoomOverlap);
}

TEST(ValidateScene, SharedEdgeIsNotOverlap) {
  for (const auto& v : validate_scene(walled_off_pair())) {
    EXPECT_NE(v.kind, ViolationKind::kRoomOverlap);
  }
}

TEST(ValidateScene, ObstacleRules) {
  WorldMap w = open_room(10.0, 10.0, {1.0, 1.0});
  w.obstacles.push_back(box(5, 5, 6, 6, SemanticClass::kTarget, 1));
  w.obstacles.push_back(box(6, 6, 7, 7, SemanticClass::kTable, 1, 0.75));
  w.obstacles.push_back(box(3, 3, 4, 4, SemanticClass::kTable, 3, 0.0));
  w.obstacles.push_back(box(9.5, 9.5, 11, 11, SemanticClass::kClutter, 4, 0.5));
  w.obstacles.push_back({{{0.5, 5}, {2, 7}, {2, 5}, {0.5, 7}},
                         SemanticClass::kClutter, 5, 0.5, 0.0});
  std::map<ViolationKind, int> kinds;
  for (const auto& v : validate_scene(w)) ++kinds[v.kind];
  EXPECT_EQ(kinds[ViolationKind::kObstacleClass], 1);
  EXPECT_EQ(kinds[ViolationKind::kObstacleInstance], 1);
  EXPECT_EQ(kinds[ViolationKind::kObstacleHeight], 1);
  EXPECT_EQ(kinds[ViolationKind::kObstacleOutsideRooms], 1);
  EXPECT_EQ(kinds[ViolationKind::kObstaclePolygon], 1);
}

TEST(ValidateScene, SpawnRules) {
  WorldMap w = open_room(10.0, 10.0, {0.1, 5.0});
  auto v = validate_scene(w);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kSpawnCollision);
  w.spawn_points.clear();
  v = validate_scene(w);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kSpawnMissing);
}

TEST(MeshExport, SingleWallBox) {
  WorldMap w = open_room(4.0, 4.0, {0.5, 0.5});
  w.obstacles.push_back(box(1.0, 1.0, 2.0, 2.0, SemanticClass::kWall, 7, 2.0));
  const PlyFile f = parse_ply(export_mesh(w, MeshFormat::kPly));
  ASSERT_EQ(f.vertices.size(), 16u);
  int wall = 0;
  const Rgb wall_rgb = class_color(SemanticClass::kWall);
  for (const PlyVertex& v : f.vertices) {
    if (v.cls != class_id(SemanticClass::kWall)) continue;
    ++wall;
    EXPECT_EQ(v.instance, 7);
    EXPECT_EQ((Rgb{v.r, v.g, v.b}), wall_rgb);
    EXPECT_TRUE(v.x == 1.0f || v.x == 2.0f);
    EXPECT_TRUE(v.y == 1.0f || v.y == 2.0f);
    EXPECT_TRUE(v.z == 0.0f || v.z == 2.0f);
  }
  EXPECT_EQ(wall, 8);
  for (const auto& face : f.faces) {
    for (std::int32_t idx : face) {
      ASSERT_GE(idx, 0);
      ASSERT_LT(idx, static_cast<std::int32_t>(f.vertices.size()));
    }
  }
}

TEST(MeshExport, EmptyWorldHasOnlyFloorAndCeiling) {
  const WorldMap w = open_room(6.0, 3.0, {1.0, 1.0});
  const PlyFile f = parse_ply(export_mesh(w, MeshFormat::kPly));
  EXPECT_EQ(f.vertices.size(), 8u);
  EXPECT_EQ(f.faces.size(), 2u);
  for (const PlyVertex& v : f.vertices) {
    EXPECT_TRUE(v.cls == class_id(SemanticClass::kFloor) ||
                v.cls == class_id(SemanticClass::kCeiling));
  }
}

TEST(MeshExport, VertexCountFormula) {
  WorldMap w = open_room(20.0, 20.0, {0.5, 0.5});
  for (std::uint32_t k = 1; k <= 6; ++k) {
    const double x = 2.0 * k;
    w.obstacles.push_back(box(x, 2.0, x + 1.0, 3.5, SemanticClass::kStorage, k, 2.0));
    const PlyFile f = parse_ply(export_mesh(w, MeshFormat::kPly));
    EXPECT_EQ(f.vertices.size(), 8u * k + 8u);
  }
}

TEST(MeshExport, FloorAreaEqualsBounds) {
  const WorldMap w = generate_scene(3);
  const PlyFile f = parse_ply(export_mesh(w, MeshFormat::kPly));
  double floor_area = 0.0;
  for (const auto& face : f.faces) {
    bool floor = true;
    Polygon poly;
    for (std::int32_t idx : face) {
      const PlyVertex& v = f.vertices[static_cast<std::size_t>(idx)];
      floor = floor && v.cls == class_id(SemanticClass::kFloor);
      poly.push_back({v.x, v.y});
    }
    if (floor) floor_area += std::abs(signed_area(poly));
  }
  EXPECT_NEAR(floor_area, w.bounds.area(), 1e-6);
}

TEST(MeshExport, SharesTheSimulationFrame) {
  const WorldMap w = generate_scene(2);
  const PlyFile f = parse_ply(export_mesh(w, MeshFormat::kPly));
  for (const PlyVertex& v : f.vertices) {
    if (v.instance == 0) continue;
    const Obstacle* o = nullptr;
    for (const Obstacle& x : w.obstacles) {
      if (x.instance_id == v.instance) o = &x;
    }
    ASSERT_NE(o, nullptr);
    double best = 1e9;
    for (const Vec2& p : o->polygon) best = std::min(best, norm(p - Vec2{v.x, v.y}));
    EXPECT_LT(best, 1e-5);
    EXPECT_TRUE(std::abs(v.z - o->base) < 1e-6 || std::abs(v.z - o->height) < 1e-6);
  }
}

TEST(MeshExport, ObjGroupsPerInstance) {
  WorldMap w = open_room(4.0, 4.0, {0.5, 0.5});
  w.obstacles.push_back(box(1.0, 1.0, 2.0, 2.0, SemanticClass::kTable, 3, 0.75));
  w.obstacles.push_back(box(2.5, 1.0, 3.0, 2.0, SemanticClass::kChair, 4, 0.9));
  const std::string obj = export_mesh(w, MeshFormat::kObj);
  EXPECT_NE(obj.find("g instance_3\nusemtl table\n"), std::string::npos);
  EXPECT_NE(obj.find("g instance_4\nusemtl chair\n"), std::string::npos);
  const std::string mtl = obj_material_library();
  for (const auto& name : kClassNames) {
    EXPECT_NE(mtl.find("newmtl " + std::string(name)), std::string::npos);
  }
}

TEST(MeshExport, UnknownFormat) {
  EXPECT_THROW(mesh_format_from_string("stl"), Error);
  EXPECT_EQ(mesh_format_from_string("obj"), MeshFormat::kObj);
}

TEST(SceneJson, ClassOutOfRange) {
  auto j = nlohmann::json::parse(scene_to_json(generate_scene(7)));
  j["obstacles"][2]["class"] = 11;
  try {
    scene_from_json(j.dump());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/obstacles/2/class");
  }
}

TEST(SceneJson, MissingSpawnPoints) {
  auto j = nlohmann::json::parse(scene_to_json(generate_scene(7)));
  j.erase("spawn_points");
  try {
    scene_from_json(j.dump());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/spawn_points");
  }
}

TEST(SceneJson, BadRoomType) {
  auto j = nlohmann::json::parse(scene_to_json(generate_scene(7)));
  j["rooms"][0]["type"] = "kitchen";
  try {
    scene_from_json(j.dump());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/rooms/0/type");
  }
}

TEST(SceneJson, MalformedText) {
  EXPECT_THROW(scene_from_json("{\"bounds\": "), SchemaError);
  EXPECT_THROW(scene_from_json("[]"), SchemaError);
}

TEST(SceneJson, NumbersKeepNineDigits) {
  WorldMap w = open_room(10.0, 10.0, {1.0 / 3.0 + 1.0, 2.0 / 7.0 + 1.0});
  const WorldMap back = scene_from_json(scene_to_json(w));
  EXPECT_NEAR(back.spawn_points[0].x, w.spawn_points[0].x, 1e-9);
  EXPECT_NEAR(back.spawn_points[0].y, w.spawn_points[0].y, 1e-9);
}

}  // namespace
}  // namespace tesse
