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

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

#include "tesse/error.hpp"
#include "tesse/world.hpp"

namespace tesse {
namespace {

struct MeshVertex {
  float x, y, z;
  SemanticClass cls;
  std::uint16_t instance;
};

struct MeshGroup {
  std::string name;
  SemanticClass cls;
  std::vector<std::vector<std::uint32_t>> faces;
};

struct Mesh {
  std::vector<MeshVertex> vertices;
  std::vector<MeshGroup> groups;
};

std::uint32_t push_vertex(Mesh& m, Vec2 p, double z, SemanticClass c,
                          std::uint32_t instance) {
  m.vertices.push_back({static_cast<float>(p.x), static_cast<float>(p.y),
                        static_cast<float>(z), c,
                        static_cast<std::uint16_t>(instance)});
  return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

void add_horizontal_quad(Mesh& m, const Rect& r, double z, SemanticClass c,
                         bool facing_up, const std::string& name) {
  const Polygon poly = rect_polygon(r);  // counter-clockwise from above
  MeshGroup g{name, c, {}};
  std::vector<std::uint32_t> f;
  for (const Vec2& p : poly) f.push_back(push_vertex(m, p, z, c, 0));
  if (!facing_up) std::reverse(f.begin(), f.end());
  g.faces.push_back(std::move(f));
  m.groups.push_back(std::move(g));
}

void add_prism(Mesh& m, const Obstacle& o) {
  Polygon poly = o.polygon;
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  const std::size_t n = poly.size();
  MeshGroup g{"instance_" + std::to_string(o.instance_id), o.cls, {}};
  std::vector<std::uint32_t> bottom(n);
  std::vector<std::uint32_t> top(n);
  for (std::size_t i = 0; i < n; ++i) bottom[i] = push_vertex(m, poly[i], o.base, o.cls, o.instance_id);
  for (std::size_t i = 0; i < n; ++i) top[i] = push_vertex(m, poly[i], o.height, o.cls, o.instance_id);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    g.faces.push_back({bottom[i], bottom[j], top[j], top[i]});
  }
  for (const auto& t : triangulate(poly)) {
    g.faces.push_back({top[t[0]], top[t[1]], top[t[2]]});
    g.faces.push_back({bottom[t[2]], bottom[t[1]], bottom[t[0]]});
  }
  m.groups.push_back(std::move(g));
}

Mesh build_mesh(const WorldMap& world) {
  Mesh m;
  add_horizontal_quad(m, world.bounds, 0.0, SemanticClass::kFloor, true, "floor");
  add_horizontal_quad(m, world.bounds, kCeilingHeight, SemanticClass::kCeiling, false, "ceiling");
  for (const Obstacle& o : world.obstacles) add_prism(m, o);
  return m;
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

std::string write_ply(const Mesh& m) {
  std::size_t n_faces = 0;
  for (const auto& g : m.groups) n_faces += g.faces.size();
  std::ostringstream hdr;
  hdr << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "comment tesse-lite semantic mesh, z up, meters\n"
      << "element vertex " << m.vertices.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar red\n"
      << "property uchar green\n"
      << "property uchar blue\n"
      << "property uchar class\n"
      << "property ushort instance\n"
      << "element face " << n_faces << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  std::string out = hdr.str();
  for (const MeshVertex& v : m.vertices) {
    put_le(out, v.x);
    put_le(out, v.y);
    put_le(out, v.z);
    const Rgb c = class_color(v.cls);
    put_le(out, c.r);
    put_le(out, c.g);
    put_le(out, c.b);
    put_le(out, class_id(v.cls));
    put_le(out, v.instance);
  }
  for (const auto& g : m.groups) {
    for (const auto& f : g.faces) {
      put_le(out, static_cast<std::uint8_t>(f.size()));
      for (std::uint32_t idx : f) put_le(out, static_cast<std::int32_t>(idx));
    }
  }
  return out;
}

std::string write_obj(const Mesh& m) {
  std::ostringstream os;
  os.precision(9);
  os << "# tesse-lite semantic mesh, z up, meters\n";
  os << "mtllib tesse_classes.mtl\n";
  for (const MeshVertex& v : m.vertices) {
    os << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  }
  for (const auto& g : m.groups) {
    os << "g " << g.name << '\n';
    os << "usemtl " << class_name(g.cls) << '\n';
    for (const auto& f : g.faces) {
      os << 'f';
      for (std::uint32_t idx : f) os << ' ' << idx + 1;
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace

std::string export_mesh(const WorldMap& world, MeshFormat format) {
  const Mesh m = build_mesh(world);
  switch (format) {
    case MeshFormat::kPly:
      return write_ply(m);
    case MeshFormat::kObj:
      return write_obj(m);
  }
  throw Error("unsupported mesh format");
}

MeshFormat mesh_format_from_string(std::string_view s) {
  if (s == "ply" || s == "PLY") return MeshFormat::kPly;
  if (s == "obj" || s == "OBJ") return MeshFormat::kObj;
  throw Error("unsupported mesh format '" + std::string(s) + "'");
}

std::string obj_material_library() {
  std::ostringstream os;
  os.precision(6);
  for (int i = 0; i < kNumClasses; ++i) {
    const Rgb c = kClassPalette[i];
    os << "newmtl " << kClassNames[i] << '\n'
       << "Kd " << c.r / 255.0 << ' ' << c.g / 255.0 << ' ' << c.b / 255.0 << "\n\n";
  }
  return os.str();
}

}  // namespace tesse
