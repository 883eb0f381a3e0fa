#include "sculptor/geometry/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "sculptor/error.hpp"

namespace sculptor::geometry {

namespace {

int resolve_obj_index(const std::string& token, std::size_t vertex_count, std::size_t line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
    throw IoError("OBJ line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  const long resolved = idx > 0 ? idx - 1 : static_cast<long>(vertex_count) + idx;
  if (resolved < 0 || resolved >= static_cast<long>(vertex_count)) {
    throw IoError("OBJ line " + std::to_string(line_no) + ": face index " + token + " out of range");
  }
  return static_cast<int>(resolved);
}

std::string lowercase_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw IoError("OBJ line " + std::to_string(line_no) + ": bad vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) poly.push_back(resolve_obj_index(tok, mesh.vertices.size(), line_no));
      if (poly.size() < 3) throw IoError("OBJ line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return mesh;
}

TriMesh read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw IoError("PLY: missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;  // "list" entries are stored as "list:<name>"
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw IoError("PLY: property before element");
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type, name;
        ls >> count_type >> item_type >> name;
        elements.back().properties.push_back("list:" + name);
      } else {
        std::string name;
        ls >> name;
        elements.back().properties.push_back(name);
      }
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw IoError("PLY: only ascii format is supported");

  TriMesh mesh;
  for (const Element& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) throw IoError("PLY: truncated " + e.name + " data");
      std::istringstream ls(line);
      if (e.name == "vertex") {
        Vec3 p = Vec3::Zero();
        for (const std::string& prop : e.properties) {
          if (prop.rfind("list:", 0) == 0) {
            std::size_t n = 0;
            ls >> n;
            for (std::size_t k = 0; k < n; ++k) {
              double skip;
              ls >> skip;
            }
            continue;
          }
          double v = 0.0;
          if (!(ls >> v)) throw IoError("PLY: bad vertex record");
          if (prop == "x") p.x() = v;
          if (prop == "y") p.y() = v;
          if (prop == "z") p.z() = v;
        }
        mesh.vertices.push_back(p);
      } else if (e.name == "face") {
        for (const std::string& prop : e.properties) {
          if (prop == "list:vertex_indices" || prop == "list:vertex_index") {
            std::size_t n = 0;
            ls >> n;
            std::vector<int> poly(n);
            for (auto& v : poly) {
              if (!(ls >> v)) throw IoError("PLY: bad face record");
            }
            if (n < 3) throw IoError("PLY: face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < n; ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
          } else if (prop.rfind("list:", 0) == 0) {
            std::size_t n = 0;
            ls >> n;
            for (std::size_t k = 0; k < n; ++k) {
              double skip;
              ls >> skip;
            }
          } else {
            double skip;
            ls >> skip;
          }
        }
      }
    }
  }
  for (const Face& f : mesh.faces) {
    for (int v : f) {
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size())) throw IoError("PLY: face index out of range");
    }
  }
  return mesh;
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void write_ply(std::ostream& out, const TriMesh& mesh) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  const std::string ext = lowercase_extension(path);
  if (ext == ".obj") return read_obj(in);
  if (ext == ".ply") return read_ply(in);
  throw IoError("unsupported mesh format '" + ext + "' for " + path.string());
}

TriMesh load_mesh(const std::filesystem::path& path) {
  TriMesh mesh = remove_degenerate_faces(read_mesh(path));
  if (mesh.empty()) throw ShapeError(path.string() + ": mesh has no non-degenerate faces");
  if (const std::size_t bad = non_manifold_edge_count(mesh); bad > 0) {
    throw ShapeError(path.string() + ": " + std::to_string(bad) + " non-manifold edges");
  }
  return normalized(mesh);
}

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string ext = lowercase_extension(path);
  if (ext == ".obj") {
    write_obj(out, mesh);
  } else if (ext == ".ply") {
    write_ply(out, mesh);
  } else {
    throw IoError("unsupported mesh format '" + ext + "' for " + path.string());
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace sculptor::geometry
