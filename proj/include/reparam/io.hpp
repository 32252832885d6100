#pragma once

#include "reparam/brep.hpp"
#include "reparam/core.hpp"
#include "reparam/mesh.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>

namespace reparam {

enum class MeshFormat { StlAscii, StlBinary, Obj, Msh };

inline const char* to_string(MeshFormat f) {
  switch (f) {
    case MeshFormat::StlAscii: return "stl-ascii";
    case MeshFormat::StlBinary: return "stl-binary";
    case MeshFormat::Obj: return "obj";
    case MeshFormat::Msh: return "msh";
  }
  return "?";
}

/// Parses a CLI format name ("stl", "stl-ascii", "stl-binary", "obj", "msh").
/// Plain "stl" means binary when writing and auto-detect when reading.
inline MeshFormat parse_format(std::string_view name) {
  if (name == "stl" || name == "stl-binary") return MeshFormat::StlBinary;
  if (name == "stl-ascii") return MeshFormat::StlAscii;
  if (name == "obj") return MeshFormat::Obj;
  if (name == "msh" || name == "msh-subset") return MeshFormat::Msh;
  throw Error(ErrorKind::InvalidArgument, "unknown mesh format '" + std::string(name) + "'");
}

inline MeshFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".stl") return MeshFormat::StlBinary;
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".msh") return MeshFormat::Msh;
  throw Error(ErrorKind::InvalidArgument, "cannot infer mesh format from '" + path.string() + "'");
}

struct LoadOptions {
  /// 0 welds STL vertices by exact coordinate equality; a positive value
  /// merges vertices closer than this distance (for dirty scans).
  double weld_tolerance = 0.0;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Whitespace tokenizer over an in-memory buffer.
class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  bool done() {
    skip();
    return pos_ >= text_.size();
  }

  std::string_view next() {
    skip();
    if (pos_ >= text_.size()) throw Error(ErrorKind::Parse, "unexpected end of file");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  /// Rest of the current line (without the newline).
  std::string_view line() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    std::string_view out = text_.substr(start, pos_ - start);
    if (pos_ < text_.size()) ++pos_;
    return out;
  }

  double number() { return parse_double(next()); }

  long long integer() {
    std::string_view tok = next();
    long long value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw Error(ErrorKind::Parse, "expected integer, got '" + std::string(tok) + "'");
    return value;
  }

  void expect(std::string_view word) {
    std::string_view tok = next();
    if (tok != word)
      throw Error(ErrorKind::Parse, "expected '" + std::string(word) + "', got '" + std::string(tok) + "'");
  }

  static double parse_double(std::string_view tok) {
    double value = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw Error(ErrorKind::Parse, "expected number, got '" + std::string(tok) + "'");
    return value;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void require_finite(const Vec3& p) {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || !std::isfinite(p.z()))
    throw Error(ErrorKind::Parse, "non-finite coordinate");
}

/// Welds per-facet STL corners into an indexed triangulation.
class Welder {
 public:
  explicit Welder(double tolerance) : tol_(tolerance) {}

  int add(const Vec3& p) {
    const Vec3 q = p + Vec3::Zero();  // folds -0.0 into +0.0
    if (tol_ <= 0.0) {
      std::array<std::uint64_t, 3> key{std::bit_cast<std::uint64_t>(q.x()),
                                       std::bit_cast<std::uint64_t>(q.y()),
                                       std::bit_cast<std::uint64_t>(q.z())};
      auto [it, inserted] = exact_.emplace(key, static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(q);
      return it->second;
    }
    const std::array<long long, 3> cell = cell_of(q);
    int best = -1;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid_.find({cell[0] + dx, cell[1] + dy, cell[2] + dz});
          if (it == grid_.end()) continue;
          for (int v : it->second)
            if ((vertices[v] - q).norm() <= tol_ && (best < 0 || v < best)) best = v;
        }
    if (best >= 0) return best;
    vertices.push_back(q);
    grid_[cell].push_back(static_cast<int>(vertices.size()) - 1);
    return static_cast<int>(vertices.size()) - 1;
  }

  std::vector<Vec3> vertices;

 private:
  std::array<long long, 3> cell_of(const Vec3& p) const {
    return {static_cast<long long>(std::floor(p.x() / tol_)), static_cast<long long>(std::floor(p.y() / tol_)),
            static_cast<long long>(std::floor(p.z() / tol_))};
  }

  double tol_;
  std::map<std::array<std::uint64_t, 3>, int> exact_;
  std::map<std::array<long long, 3>, std::vector<int>> grid_;
};

inline void add_facet(Triangulation& out, Welder& welder, const std::array<Vec3, 3>& corners,
                      bool drop_collapsed) {
  Tri f;
  for (int k = 0; k < 3; ++k) {
    require_finite(corners[k]);
    f[k] = welder.add(corners[k]);
  }
  if (drop_collapsed && (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])) return;
  out.triangles.push_back(f);
}

inline bool looks_like_binary_stl(const std::string& data) {
  if (data.size() < 84) return false;
  std::uint32_t count = 0;
  std::memcpy(&count, data.data() + 80, 4);
  if constexpr (std::endian::native == std::endian::big) count = __builtin_bswap32(count);
  return data.size() == 84 + 50ull * count;
}

inline Triangulation parse_stl_ascii(std::string_view text, const LoadOptions& opt) {
  Tokens tok(text);
  tok.expect("solid");
  tok.line();  // solid name
  Triangulation out;
  Welder welder(opt.weld_tolerance);
  while (true) {
    std::string_view word = tok.next();
    if (word == "endsolid") break;
    if (word != "facet") throw Error(ErrorKind::Parse, "expected 'facet', got '" + std::string(word) + "'");
    tok.expect("normal");
    for (int k = 0; k < 3; ++k) tok.number();
    tok.expect("outer");
    tok.expect("loop");
    std::array<Vec3, 3> corners;
    for (int k = 0; k < 3; ++k) {
      tok.expect("vertex");
      for (int d = 0; d < 3; ++d) corners[k][d] = tok.number();
    }
    tok.expect("endloop");
    tok.expect("endfacet");
    add_facet(out, welder, corners, opt.weld_tolerance > 0.0);
  }
  out.vertices = std::move(welder.vertices);
  return out;
}

inline float load_float_le(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

inline Triangulation parse_stl_binary(const std::string& data, const LoadOptions& opt) {
  if (data.size() < 84) throw Error(ErrorKind::Parse, "binary STL shorter than its header");
  std::uint32_t count = 0;
  std::memcpy(&count, data.data() + 80, 4);
  if constexpr (std::endian::native == std::endian::big) count = __builtin_bswap32(count);
  if (data.size() < 84 + 50ull * count) throw Error(ErrorKind::Parse, "binary STL truncated");
  Triangulation out;
  Welder welder(opt.weld_tolerance);
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* facet = data.data() + 84 + 50ull * i;
    std::array<Vec3, 3> corners;
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) corners[k][d] = load_float_le(facet + 12 + 12 * k + 4 * d);
    add_facet(out, welder, corners, opt.weld_tolerance > 0.0);
  }
  out.vertices = std::move(welder.vertices);
  return out;
}

inline Triangulation parse_obj(std::string_view text) {
  Triangulation out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    Tokens tok(line);
    if (tok.done()) continue;
    std::string_view head = tok.next();
    if (head == "v") {
      Vec3 p;
      for (int d = 0; d < 3; ++d) p[d] = tok.number();
      require_finite(p);
      out.vertices.push_back(p);
    } else if (head == "f") {
      std::vector<int> poly;
      while (!tok.done()) {
        std::string_view ref = tok.next();
        ref = ref.substr(0, ref.find('/'));
        long long idx = 0;
        auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (ec != std::errc() || idx == 0)
          throw Error(ErrorKind::Parse, "bad face index on OBJ line " + std::to_string(line_no));
        const long long n = static_cast<long long>(out.vertices.size());
        poly.push_back(static_cast<int>(idx > 0 ? idx - 1 : n + idx));
      }
      if (poly.size() < 3) throw Error(ErrorKind::Parse, "face with fewer than 3 vertices on OBJ line " + std::to_string(line_no));
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) out.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return out;
}

inline Triangulation parse_msh(std::string_view text) {
  Tokens tok(text);
  std::map<long long, Vec3> nodes;
  struct Face {
    long long tag;
    Tri nodes;
    int entity;
  };
  std::vector<Face> faces;
  while (!tok.done()) {
    std::string_view section = tok.next();
    if (section == "$MeshFormat") {
      const double version = tok.number();
      if (version < 4.0 || version >= 5.0) throw Error(ErrorKind::Parse, "unsupported MSH version");
      if (tok.integer() != 0) throw Error(ErrorKind::Parse, "binary MSH is not supported");
      tok.integer();
      tok.expect("$EndMeshFormat");
    } else if (section == "$Nodes") {
      const long long blocks = tok.integer();
      tok.integer();
      tok.integer();
      tok.integer();
      for (long long b = 0; b < blocks; ++b) {
        tok.integer();
        tok.integer();
        const long long parametric = tok.integer();
        const long long n = tok.integer();
        std::vector<long long> tags(n);
        for (auto& t : tags) t = tok.integer();
        for (long long i = 0; i < n; ++i) {
          Vec3 p;
          for (int d = 0; d < 3; ++d) p[d] = tok.number();
          require_finite(p);
          nodes[tags[i]] = p;
          if (parametric) throw Error(ErrorKind::Parse, "parametric MSH nodes are not supported");
        }
      }
      tok.expect("$EndNodes");
    } else if (section == "$Elements") {
      const long long blocks = tok.integer();
      tok.integer();
      tok.integer();
      tok.integer();
      for (long long b = 0; b < blocks; ++b) {
        tok.integer();
        const long long entity = tok.integer();
        const long long type = tok.integer();
        const long long n = tok.integer();
        const int per = type == 2 ? 3 : type == 1 ? 2 : type == 15 ? 1 : -1;
        if (per < 0) throw Error(ErrorKind::Parse, "unsupported MSH element type " + std::to_string(type));
        for (long long i = 0; i < n; ++i) {
          const long long tag = tok.integer();
          std::array<long long, 3> ids{};
          for (int k = 0; k < per; ++k) ids[k] = tok.integer();
          if (type == 2)
            faces.push_back({tag, {static_cast<int>(ids[0]), static_cast<int>(ids[1]), static_cast<int>(ids[2])},
                             static_cast<int>(entity)});
        }
      }
      tok.expect("$EndElements");
    } else if (!section.empty() && section.front() == '$') {
      // skip unknown sections ($Entities, $ElementData, ...)
      const std::string end = "$End" + std::string(section.substr(1));
      while (tok.next() != end) {
      }
    } else {
      throw Error(ErrorKind::Parse, "unexpected token '" + std::string(section) + "' in MSH file");
    }
  }

  Triangulation out;
  std::map<long long, int> index;
  for (const auto& [tag, p] : nodes) {
    index[tag] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
  }
  std::stable_sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.tag < b.tag; });
  bool multiple_entities = false;
  for (const Face& f : faces) {
    Tri t;
    for (int k = 0; k < 3; ++k) {
      auto it = index.find(f.nodes[k]);
      if (it == index.end()) throw Error(ErrorKind::Parse, "element references unknown node");
      t[k] = it->second;
    }
    out.triangles.push_back(t);
    out.patch_tags.push_back(f.entity - 1);
    multiple_entities = multiple_entities || f.entity != faces.front().entity;
  }
  if (!multiple_entities && !faces.empty() && faces.front().entity == 1) out.patch_tags.clear();
  return out;
}

inline void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

inline void append_int(std::string& out, long long value) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace detail

/// Reads a surface triangulation. STL files are auto-detected as ASCII or
/// binary; vertices repeated by facets are welded.
inline Triangulation load_surface(const std::filesystem::path& path, std::optional<MeshFormat> format = std::nullopt,
                                  const LoadOptions& options = {}) {
  const MeshFormat fmt = format ? *format : format_from_extension(path);
  const std::string data = detail::read_file(path);
  Triangulation out;
  switch (fmt) {
    case MeshFormat::StlAscii:
    case MeshFormat::StlBinary:
      if (detail::looks_like_binary_stl(data))
        out = detail::parse_stl_binary(data, options);
      else if (data.rfind("solid", 0) == 0)
        out = detail::parse_stl_ascii(data, options);
      else
        out = detail::parse_stl_binary(data, options);
      break;
    case MeshFormat::Obj: out = detail::parse_obj(data); break;
    case MeshFormat::Msh: out = detail::parse_msh(data); break;
  }
  if (out.triangles.empty() || out.vertices.empty())
    throw Error(ErrorKind::Parse, "empty mesh in '" + path.string() + "'");
  for (const Tri& f : out.triangles)
    for (int v : f)
      if (v < 0 || v >= out.num_vertices())
        throw Error(ErrorKind::Parse, "triangle references vertex out of range");
  return out;
}

/// Named per-triangle scalar field written to an $ElementData section.
struct ElementField {
  std::string name;
  std::vector<double> values;
};

/// Writes the MSH subset: nodes, triangles and, when a BRep is given, one
/// geometric entity per BRep point/curve/face with line elements on curves.
/// Triangles keep element tags 1..T in input order and node tags are
/// vertex index + 1, so reading the file back reproduces the arrays.
inline std::string format_msh(const Triangulation& tri, const BRep* brep = nullptr,
                              std::span<const ElementField> fields = {}) {
  using detail::append_int;
  using detail::append_number;
  const int nv = tri.num_vertices();
  const int nt = tri.num_triangles();
  if (brep && !tri.tagged()) throw Error(ErrorKind::InvalidArgument, "BRep output requires patch tags");

  // surface ids: patch tag + 1, or 1 when untagged
  auto surface_of = [&](int t) { return tri.tagged() ? tri.patch_tags[t] + 1 : 1; };
  int num_surfaces = 1;
  if (tri.tagged()) num_surfaces = *std::max_element(tri.patch_tags.begin(), tri.patch_tags.end()) + 1;
  if (brep) num_surfaces = std::max(num_surfaces, brep->num_faces());

  // classify each node on the lowest-dimensional entity containing it
  std::vector<std::pair<int, int>> entity(nv, {2, 0});
  for (int t = 0; t < nt; ++t)
    for (int v : tri.triangles[t]) {
      const int s = surface_of(t);
      if (entity[v].second == 0 || s < entity[v].second) entity[v] = {2, s};
    }
  if (brep) {
    for (int c = 0; c < brep->num_curves(); ++c)
      for (int v : brep->curves[c].vertices)
        if (entity[v].first > 1) entity[v] = {1, c + 1};
    for (int p = 0; p < brep->num_points(); ++p) entity[brep->points[p].vertex] = {0, p + 1};
  }
  for (int v = 0; v < nv; ++v)
    if (entity[v].second == 0) entity[v] = {2, 1};  // isolated vertex

  std::string out;
  out.reserve(static_cast<std::size_t>(nv) * 64 + static_cast<std::size_t>(nt) * 32);
  out += "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";

  // entities with bounding boxes
  auto bbox_of = [&](const std::vector<int>& verts) {
    Eigen::AlignedBox3d box;
    for (int v : verts) box.extend(tri.vertices[v]);
    return box;
  };
  auto append_box = [&](const Eigen::AlignedBox3d& box) {
    for (int d = 0; d < 3; ++d) {
      append_number(out, box.isEmpty() ? 0.0 : box.min()[d]);
      out += ' ';
    }
    for (int d = 0; d < 3; ++d) {
      append_number(out, box.isEmpty() ? 0.0 : box.max()[d]);
      out += ' ';
    }
  };
  std::vector<std::vector<int>> surface_nodes(num_surfaces);
  for (int t = 0; t < nt; ++t)
    for (int v : tri.triangles[t]) surface_nodes[surface_of(t) - 1].push_back(v);

  const int npoints = brep ? brep->num_points() : 0;
  const int ncurves = brep ? brep->num_curves() : 0;
  out += "$Entities\n";
  append_int(out, npoints);
  out += ' ';
  append_int(out, ncurves);
  out += ' ';
  append_int(out, num_surfaces);
  out += " 0\n";
  for (int p = 0; p < npoints; ++p) {
    append_int(out, p + 1);
    for (int d = 0; d < 3; ++d) {
      out += ' ';
      append_number(out, tri.vertices[brep->points[p].vertex][d]);
    }
    out += " 0\n";
  }
  for (int c = 0; c < ncurves; ++c) {
    const BRepCurve& curve = brep->curves[c];
    append_int(out, c + 1);
    out += ' ';
    append_box(bbox_of(curve.vertices));
    out += "0 ";
    if (curve.closed) {
      out += "0\n";
    } else {
      out += "2 ";
      append_int(out, curve.points[0] + 1);
      out += ' ';
      append_int(out, -(curve.points[1] + 1));
      out += '\n';
    }
  }
  for (int s = 0; s < num_surfaces; ++s) {
    append_int(out, s + 1);
    out += ' ';
    append_box(bbox_of(surface_nodes[s]));
    out += "0 ";
    std::vector<int> bounding;
    if (brep && s < brep->num_faces())
      for (const auto& loop : brep->faces[s].loops)
        for (const OrientedCurve& oc : loop) bounding.push_back(oc.reversed ? -(oc.curve + 1) : oc.curve + 1);
    append_int(out, static_cast<long long>(bounding.size()));
    for (int b : bounding) {
      out += ' ';
      append_int(out, b);
    }
    out += '\n';
  }
  out += "$EndEntities\n";

  // node blocks ordered by (dim, tag); nodes ascending within a block
  std::map<std::pair<int, int>, std::vector<int>> blocks;
  for (int v = 0; v < nv; ++v) blocks[entity[v]].push_back(v);
  out += "$Nodes\n";
  append_int(out, static_cast<long long>(blocks.size()));
  out += ' ';
  append_int(out, nv);
  out += nv > 0 ? " 1 " : " 0 ";
  append_int(out, nv);
  out += '\n';
  for (const auto& [key, verts] : blocks) {
    append_int(out, key.first);
    out += ' ';
    append_int(out, key.second);
    out += " 0 ";
    append_int(out, static_cast<long long>(verts.size()));
    out += '\n';
    for (int v : verts) {
      append_int(out, v + 1);
      out += '\n';
    }
    for (int v : verts) {
      append_number(out, tri.vertices[v].x());
      out += ' ';
      append_number(out, tri.vertices[v].y());
      out += ' ';
      append_number(out, tri.vertices[v].z());
      out += '\n';
    }
  }
  out += "$EndNodes\n";

  // elements: triangles (tags 1..nt) per surface, then curve lines
  std::vector<std::vector<int>> surface_tris(num_surfaces);
  for (int t = 0; t < nt; ++t) surface_tris[surface_of(t) - 1].push_back(t);
  int nblocks = 0;
  long long nlines = 0;
  for (const auto& list : surface_tris) nblocks += list.empty() ? 0 : 1;
  for (int c = 0; c < ncurves; ++c) {
    const auto& cv = brep->curves[c];
    const long long segs = static_cast<long long>(cv.vertices.size()) - (cv.closed ? 0 : 1);
    if (segs > 0) {
      ++nblocks;
      nlines += segs;
    }
  }
  out += "$Elements\n";
  append_int(out, nblocks);
  out += ' ';
  append_int(out, nt + nlines);
  out += nt + nlines > 0 ? " 1 " : " 0 ";
  append_int(out, nt + nlines);
  out += '\n';
  for (int s = 0; s < num_surfaces; ++s) {
    if (surface_tris[s].empty()) continue;
    out += "2 ";
    append_int(out, s + 1);
    out += " 2 ";
    append_int(out, static_cast<long long>(surface_tris[s].size()));
    out += '\n';
    for (int t : surface_tris[s]) {
      append_int(out, t + 1);
      for (int v : tri.triangles[t]) {
        out += ' ';
        append_int(out, v + 1);
      }
      out += '\n';
    }
  }
  long long tag = nt;
  for (int c = 0; c < ncurves; ++c) {
    const auto& cv = brep->curves[c];
    const int n = static_cast<int>(cv.vertices.size());
    const int segs = n - (cv.closed ? 0 : 1);
    if (segs <= 0) continue;
    out += "1 ";
    append_int(out, c + 1);
    out += " 1 ";
    append_int(out, segs);
    out += '\n';
    for (int i = 0; i < segs; ++i) {
      append_int(out, ++tag);
      out += ' ';
      append_int(out, cv.vertices[i] + 1);
      out += ' ';
      append_int(out, cv.vertices[(i + 1) % n] + 1);
      out += '\n';
    }
  }
  out += "$EndElements\n";

  for (const ElementField& field : fields) {
    if (static_cast<int>(field.values.size()) != nt)
      throw Error(ErrorKind::InvalidArgument, "element field '" + field.name + "' has wrong size");
    out += "$ElementData\n1\n\"" + field.name + "\"\n1\n0\n3\n0\n1\n";
    append_int(out, nt);
    out += '\n';
    for (int t = 0; t < nt; ++t) {
      append_int(out, t + 1);
      out += ' ';
      append_number(out, field.values[t]);
      out += '\n';
    }
    out += "$EndElementData\n";
  }
  return out;
}

inline std::string format_obj(const Triangulation& tri) {
  std::string out;
  for (const Vec3& p : tri.vertices) {
    out += "v ";
    detail::append_number(out, p.x());
    out += ' ';
    detail::append_number(out, p.y());
    out += ' ';
    detail::append_number(out, p.z());
    out += '\n';
  }
  for (const Tri& f : tri.triangles) {
    out += 'f';
    for (int v : f) {
      out += ' ';
      detail::append_int(out, v + 1);
    }
    out += '\n';
  }
  return out;
}

inline std::string format_stl_binary(const Triangulation& tri) {
  std::string out(84 + 50 * tri.triangles.size(), '\0');
  const char header[] = "reparam binary stl";
  std::memcpy(out.data(), header, sizeof(header) - 1);
  auto put_u32 = [&](std::size_t at, std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
    std::memcpy(out.data() + at, &v, 4);
  };
  auto put_f32 = [&](std::size_t at, double v) { put_u32(at, std::bit_cast<std::uint32_t>(static_cast<float>(v))); };
  put_u32(80, static_cast<std::uint32_t>(tri.triangles.size()));
  for (std::size_t i = 0; i < tri.triangles.size(); ++i) {
    const Tri& f = tri.triangles[i];
    const std::size_t base = 84 + 50 * i;
    Vec3 n = triangle_normal(tri.vertices[f[0]], tri.vertices[f[1]], tri.vertices[f[2]]);
    if (n.norm() > 0) n.normalize();
    for (int d = 0; d < 3; ++d) put_f32(base + 4 * d, n[d]);
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) put_f32(base + 12 + 12 * k + 4 * d, tri.vertices[f[k]][d]);
  }
  return out;
}

inline std::string format_stl_ascii(const Triangulation& tri) {
  std::ostringstream out;
  out.precision(9);
  out << "solid reparam\n";
  for (const Tri& f : tri.triangles) {
    Vec3 n = triangle_normal(tri.vertices[f[0]], tri.vertices[f[1]], tri.vertices[f[2]]);
    if (n.norm() > 0) n.normalize();
    out << "facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n outer loop\n";
    for (int v : f)
      out << "  vertex " << tri.vertices[v].x() << ' ' << tri.vertices[v].y() << ' ' << tri.vertices[v].z() << '\n';
    out << " endloop\nendfacet\n";
  }
  out << "endsolid reparam\n";
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline void write_mesh(const Triangulation& tri, const BRep* brep, const std::filesystem::path& path,
                       std::optional<MeshFormat> format = std::nullopt, std::span<const ElementField> fields = {}) {
  const MeshFormat fmt = format ? *format : format_from_extension(path);
  switch (fmt) {
    case MeshFormat::Msh: write_text_file(path, format_msh(tri, brep, fields)); break;
    case MeshFormat::Obj: write_text_file(path, format_obj(tri)); break;
    case MeshFormat::StlBinary: write_text_file(path, format_stl_binary(tri)); break;
    case MeshFormat::StlAscii: write_text_file(path, format_stl_ascii(tri)); break;
  }
}

}  // namespace reparam
