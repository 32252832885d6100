#include <reparam/io.hpp>
#include <reparam/patch.hpp>

#include "fixtures.hpp"
#include "shapes.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace reparam;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "reparam_mesh_core";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// Edges of a triangle soup as directed pairs with multiplicity.
std::map<std::pair<int, int>, int> directed_edges(const Triangulation& t) {
  std::map<std::pair<int, int>, int> m;
  for (const Tri& f : t.triangles)
    for (int k = 0; k < 3; ++k) ++m[{f[k], f[(k + 1) % 3]}];
  return m;
}

const char* kTetraStl = R"(solid tet
facet normal 0 0 0
 outer loop
  vertex 0 0 0
  vertex 0 1 0
  vertex 1 0 0
 endloop
endfacet
facet normal 0 0 0
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 0 0 1
 endloop
endfacet
facet normal 0 0 0
 outer loop
  vertex 0 0 0
  vertex 0 0 1
  vertex 0 1 0
 endloop
endfacet
facet normal 0 0 0
 outer loop
  vertex 1 0 0
  vertex 0 1 0
  vertex 0 0 1
 endloop
endfacet
endsolid tet
)";

}  // namespace

TEST(Load, AsciiStlTetrahedronIsWelded) {
  const fs::path p = temp_dir() / "tet.stl";
  write(p, kTetraStl);
  const Triangulation t = load_surface(p);
  EXPECT_EQ(t.num_vertices(), 4);
  EXPECT_EQ(t.num_triangles(), 4);
  EXPECT_TRUE(validate(t).watertight);
}

TEST(Load, ObjUnitSquare) {
  const fs::path p = temp_dir() / "square.obj";
  write(p, "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\nf 1/1 3/3 4/4\n");
  const Triangulation t = load_surface(p);
  EXPECT_EQ(t.num_vertices(), 4);
  EXPECT_EQ(t.num_triangles(), 2);
  EXPECT_EQ(t.triangles[1], (Tri{0, 2, 3}));
}

TEST(Load, NonFiniteCoordinateIsRejected) {
  const fs::path p = temp_dir() / "nan.stl";
  std::string s = kTetraStl;
  s.replace(s.find("vertex 1 0 0"), 12, "vertex nan 0 0");
  write(p, s);
  try {
    load_surface(p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite coordinate"), std::string::npos) << e.what();
  }
}

TEST(Load, EmptyAndMissingFiles) {
  const fs::path p = temp_dir() / "empty.obj";
  write(p, "# nothing\n");
  EXPECT_THROW(load_surface(p), Error);
  EXPECT_THROW(load_surface(temp_dir() / "missing.stl"), Error);
}

TEST(Load, BinaryStlRoundTripWeldsExactly) {
  const Triangulation sphere = shapes::icosphere(2);
  const fs::path p = temp_dir() / "sphere.stl";
  write_mesh(sphere, nullptr, p, MeshFormat::StlBinary);
  EXPECT_EQ(fs::file_size(p), 84u + 50u * sphere.num_triangles());
  const Triangulation back = load_surface(p);
  EXPECT_EQ(back.num_vertices(), sphere.num_vertices());
  EXPECT_EQ(back.num_triangles(), sphere.num_triangles());
  EXPECT_TRUE(validate(back).watertight);
}

TEST(Load, ToleranceWeldingMergesNearDuplicates) {
  const fs::path p = temp_dir() / "dirty.stl";
  std::string s = kTetraStl;
  s.replace(s.rfind("vertex 1 0 0"), 12, "vertex 1.0000001 0 0");
  write(p, s);
  EXPECT_EQ(load_surface(p).num_vertices(), 5);
  LoadOptions opt;
  opt.weld_tolerance = 1e-5;
  EXPECT_EQ(load_surface(p, std::nullopt, opt).num_vertices(), 4);
}

TEST(Validate, ClosedTetrahedron) {
  const ValidationReport r = validate(shapes::tetrahedron());
  EXPECT_TRUE(r.manifold);
  EXPECT_TRUE(r.watertight);
  EXPECT_EQ(r.boundary_loops, 0);
}

TEST(Validate, FlippedNeighbourBreaksOrientation) {
  Triangulation t = shapes::unit_square();
  std::swap(t.triangles[1][1], t.triangles[1][2]);
  const ValidationReport r = validate(t);
  EXPECT_FALSE(r.orientation_consistent);
  EXPECT_FALSE(r.ok());
}

TEST(Validate, ThreeTrianglesOnOneEdgeAreNonManifold) {
  Triangulation t;
  t.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
  t.triangles = {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}};
  const ValidationReport r = validate(t);
  EXPECT_FALSE(r.manifold);
  ASSERT_EQ(r.non_manifold_edges.size(), 1u);
  EXPECT_EQ(r.non_manifold_edges[0], (std::array<int, 2>{0, 1}));
}

TEST(Validate, DegenerateTriangleIsFlagged) {
  Triangulation t = shapes::unit_square();
  t.vertices.push_back({2, 0, 0});
  t.vertices.push_back({3, 0, 0});
  t.triangles.push_back({1, 4, 5});  // collinear
  EXPECT_EQ(validate(t).degenerate_triangles, std::vector<int>{2});
}

TEST(Validate, BoundaryLoopsOfFixtures) {
  EXPECT_EQ(validate(shapes::cylinder_shell()).boundary_loops, 2);
  EXPECT_EQ(validate(shapes::square_hole_plate()).boundary_loops, 2);
  EXPECT_EQ(validate(shapes::holed_torus()).boundary_loops, 1);
  EXPECT_EQ(validate(shapes::torus()).boundary_loops, 0);
}

TEST(EulerCheck, SingleTriangle) {
  const EulerCheck c = euler_check(fixtures::triangle());
  EXPECT_EQ(c.topology.t, 1);
  EXPECT_EQ(c.topology.p, 3);
  EXPECT_EQ(c.topology.b, 1);
  EXPECT_EQ(c.topology.h, 3);
  EXPECT_EQ(c.formula_genus, 0);
  EXPECT_TRUE(c.parametrizable);
}

TEST(EulerCheck, Quad) {
  const EulerCheck c = euler_check(shapes::unit_square());
  EXPECT_EQ(c.topology.h, 4);
  EXPECT_TRUE(c.parametrizable);
}

TEST(EulerCheck, ClosedTetrahedronNeedsACut) {
  const EulerCheck c = euler_check(shapes::tetrahedron());
  // 2(4-1) + 2(0-1) - 0 + 4g = 4  =>  g = 0, but there is no boundary
  EXPECT_EQ(c.topology.b, 0);
  EXPECT_EQ(c.formula_genus, 0);
  EXPECT_FALSE(c.parametrizable);
}

TEST(EulerCheck, FormulaGenusMatchesEulerCharacteristic) {
  const std::vector<std::pair<std::string, Triangulation>> cases = {
      {"disk", shapes::grid_plate(4, 4, fixtures::all_cells())},
      {"annulus", shapes::cylinder_shell()},
      {"tetrahedron", shapes::tetrahedron()},
      {"torus", shapes::torus()},
      {"torus_with_hole", shapes::holed_torus()},
      {"two_holes", fixtures::by_name("two_holes")},
  };
  for (const auto& [name, mesh] : cases) {
    const EulerCheck c = euler_check(mesh);
    // independent counts: chi = V - E + F, g = (2 - b - chi) / 2
    std::set<std::pair<int, int>> edges;
    for (const Tri& f : mesh.triangles)
      for (int k = 0; k < 3; ++k) edges.insert(std::minmax(f[k], f[(k + 1) % 3]));
    const int chi = mesh.num_vertices() - static_cast<int>(edges.size()) + mesh.num_triangles();
    const int g = (2 - validate(mesh).boundary_loops - chi) / 2;
    EXPECT_EQ(c.topology.euler_characteristic(), chi) << name;
    EXPECT_EQ(c.topology.g, g) << name;
    ASSERT_TRUE(c.formula_genus.has_value()) << name;
    EXPECT_EQ(*c.formula_genus, g) << name;
  }
  EXPECT_EQ(euler_check(shapes::torus()).topology.g, 1);
  EXPECT_EQ(euler_check(shapes::holed_torus()).topology.g, 1);
}

TEST(EulerCheck, RejectsNonManifoldPatch) {
  Triangulation t;
  t.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
  t.triangles = {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}};
  EXPECT_THROW(euler_check(t), Error);
}

TEST(EulerCheck, DisconnectedPatchIsNotParametrizable) {
  Triangulation t = shapes::grid_plate(3, 1, [](int i, int) { return i != 1; });
  EXPECT_FALSE(euler_check(t).parametrizable);
}

TEST(Property, InteriorEdgesAreTraversedOnceEachWay) {
  for (const auto& fx : fixtures::disk_suite()) {
    const auto directed = directed_edges(fx.mesh);
    for (const auto& [edge, count] : directed) {
      EXPECT_EQ(count, 1) << fx.name;
      auto twin = directed.find({edge.second, edge.first});
      if (twin != directed.end()) {
        EXPECT_EQ(twin->second, 1) << fx.name;
      }
    }
  }
}

TEST(Write, MshRoundTripIsBitExact) {
  Triangulation t = shapes::icosphere(2);
  for (Vec3& v : t.vertices) v *= 1.0 / 3.0;  // non-representable decimals
  for (MeshFormat fmt : {MeshFormat::Msh, MeshFormat::Obj}) {
    const fs::path p = temp_dir() / (std::string("rt.") + (fmt == MeshFormat::Msh ? "msh" : "obj"));
    write_mesh(t, nullptr, p, fmt);
    const Triangulation back = load_surface(p);
    ASSERT_EQ(back.num_vertices(), t.num_vertices());
    for (int v = 0; v < t.num_vertices(); ++v)
      EXPECT_EQ(std::memcmp(back.vertices[v].data(), t.vertices[v].data(), sizeof(double) * 3), 0);
    EXPECT_EQ(back.triangles, t.triangles);
  }
}

TEST(Write, TetrahedronMshConnectivity) {
  const Triangulation t = shapes::tetrahedron();
  const fs::path p = temp_dir() / "tet.msh";
  write_mesh(t, nullptr, p);
  EXPECT_EQ(load_surface(p).triangles, t.triangles);
}

TEST(Write, TaggedModelHasOneSurfacePerPatch) {
  Triangulation t = shapes::grid_plate(4, 2, fixtures::all_cells());
  t.patch_tags.resize(t.num_triangles());
  for (int i = 0; i < t.num_triangles(); ++i) t.patch_tags[i] = i < 8 ? 0 : (i < 12 ? 1 : 2);
  const std::string text = format_msh(t);
  const auto pos = text.find("$Entities\n");
  ASSERT_NE(pos, std::string::npos);
  std::istringstream in(text.substr(pos + 10));
  int np, nc, ns, nv;
  in >> np >> nc >> ns >> nv;
  EXPECT_EQ(ns, 3);
  EXPECT_EQ(nv, 0);
  const fs::path p = temp_dir() / "tagged.msh";
  write_mesh(t, nullptr, p);
  EXPECT_EQ(load_surface(p).patch_tags, t.patch_tags);
}

TEST(Write, UnwritablePathIsAnIoError) {
  try {
    write_mesh(shapes::tetrahedron(), nullptr, "/nonexistent-dir/x/out.msh");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}
