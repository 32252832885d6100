#include <reparam/atlas.hpp>

#include "fixtures.hpp"
#include "shapes.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace reparam;
using fixtures::whole_patch;

namespace {

std::vector<int> sorted_model_triangles(const std::vector<AtlasPatch>& parts) {
  std::vector<int> all;
  for (const auto& p : parts) all.insert(all.end(), p.patch.parent_triangle.begin(), p.patch.parent_triangle.end());
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<int> iota_vec(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

bool cyclic_equal(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  const auto it = std::find(b.begin(), b.end(), a[0]);
  if (it == b.end()) return false;
  const std::size_t off = it - b.begin();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[(i + off) % b.size()]) return false;
  return true;
}

// Vertex cycle spelled by a face loop of oriented curves.
std::vector<int> spell_loop(const BRep& brep, const std::vector<OrientedCurve>& loop) {
  std::vector<int> out;
  for (const OrientedCurve& oc : loop) {
    std::vector<int> v = brep.curves[oc.curve].vertices;
    if (oc.reversed) {
      std::reverse(v.begin(), v.end());
      if (brep.curves[oc.curve].closed) std::rotate(v.begin(), v.end() - 1, v.end());
    }
    if (!brep.curves[oc.curve].closed) v.pop_back();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// Structural checks shared by every BRep test.
void check_brep(const Triangulation& model, const BRep& brep, const std::string& name) {
  for (int c = 0; c < brep.num_curves(); ++c) {
    const BRepCurve& curve = brep.curves[c];
    EXPECT_GE(curve.faces.size(), 1u) << name;
    EXPECT_LE(curve.faces.size(), 2u) << name;
    EXPECT_TRUE(std::is_sorted(curve.faces.begin(), curve.faces.end())) << name;
    if (curve.closed) {
      EXPECT_EQ(curve.points[0], -1) << name;
      EXPECT_GE(curve.vertices.size(), 3u) << name;
    } else {
      ASSERT_GE(curve.points[0], 0) << name;
      ASSERT_GE(curve.points[1], 0) << name;
      EXPECT_EQ(brep.points[curve.points[0]].vertex, curve.vertices.front()) << name;
      EXPECT_EQ(brep.points[curve.points[1]].vertex, curve.vertices.back()) << name;
    }
  }
  std::map<int, int> uses;  // curve -> number of face-loop references
  for (int f = 0; f < brep.num_faces(); ++f) {
    std::vector<Tri> tris;
    for (int t = 0; t < model.num_triangles(); ++t)
      if (model.patch_tags[t] == f) tris.push_back(model.triangles[t]);
    Adjacency fadj(model.num_vertices(), tris);
    const auto loops = extract_boundary_loops(tris, fadj);
    ASSERT_EQ(loops.size(), brep.faces[f].loops.size()) << name << " face " << f;
    for (std::size_t l = 0; l < loops.size(); ++l) {
      const auto& cycle = brep.faces[f].loops[l];
      EXPECT_TRUE(cyclic_equal(spell_loop(brep, cycle), loops[l])) << name << " face " << f << " loop " << l;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        ++uses[cycle[k].curve];
        const auto& cf = brep.curves[cycle[k].curve].faces;
        EXPECT_NE(std::find(cf.begin(), cf.end(), f), cf.end()) << name;
      }
    }
  }
  for (int c = 0; c < brep.num_curves(); ++c)
    EXPECT_EQ(uses[c], static_cast<int>(brep.curves[c].faces.size())) << name << " curve " << c;
}

Triangulation tagged(Triangulation t, const std::function<int(int)>& tag) {
  t.patch_tags.resize(t.num_triangles());
  for (int i = 0; i < t.num_triangles(); ++i) t.patch_tags[i] = tag(i);
  return t;
}

}  // namespace

TEST(UvAspect, EquilateralAndNeedle) {
  EXPECT_NEAR(uv_triangle_aspect({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}), 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(uv_triangle_aspect({0, 0}, {1, 0}, {0.5, 1e-4}), 1.0 / 1e-4, 1e-6);
  EXPECT_TRUE(std::isinf(uv_triangle_aspect({0, 0}, {1, 0}, {2, 0})));
}

TEST(AtlasCheck, OrderIsTopologyThenSize) {
  AtlasOptions opt;
  opt.max_triangles = 10;
  EXPECT_EQ(atlas_check(whole_patch(shapes::icosphere(1)), opt), SplitReason::Genus);
  EXPECT_EQ(atlas_check(whole_patch(shapes::grid_plate(4, 4, fixtures::all_cells())), opt), SplitReason::Size);
  EXPECT_EQ(atlas_check(whole_patch(shapes::unit_square()), opt), std::nullopt);
}

TEST(MakeParametrizable, SmallDiskUnchanged) {
  const Triangulation disk = shapes::grid_plate(5, 1, fixtures::all_cells());
  ASSERT_EQ(disk.num_triangles(), 10);
  const auto parts = make_parametrizable(whole_patch(disk));
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_TRUE(parts[0].reasons.empty());
  EXPECT_EQ(parts[0].patch.parent_triangle, iota_vec(10));
  EXPECT_EQ(parts[0].patch.mesh.triangles, disk.triangles);
}

TEST(MakeParametrizable, ClosedSphereIsCut) {
  const auto parts = make_parametrizable(whole_patch(shapes::icosphere(2)));
  ASSERT_GE(parts.size(), 2u);
  for (const auto& p : parts) {
    ASSERT_FALSE(p.reasons.empty());
    EXPECT_EQ(p.reasons.front(), SplitReason::Genus);
    EXPECT_GE(p.patch.topology.b, 1);
  }
}

TEST(MakeParametrizable, TorusPartsAreDisks) {
  const auto parts = make_parametrizable(whole_patch(shapes::torus()));
  ASSERT_GE(parts.size(), 2u);
  for (const auto& p : parts) {
    const EulerCheck ec = euler_check(p.patch);
    EXPECT_TRUE(ec.parametrizable);
    ASSERT_TRUE(ec.formula_genus.has_value());
    EXPECT_EQ(*ec.formula_genus, 0);
    // independent check through the Euler characteristic: chi = 2 - 2g - b
    const TopologyInfo& ti = ec.topology;
    EXPECT_EQ(ti.euler_characteristic(), 2 - ti.b);
  }
}

TEST(MakeParametrizable, SizeLimitRespected) {
  AtlasOptions opt;
  opt.max_triangles = 50;
  const Triangulation plate = shapes::grid_plate(12, 12, fixtures::all_cells());
  const auto parts = make_parametrizable(whole_patch(plate), opt);
  EXPECT_GE(parts.size(), 288u / 50u);
  for (const auto& p : parts) {
    EXPECT_LE(p.patch.num_triangles(), 50);
    ASSERT_FALSE(p.reasons.empty());
    EXPECT_EQ(p.reasons.front(), SplitReason::Size);
  }
  EXPECT_EQ(sorted_model_triangles(parts), iota_vec(plate.num_triangles()));
}

TEST(MakeParametrizable, UnionDisjointAndIdempotent) {
  std::vector<fixtures::Fixture> models = {
      {"sphere", shapes::icosphere(2)},          {"torus", shapes::torus()},
      {"holed_torus", shapes::holed_torus()},    {"closed_cylinder", shapes::closed_cylinder()},
      {"cube", shapes::cube()},                  {"coarse_torus", shapes::torus(8, 5)},
      {"concave_hole", shapes::concave_hole_plate()}, {"two_holes", fixtures::by_name("two_holes")}};
  AtlasOptions opt;
  opt.max_triangles = 400;
  for (const auto& fx : models) {
    const auto parts = make_parametrizable(whole_patch(fx.mesh), opt);
    EXPECT_EQ(sorted_model_triangles(parts), iota_vec(fx.mesh.num_triangles())) << fx.name;
    for (const auto& p : parts) {
      EXPECT_TRUE(euler_check(p.patch).parametrizable) << fx.name;
      EXPECT_LE(p.patch.num_triangles(), opt.max_triangles) << fx.name;
      EXPECT_EQ(atlas_check(p.patch, opt), std::nullopt) << fx.name;
      const auto again = make_parametrizable(p.patch, opt);
      ASSERT_EQ(again.size(), 1u) << fx.name;
      EXPECT_TRUE(again[0].reasons.empty());
      EXPECT_EQ(again[0].patch.parent_triangle, p.patch.parent_triangle) << fx.name;
    }
    // ordered by smallest model triangle
    for (std::size_t i = 1; i < parts.size(); ++i)
      EXPECT_LT(*std::min_element(parts[i - 1].patch.parent_triangle.begin(), parts[i - 1].patch.parent_triangle.end()),
                *std::min_element(parts[i].patch.parent_triangle.begin(), parts[i].patch.parent_triangle.end()));
  }
}

TEST(MakeParametrizable, SingleFailingTriangleIsReported) {
  AtlasOptions opt;
  opt.max_triangles = 0;
  try {
    make_parametrizable(whole_patch(shapes::unit_square()), opt);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Topology);
  }
}

TEST(BisectPatch, QuadSplitsInHalf) {
  const auto [a, b] = bisect_patch(whole_patch(shapes::unit_square()));
  EXPECT_EQ(a.num_triangles(), 1);
  EXPECT_EQ(b.num_triangles(), 1);
  std::set<int> all{a.parent_triangle[0], b.parent_triangle[0]};
  EXPECT_EQ(all, (std::set<int>{0, 1}));
}

TEST(BisectPatch, SingleTriangleThrows) {
  EXPECT_THROW(bisect_patch(whole_patch(fixtures::triangle())), Error);
}

TEST(BisectPatch, LongTubeCutOnce) {
  const Triangulation tube = shapes::cylinder_shell(10, 51, 1.0, 30.0);
  ASSERT_EQ(tube.num_triangles(), 1000);
  const Patch whole = whole_patch(tube);
  const auto [a, b] = bisect_patch(whole);
  EXPECT_EQ(a.num_triangles() + b.num_triangles(), 1000);
  EXPECT_LE(std::abs(a.num_triangles() - 500), 100);
  EXPECT_LE(std::abs(b.num_triangles() - 500), 100);
  for (const Patch* p : {&a, &b}) {
    Adjacency adj(p->mesh);
    EXPECT_EQ(count_components(p->mesh.triangles, adj), 1);
    // one original rim plus the cut
    EXPECT_EQ(p->topology.b, 2);
  }
  // cut edges: model edges with one side in each part form a single cycle
  std::set<int> in_a(a.parent_triangle.begin(), a.parent_triangle.end());
  const Adjacency adj(tube);
  std::map<int, int> degree;
  int cut = 0;
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (adj.edge_valence(e) != 2) continue;
    auto t = adj.edge_triangles(e);
    if (in_a.count(t[0]) == in_a.count(t[1])) continue;
    ++cut;
    for (int v : adj.edge(e)) ++degree[v];
  }
  EXPECT_GT(cut, 0);
  EXPECT_EQ(static_cast<int>(degree.size()), cut);
  for (const auto& [v, d] : degree) EXPECT_EQ(d, 2);
}

TEST(BisectPatch, BalancedOverSuite) {
  for (const auto& fx : fixtures::disk_suite()) {
    const Patch whole = whole_patch(fx.mesh);
    if (whole.num_triangles() < 40) continue;
    const auto [a, b] = bisect_patch(whole);
    const int t = whole.num_triangles();
    EXPECT_EQ(a.num_triangles() + b.num_triangles(), t) << fx.name;
    EXPECT_GT(a.num_triangles(), 0);
    EXPECT_GT(b.num_triangles(), 0);
    EXPECT_LE(std::abs(a.num_triangles() - b.num_triangles()), t / 5 + 1) << fx.name;
    for (const Patch* p : {&a, &b}) {
      Adjacency adj(p->mesh);
      EXPECT_EQ(count_components(p->mesh.triangles, adj), 1) << fx.name;
    }
  }
}

TEST(BuildBrep, CubeCounts) {
  const Atlas atlas = build_atlas(shapes::cube());
  EXPECT_EQ(atlas.brep.num_faces(), 6);
  EXPECT_EQ(atlas.brep.num_curves(), 12);
  EXPECT_EQ(atlas.brep.num_points(), 8);
  for (const BRepCurve& c : atlas.brep.curves) {
    EXPECT_EQ(c.faces.size(), 2u);
    EXPECT_TRUE(c.feature);
    EXPECT_EQ(c.vertices.size(), 2u);
  }
  for (const BRepFace& f : atlas.brep.faces) {
    ASSERT_EQ(f.loops.size(), 1u);
    EXPECT_EQ(f.loops[0].size(), 4u);
  }
  check_brep(atlas.model, atlas.brep, "cube");
}

TEST(BuildBrep, SingleDisk) {
  const Atlas atlas = build_atlas(shapes::grid_plate(6, 6, fixtures::all_cells()), 180.0);
  EXPECT_EQ(atlas.brep.num_faces(), 1);
  ASSERT_EQ(atlas.brep.num_curves(), 1);
  EXPECT_EQ(atlas.brep.num_points(), 0);
  EXPECT_TRUE(atlas.brep.curves[0].closed);
  EXPECT_EQ(atlas.brep.curves[0].vertices.size(), 24u);
  EXPECT_EQ(atlas.brep.curves[0].faces, std::vector<int>{0});
  check_brep(atlas.model, atlas.brep, "disk");
}

TEST(BuildBrep, SharedCurveHasTwoFaces) {
  // 4x2 plate, left and right halves as two faces
  const Triangulation plate = shapes::grid_plate(4, 2, fixtures::all_cells());
  const Triangulation model = tagged(plate, [&](int t) {
    const Tri& f = plate.triangles[t];
    const double cx = (plate.vertices[f[0]].x() + plate.vertices[f[1]].x() + plate.vertices[f[2]].x()) / 3.0;
    return cx < 0.5 ? 0 : 1;
  });
  const BRep brep = build_brep(model, Adjacency(model));
  EXPECT_EQ(brep.num_faces(), 2);
  EXPECT_EQ(brep.num_points(), 2);
  int shared = 0;
  for (const BRepCurve& c : brep.curves) {
    if (c.faces.size() != 2) continue;
    ++shared;
    EXPECT_EQ(c.faces, (std::vector<int>{0, 1}));
    EXPECT_EQ(c.vertices.size(), 3u);
    EXPECT_FALSE(c.feature);
  }
  EXPECT_EQ(shared, 1);
  check_brep(model, brep, "halves");
}

TEST(BuildBrep, UntaggedModelRejected) {
  const Triangulation t = shapes::unit_square();
  EXPECT_THROW(build_brep(t, Adjacency(t)), Error);
}

TEST(BuildBrep, StructureOverModels) {
  std::vector<fixtures::Fixture> models = {
      {"sphere", shapes::icosphere(2)},       {"torus", shapes::torus()},
      {"holed_torus", shapes::holed_torus()}, {"closed_cylinder", shapes::closed_cylinder()},
      {"tetra", shapes::tetrahedron()},       {"cylinder_shell", shapes::cylinder_shell()}};
  for (const auto& fx : fixtures::disk_suite()) models.push_back(fx);
  for (const auto& fx : models) {
    for (double angle : {40.0, 180.0}) {
      AtlasOptions opt;
      opt.max_triangles = 300;
      const Atlas atlas = build_atlas(fx.mesh, angle, opt);
      ASSERT_EQ(atlas.brep.num_faces(), static_cast<int>(atlas.patches.size()));
      for (int t = 0; t < atlas.model.num_triangles(); ++t) {
        const int f = atlas.model.patch_tags[t];
        ASSERT_GE(f, 0);
        const auto& pt = atlas.patches[f].patch.parent_triangle;
        EXPECT_NE(std::find(pt.begin(), pt.end(), t), pt.end());
      }
      for (const auto& p : atlas.patches) EXPECT_TRUE(euler_check(p.patch).parametrizable) << fx.name;
      check_brep(atlas.model, atlas.brep, fx.name);
    }
  }
}

TEST(BuildAtlas, ThreadCountDoesNotChangeResult) {
  for (const Triangulation& model : {shapes::torus(), shapes::closed_cylinder(), shapes::icosphere(3)}) {
    AtlasOptions one, many;
    one.max_triangles = many.max_triangles = 200;
    many.threads = 8;
    const Atlas a = build_atlas(model, 40.0, one);
    const Atlas b = build_atlas(model, 40.0, many);
    EXPECT_EQ(a.model.patch_tags, b.model.patch_tags);
    ASSERT_EQ(a.brep.num_curves(), b.brep.num_curves());
    for (int c = 0; c < a.brep.num_curves(); ++c) EXPECT_EQ(a.brep.curves[c].vertices, b.brep.curves[c].vertices);
  }
}

TEST(BuildAtlas, RejectsInvalidInput) {
  Triangulation flipped = shapes::cube();
  std::swap(flipped.triangles[0][1], flipped.triangles[0][2]);
  try {
    build_atlas(flipped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidMesh);
  }
}
