#pragma once

#include "reparam/atlas.hpp"
#include "reparam/quality.hpp"
#include "reparam/refine.hpp"
#include "reparam/remesh.hpp"

namespace reparam {

struct PipelineOptions {
  double feature_angle = kDefaultFeatureAngle;
  AtlasOptions atlas;
  ParamOptions param;
  bool refine = true;
  RefineOptions refine_options;
  RemeshOptions remesh;
  /// Target edge length; non-positive selects 5% of the bounding-box
  /// diagonal.
  double size = 0.0;
  int threads = 1;
};

/// Per-face intermediate results of the remeshing pipeline.
struct FaceResult {
  Patch patch;  // refined atlas patch
  RefineReport refine;
  Parametrization param;
  QualityReport quality;
  FaceMesh mesh;
};

struct RemeshResult {
  Atlas atlas;
  double size = 0.0;
  CurveSampling sampling;
  std::vector<FaceResult> faces;
  Triangulation output;  // patch_tags hold face ids
  std::vector<int> vertex_model_triangle;  // model triangle carrying each output vertex
};

inline double default_size(const Triangulation& model) { return 0.05 * bbox_diagonal(model); }

/// Refines and parametrizes one atlas face.
inline void prepare_face(const AtlasPatch& piece, const PipelineOptions& options, FaceResult& out) {
  out.patch = piece.patch;
  if (options.refine) {
    RefineOptions ro = options.refine_options;
    ro.split_boundary = false;
    out.refine = longest_edge_bisection(out.patch, ro);
  }
  out.param = parametrize(out.patch, options.param);
  out.quality = analyze_quality(out.patch, out.param);
}

/// Features, atlas, refinement, parametrization, curve discretization,
/// per-face UV meshing and stitching.
inline RemeshResult remesh_model(const Triangulation& input, const PipelineOptions& options = {}) {
  RemeshResult result;
  AtlasOptions atlas_options = options.atlas;
  atlas_options.threads = options.threads;
  result.atlas = build_atlas(input, options.feature_angle, atlas_options);
  const Atlas& atlas = result.atlas;
  result.size = options.size > 0.0 ? options.size : default_size(input);
  result.sampling = discretize_curves(atlas.model, atlas.brep, result.size);

  const int nf = static_cast<int>(atlas.patches.size());
  result.faces.resize(nf);
  parallel_for(nf, options.threads, [&](int f) {
    try {
      FaceResult& face = result.faces[f];
      prepare_face(atlas.patches[f], options, face);
      if (!face.param.injective) throw Error(ErrorKind::Solver, "parametrization is not injective");
      const UVLocator locator(face.param.uv, face.patch.mesh.triangles);
      const auto boundary = face_boundary(atlas.brep, result.sampling, f, face.patch, face.param);
      face.mesh = mesh_patch_uv(face.patch, face.param, {result.size}, boundary, locator, options.remesh);
      map_to_3d(face.mesh, face.patch, locator);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), f);
    }
  });

  std::vector<FaceMesh> meshes;
  meshes.reserve(nf);
  for (const FaceResult& face : result.faces) meshes.push_back(face.mesh);
  result.output = stitch(meshes, result.sampling);
  result.vertex_model_triangle = result.sampling.model_triangle;
  for (const FaceResult& face : result.faces)
    for (std::size_t v = 0; v < face.mesh.uv.size(); ++v)
      if (face.mesh.global[v] < 0) result.vertex_model_triangle.push_back(face.mesh.model_triangle[v]);
  return result;
}

/// Euclidean distance from p to triangle (a,b,c).
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return (p - (b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))))).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

/// Post-conditions of a remesh run.
struct OutputCheck {
  ValidationReport validation;
  double max_surface_distance = 0.0;  // over the carrying model triangles
  double tolerance = 0.0;             // 1e-12 x bounding-box diagonal
  int input_boundary_loops = 0;

  bool on_surface() const { return max_surface_distance <= tolerance; }
  bool ok() const {
    return validation.ok() && on_surface() && validation.boundary_loops == input_boundary_loops;
  }
};

inline OutputCheck check_output(const Triangulation& input, const RemeshResult& result) {
  OutputCheck check;
  check.validation = validate(result.output);
  check.input_boundary_loops = validate(input).boundary_loops;
  check.tolerance = 1e-12 * bbox_diagonal(input);
  for (int v = 0; v < result.output.num_vertices(); ++v) {
    const int t = result.vertex_model_triangle[v];
    if (t < 0) {
      check.max_surface_distance = std::numeric_limits<double>::infinity();
      continue;
    }
    const Tri& f = input.triangles[t];
    check.max_surface_distance = std::max(
        check.max_surface_distance,
        point_triangle_distance(result.output.vertices[v], input.vertices[f[0]], input.vertices[f[1]], input.vertices[f[2]]));
  }
  return check;
}

}  // namespace reparam
