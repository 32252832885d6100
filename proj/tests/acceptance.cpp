// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <reparam/pipeline.hpp>
#include <reparam/io.hpp>
#include <reparam/verify.hpp>

#include "fixtures.hpp"
#include "shapes.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace reparam;
using fixtures::whole_patch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.detail += " (over the " + std::to_string(budget_s) + " s budget)";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d. %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Outcome stencil_oracle() {
  double mvc_err = 0.0, fem_err = 0.0;
  for (int n : {4, 8, 16, 64}) {
    const double h = 1.0 / n;
    const Triangulation mesh = build_square_mesh(SquareMeshKind::Structured, n);
    const auto pts = planar_points(mesh);
    const Stencil mvc = assemble_stencil<Vec2>(pts, mesh.triangles, Scheme::Mvc);
    const Stencil fem = assemble_stencil<Vec2>(pts, mesh.triangles, Scheme::Fem);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const int v = id(i, j);
        if (mvc.rows[v].size() != 6) return {false, "interior MVC row without 6 neighbours"};
        for (int nb : {id(i + 1, j), id(i - 1, j), id(i, j + 1), id(i, j - 1)}) {
          mvc_err = std::max(mvc_err, std::abs(mvc.weight(v, nb) - std::sqrt(2.0) / h));
          fem_err = std::max(fem_err, std::abs(fem.weight(v, nb) - 1.0));
        }
        for (int nb : {id(i + 1, j + 1), id(i - 1, j - 1)}) {
          mvc_err = std::max(mvc_err, std::abs(mvc.weight(v, nb) - (2.0 - std::sqrt(2.0)) / h));
          fem_err = std::max(fem_err, std::abs(fem.weight(v, nb)));
        }
      }
  }
  return {mvc_err <= 1e-12 && fem_err <= 1e-12,
          "max |MVC - {sqrt2/h, (2-sqrt2)/h}| = " + fmt(mvc_err) + ", max |FEM - {1, 0}| = " + fmt(fem_err) +
              " (tol 1e-12, n = 4..64)"};
}

Outcome convergence() {
  const auto fem_s = convergence_study(Scheme::Fem, SquareMeshKind::Structured);
  const auto fem_d = convergence_study(Scheme::Fem, SquareMeshKind::Delaunay);
  const auto mvc_s = convergence_study(Scheme::Mvc, SquareMeshKind::Structured);
  const auto mvc_d = convergence_study(Scheme::Mvc, SquareMeshKind::Delaunay);
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  const bool ok = in(fem_s.l2_slope, 1.85, 2.15) && in(fem_d.l2_slope, 1.85, 2.15) && in(fem_s.h1_slope, 0.9, 1.1) &&
                  in(fem_d.h1_slope, 0.9, 1.1) && in(mvc_d.l2_slope, 0.8, 1.2) && mvc_s.l2_slope < 0.5;
  return {ok, "FEM L2 " + fmt(fem_s.l2_slope) + "/" + fmt(fem_d.l2_slope) + " in [1.85,2.15], FEM H1 " +
                  fmt(fem_s.h1_slope) + "/" + fmt(fem_d.h1_slope) + " in [0.9,1.1], MVC delaunay L2 " +
                  fmt(mvc_d.l2_slope) + " in [0.8,1.2], MVC structured L2 " + fmt(mvc_s.l2_slope) +
                  " < 0.5 (n = 8..128, seed 42)"};
}

Outcome injectivity() {
  const auto suite = fixtures::disk_suite();
  int bad = 0;
  std::string names;
  for (const auto& fx : suite) {
    const Parametrization p = parametrize(whole_patch(fx.mesh));
    int nonpositive = 0;
    for (double a : p.signed_areas) nonpositive += !(a > 0.0);
    if (nonpositive) {
      ++bad;
      names += " " + fx.name;
    }
  }
  return {suite.size() >= 50 && bad == 0,
          std::to_string(suite.size()) + " fixtures, " + std::to_string(bad) + " with non-positive UV areas" + names};
}

Outcome neumann_convexity() {
  ParamOptions opt;
  opt.hole_policy = HolePolicy::Neumann;
  int holes = 0;
  double worst = 0.0;
  for (const auto& fx : fixtures::disk_suite()) {
    const Patch patch = whole_patch(fx.mesh);
    const Parametrization p = parametrize(patch, opt);
    for (int l : p.hole_loops) {
      ++holes;
      worst = std::max(worst, max_hole_interior_angle(patch.boundary_loops[l], p.uv));
    }
  }
  return {holes > 0 && worst <= kPi + 1e-9,
          std::to_string(holes) + " holes, max interior angle - pi = " + fmt(worst - kPi) + " (tol 1e-9)"};
}

Outcome hole_fill() {
  const Patch patch = whole_patch(shapes::concave_hole_plate());
  ParamOptions neumann, fill;
  neumann.hole_policy = HolePolicy::Neumann;
  fill.hole_policy = HolePolicy::Fill;
  const Parametrization a = parametrize(patch, neumann);
  const Parametrization b = parametrize(patch, fill);
  return {b.min_area() > a.min_area(), "min UV area neumann " + fmt(a.min_area()) + " -> fill " + fmt(b.min_area())};
}

Outcome refinement() {
  const Patch coarse = whole_patch(shapes::cylinder_shell());
  const double before = analyze_quality(coarse, parametrize(coarse)).min_conformity;
  Patch fine = coarse;
  RefineOptions opt;
  opt.max_rounds = 5;
  const RefineReport r = longest_edge_bisection(fine, opt);
  const double after = analyze_quality(fine, parametrize(fine)).min_conformity;
  const double a0 = total_area(coarse.mesh), a1 = total_area(fine.mesh);
  const double rel = std::abs(a1 - a0) / a0;
  return {after > before && rel <= 1e-12, "min sigma2/sigma1 " + fmt(before) + " -> " + fmt(after) + " after " +
                                              std::to_string(r.rounds) + " rounds (" + std::to_string(r.splits) +
                                              " splits), area rel. change " + fmt(rel) + " (tol 1e-12)"};
}

std::vector<std::pair<std::string, Triangulation>> pipeline_models() {
  return {{"cube", shapes::cube()},
          {"sphere", shapes::icosphere(3)},
          {"torus", shapes::torus()},
          {"cylinder", shapes::closed_cylinder()},
          {"concave_hole", shapes::concave_hole_plate()}};
}

Outcome exactness() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, model] : pipeline_models()) {
    const RemeshResult r = remesh_model(model);
    const OutputCheck c = check_output(model, r);
    ok = ok && c.ok() && c.validation.watertight == validate(model).watertight;
    detail += name + " " + std::to_string(r.output.num_triangles()) + "t dist/diag " +
              fmt(c.max_surface_distance / bbox_diagonal(model), 2) + (c.ok() ? "" : " INVALID") + "; ";
  }
  return {ok, detail + "tol 1e-12"};
}

Outcome topology() {
  const std::vector<std::pair<std::string, Triangulation>> canon{
      {"disk", shapes::grid_plate(5, 5, fixtures::all_cells())},
      {"annulus", shapes::square_hole_plate()},
      {"tetrahedron", shapes::tetrahedron()},
      {"torus", shapes::torus()},
      {"torus_with_hole", shapes::holed_torus()},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, mesh] : canon) {
    // genus from chi = V - E + F and the boundary loop count
    const Adjacency adj(mesh);
    const int chi = mesh.num_vertices() - adj.num_edges() + mesh.num_triangles();
    const int b = validate(mesh).boundary_loops;
    const int genus = (2 - chi - b) / 2;
    const EulerCheck e = euler_check(mesh);
    const bool agree = e.formula_genus && *e.formula_genus == genus;
    ok = ok && agree;
    detail += name + " g=" + std::to_string(genus) + (agree ? "" : " MISMATCH") + "; ";
  }
  int split_patches = 0;
  for (const auto& [name, mesh] : canon) {
    const Atlas atlas = build_atlas(mesh);
    for (const AtlasPatch& p : atlas.patches) {
      const EulerCheck e = euler_check(p.patch);
      ok = ok && e.parametrizable && e.formula_genus == 0 && e.topology.b >= 1;
      ++split_patches;
    }
  }
  return {ok, detail + std::to_string(split_patches) + " atlas patches all g=0, b>=1"};
}

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(REPARAM_CLI) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0 ? "" : "command failed: " + cmd;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("reparam_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  int compared = 0;
  auto models = pipeline_models();
  models.emplace_back("square_hole", shapes::square_hole_plate());
  for (const auto& [name, model] : models) {
    const fs::path in = dir / (name + ".obj");
    write_mesh(model, nullptr, in);
    for (int threads : {1, 8}) {
      const std::string err = run_cli("remesh " + in.string() + " --threads " + std::to_string(threads) + " -o " +
                                      (dir / (name + "_t" + std::to_string(threads) + ".msh")).string());
      if (!err.empty()) {
        ok = false;
        detail += err + "; ";
      }
    }
    const std::string a = slurp(dir / (name + "_t1.msh")), b = slurp(dir / (name + "_t8.msh"));
    if (a.empty() || a != b) {
      ok = false;
      detail += name + " differs; ";
    }
    ++compared;
  }
  fs::remove_all(dir);
  return {ok, detail + std::to_string(compared) + " models, --threads 1 vs 8 byte-identical"};
}

}  // namespace

int main() {
  criterion(1, "Stencil oracle", 1.0, stencil_oracle);
  criterion(2, "Convergence slopes", 60.0, convergence);
  criterion(3, "MVC injectivity suite", 30.0, injectivity);
  criterion(4, "Neumann hole convexity", 0.0, neumann_convexity);
  criterion(5, "Hole filling improvement", 0.0, hole_fill);
  criterion(6, "Refinement effect", 0.0, refinement);
  criterion(7, "Pipeline exactness", 0.0, exactness);
  criterion(8, "Topology formula and auto-split", 0.0, topology);
  criterion(9, "Thread determinism", 0.0, determinism);
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
