// reparam: surface atlas, parametrization and remeshing tool.

#include "reparam/reparam.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace reparam;

namespace {

// ---------------------------------------------------------------- logging

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("REPARAM_LOG");
    const std::string s = env ? env : "warn";
    if (s == "error") return LogLevel::Error;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------- options

struct InputArgs {
  std::string path;
  std::string format;  // empty: from extension
  double weld_tolerance = 0.0;
};

struct OutputArgs {
  std::string path;
  std::string format;
};

struct AtlasArgs {
  double angle = kDefaultFeatureAngle;
  int max_triangles = 100000;
  std::string scheme = "mvc";
  std::string hole_policy = "auto";
  int hole_threshold = 100;
  int threads = 1;
};

struct RefineArgs {
  bool enabled = true;
  std::string threshold = "auto";
  int rounds = 10;
};

void add_input(CLI::App* app, InputArgs& in) {
  app->add_option("input", in.path, "Input surface (stl, obj, msh)")->required();
  app->add_option("--input-format", in.format, "Override the input format")
      ->check(CLI::IsMember({"stl", "stl-ascii", "stl-binary", "obj", "msh"}));
  app->add_option("--weld-tolerance", in.weld_tolerance, "Merge STL vertices closer than this (0: exact)")
      ->check(CLI::NonNegativeNumber);
}

void add_output(CLI::App* app, OutputArgs& out) {
  app->add_option("-o,--output", out.path, "Output mesh; a JSON summary is written next to it");
  app->add_option("--output-format", out.format, "Override the output format")
      ->check(CLI::IsMember({"msh", "obj", "stl", "stl-binary", "stl-ascii"}));
}

void add_atlas(CLI::App* app, AtlasArgs& a) {
  app->add_option("--angle", a.angle, "Feature angle in degrees (180 disables)")->check(CLI::Range(0.0, 180.0));
  app->add_option("--max-triangles", a.max_triangles, "Patch size limit")->check(CLI::PositiveNumber);
  app->add_option("--scheme", a.scheme, "Difference scheme")->check(CLI::IsMember({"mvc", "fem"}));
  app->add_option("--hole-policy", a.hole_policy, "Hole treatment")->check(CLI::IsMember({"auto", "neumann", "fill"}));
  app->add_option("--hole-threshold", a.hole_threshold, "Largest hole closed by a pseudo-center")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--threads", a.threads, "Worker threads (0: hardware)")->check(CLI::NonNegativeNumber);
}

void add_refine(CLI::App* app, RefineArgs& r) {
  app->add_option("--refine-threshold", r.threshold, "Bisection length threshold or 'auto'");
  app->add_option("--refine-rounds", r.rounds, "Bisection rounds")->check(CLI::NonNegativeNumber);
  app->add_flag("!--no-refine", r.enabled, "Skip longest-edge bisection");
}

std::optional<MeshFormat> format_arg(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_format(s);
}

ParamOptions param_options(const AtlasArgs& a) {
  ParamOptions p;
  p.scheme = parse_scheme(a.scheme);
  p.hole_policy = parse_hole_policy(a.hole_policy);
  p.hole_threshold = a.hole_threshold;
  return p;
}

AtlasOptions atlas_options(const AtlasArgs& a) {
  AtlasOptions o;
  o.max_triangles = a.max_triangles;
  o.trial = param_options(a);
  o.threads = a.threads;
  return o;
}

RefineOptions refine_options(const RefineArgs& r) {
  RefineOptions o;
  o.max_rounds = r.rounds;
  if (r.threshold != "auto") {
    try {
      std::size_t used = 0;
      o.threshold = std::stod(r.threshold, &used);
      if (used != r.threshold.size() || !(o.threshold > 0.0)) throw std::invalid_argument(r.threshold);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "--refine-threshold expects a positive length or 'auto'");
    }
  }
  return o;
}

Triangulation load_input(const InputArgs& in) {
  LoadOptions lo;
  lo.weld_tolerance = in.weld_tolerance;
  Triangulation tri = load_surface(in.path, format_arg(in.format), lo);
  log(LogLevel::Info, "loaded " + in.path + ": " + std::to_string(tri.num_vertices()) + " vertices, " +
                          std::to_string(tri.num_triangles()) + " triangles");
  return tri;
}

// ---------------------------------------------------------------- JSON

json to_json(const ValidationReport& r) {
  return {{"ok", r.ok()},
          {"manifold", r.manifold && r.vertex_manifold},
          {"orientation_consistent", r.orientation_consistent},
          {"watertight", r.watertight},
          {"boundary_loops", r.boundary_loops},
          {"boundary_edges", r.boundary_edges},
          {"degenerate_triangles", r.degenerate_triangles.size()},
          {"isolated_vertices", r.isolated_vertices}};
}

json to_json(const EulerCheck& c) {
  const TopologyInfo& t = c.topology;
  json j = {{"p", t.p}, {"e", t.e}, {"t", t.t}, {"b", t.b}, {"h", t.h}, {"g", t.g}, {"chi", t.euler_characteristic()}};
  j["formula_genus"] = c.formula_genus ? json(*c.formula_genus) : json(nullptr);
  j["connected"] = c.connected;
  j["parametrizable"] = c.parametrizable;
  return j;
}

json to_json(const QualityReport& q) {
  return {{"min_conformity", q.min_conformity},
          {"max_conformity", q.max_conformity},
          {"mean_conformity", q.mean_conformity},
          {"rank_deficient", q.rank_deficient},
          {"histogram", q.histogram}};
}

json to_json(const Parametrization& p) {
  json holes = json::array();
  for (std::size_t i = 0; i < p.hole_loops.size(); ++i)
    holes.push_back({{"loop", p.hole_loops[i]}, {"treatment", to_string(p.hole_treatment[i])}});
  return {{"injective", p.injective},   {"flipped", p.flipped.size()}, {"min_uv_area", p.min_area()},
          {"residual", p.residual},     {"holes", holes},              {"clamped_angles", p.clamped_angles},
          {"iterative_solver", p.used_iterative}};
}

json to_json(const RefineReport& r) {
  return {{"threshold", r.threshold}, {"rounds", r.rounds}, {"splits", r.splits}, {"converged", r.converged}};
}

json atlas_json(const Atlas& atlas) {
  json patches = json::array();
  for (std::size_t f = 0; f < atlas.patches.size(); ++f) {
    const AtlasPatch& ap = atlas.patches[f];
    json reasons = json::array();
    for (SplitReason r : ap.reasons) reasons.push_back(to_string(r));
    patches.push_back({{"id", f},
                       {"feature_patch", ap.feature_patch},
                       {"triangles", ap.patch.num_triangles()},
                       {"vertices", ap.patch.num_vertices()},
                       {"topology", to_json(euler_check(ap.patch))},
                       {"split_reasons", reasons}});
  }
  return {{"feature_angle", atlas.features.threshold_deg},
          {"feature_edges", atlas.features.count()},
          {"feature_patches", atlas.segmentation.count},
          {"faces", atlas.patches.size()},
          {"brep", {{"points", atlas.brep.num_points()}, {"curves", atlas.brep.num_curves()}, {"faces", atlas.brep.num_faces()}}},
          {"patches", patches}};
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string summary_path(const std::string& out) { return out + ".json"; }

// ---------------------------------------------------------------- commands

int cmd_info(const InputArgs& in) {
  const Triangulation tri = load_input(in);
  json j = {{"status", "ok"}, {"command", "info"}, {"input", in.path}};
  j["vertices"] = tri.num_vertices();
  j["triangles"] = tri.num_triangles();
  const ValidationReport report = validate(tri);
  j["validation"] = to_json(report);
  if (report.manifold) j["topology"] = to_json(euler_check(tri));
  j["bbox_diagonal"] = bbox_diagonal(tri);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_atlas(const InputArgs& in, const OutputArgs& out, const AtlasArgs& a, const std::string& uv_dir) {
  Stopwatch clock;
  const Triangulation tri = load_input(in);
  const Atlas atlas = build_atlas(tri, a.angle, atlas_options(a));
  log(LogLevel::Info, "atlas: " + std::to_string(atlas.patches.size()) + " faces");

  const ParamOptions po = param_options(a);
  std::vector<Parametrization> params(atlas.patches.size());
  parallel_for(static_cast<int>(atlas.patches.size()), a.threads, [&](int f) {
    try {
      params[f] = parametrize(atlas.patches[f].patch, po);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), f);
    }
  });

  json j = {{"status", "ok"}, {"command", "atlas"}, {"input", in.path}};
  j["atlas"] = atlas_json(atlas);
  for (std::size_t f = 0; f < params.size(); ++f) j["atlas"]["patches"][f]["parametrization"] = to_json(params[f]);
  if (!uv_dir.empty()) {
    fs::create_directories(uv_dir);
    for (std::size_t f = 0; f < params.size(); ++f)
      write_text_file(fs::path(uv_dir) / ("patch_" + std::to_string(f) + ".uv"),
                      format_uv_dump(atlas.patches[f].patch, params[f]));
  }
  if (!out.path.empty()) {
    write_mesh(atlas.model, &atlas.brep, out.path, format_arg(out.format));
    j["output"] = out.path;
  }
  j["seconds"] = clock.seconds();
  if (!out.path.empty()) write_json(summary_path(out.path), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_remesh(const InputArgs& in, const OutputArgs& out, const AtlasArgs& a, const RefineArgs& r, double size,
               int passes) {
  Stopwatch clock;
  const Triangulation tri = load_input(in);
  PipelineOptions po;
  po.feature_angle = a.angle;
  po.atlas = atlas_options(a);
  po.param = param_options(a);
  po.refine = r.enabled;
  po.refine_options = refine_options(r);
  po.remesh.passes = passes;
  po.size = size;
  po.threads = a.threads;
  const RemeshResult result = remesh_model(tri, po);
  const OutputCheck check = check_output(tri, result);

  json j = {{"status", "ok"}, {"command", "remesh"}, {"input", in.path}};
  j["size"] = result.size;
  j["atlas"] = atlas_json(result.atlas);
  json faces = json::array();
  for (std::size_t f = 0; f < result.faces.size(); ++f) {
    const FaceResult& face = result.faces[f];
    faces.push_back({{"id", f},
                     {"refine", to_json(face.refine)},
                     {"parametrization", to_json(face.param)},
                     {"quality", to_json(face.quality)},
                     {"triangles", face.mesh.triangles.size()},
                     {"metric_band_fraction", face.mesh.stats.band_fraction()}});
  }
  j["faces"] = faces;
  j["output_mesh"] = {{"vertices", result.output.num_vertices()},
                      {"triangles", result.output.num_triangles()},
                      {"validation", to_json(check.validation)},
                      {"input_boundary_loops", check.input_boundary_loops},
                      {"max_surface_distance", check.max_surface_distance},
                      {"surface_tolerance", check.tolerance}};
  if (!check.ok()) {
    std::ostringstream msg;
    msg << "output check failed: valid=" << check.validation.ok() << " loops=" << check.validation.boundary_loops << "/"
        << check.input_boundary_loops << " distance=" << check.max_surface_distance;
    throw Error(ErrorKind::Internal, msg.str());
  }
  if (!out.path.empty()) {
    const Adjacency adj(result.output);
    const BRep brep = build_brep(result.output, adj);
    write_mesh(result.output, &brep, out.path, format_arg(out.format));
    j["output"] = out.path;
  }
  j["seconds"] = clock.seconds();
  if (!out.path.empty()) write_json(summary_path(out.path), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_quality(const InputArgs& in, const OutputArgs& out, const AtlasArgs& a, const RefineArgs& r) {
  Stopwatch clock;
  const Triangulation tri = load_input(in);
  const Atlas atlas = build_atlas(tri, a.angle, atlas_options(a));
  PipelineOptions po;
  po.param = param_options(a);
  po.refine = r.enabled;
  po.refine_options = refine_options(r);
  const int nf = static_cast<int>(atlas.patches.size());
  std::vector<FaceResult> faces(nf);
  parallel_for(nf, a.threads, [&](int f) {
    try {
      prepare_face(atlas.patches[f], po, faces[f]);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), f);
    }
  });

  json j = {{"status", "ok"}, {"command", "quality"}, {"input", in.path}, {"faces", nf}};
  json patches = json::array();
  for (int f = 0; f < nf; ++f)
    patches.push_back({{"id", f},
                       {"triangles", faces[f].patch.num_triangles()},
                       {"refine", to_json(faces[f].refine)},
                       {"parametrization", to_json(faces[f].param)},
                       {"quality", to_json(faces[f].quality)}});
  j["patches"] = patches;

  if (!out.path.empty()) {
    // refined patches concatenated, with per-triangle SVD fields
    Triangulation merged;
    ElementField conf{"conformity", {}}, s1{"sigma1", {}}, s2{"sigma2", {}};
    for (int f = 0; f < nf; ++f) {
      const Patch& p = faces[f].patch;
      const int base = merged.num_vertices();
      merged.vertices.insert(merged.vertices.end(), p.mesh.vertices.begin(), p.mesh.vertices.end());
      for (int t = 0; t < p.num_triangles(); ++t) {
        const Tri& g = p.mesh.triangles[t];
        merged.triangles.push_back({g[0] + base, g[1] + base, g[2] + base});
        merged.patch_tags.push_back(f);
        conf.values.push_back(faces[f].quality.conformity[t]);
        s1.values.push_back(faces[f].quality.sigma1[t]);
        s2.values.push_back(faces[f].quality.sigma2[t]);
      }
    }
    const std::vector<ElementField> fields{conf, s1, s2};
    write_mesh(merged, nullptr, out.path, format_arg(out.format), fields);
    j["output"] = out.path;
  }
  j["seconds"] = clock.seconds();
  if (!out.path.empty()) write_json(summary_path(out.path), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_convergence(const std::string& scheme, const std::string& family, std::vector<int> levels,
                    std::uint32_t seed, const std::string& out, int threads) {
  Stopwatch clock;
  std::vector<Scheme> schemes;
  if (scheme == "all" || scheme == "fem") schemes.push_back(Scheme::Fem);
  if (scheme == "all" || scheme == "mvc") schemes.push_back(Scheme::Mvc);
  std::vector<SquareMeshKind> kinds;
  if (family == "all" || family == "structured") kinds.push_back(SquareMeshKind::Structured);
  if (family == "all" || family == "delaunay") kinds.push_back(SquareMeshKind::Delaunay);
  if (levels.empty()) levels = default_levels();

  std::vector<std::pair<SquareMeshKind, Scheme>> runs;
  for (SquareMeshKind k : kinds)
    for (Scheme s : schemes) runs.emplace_back(k, s);
  std::vector<ConvergenceResult> results(runs.size());
  parallel_for(static_cast<int>(runs.size()), threads,
               [&](int i) { results[i] = convergence_study(runs[i].second, runs[i].first, levels, seed); });

  std::ostringstream csv;
  csv.precision(17);
  csv << "family,scheme,n,h,vertices,triangles,l2,h1\n";
  json summary = {{"status", "ok"}, {"command", "convergence"}, {"seed", seed}, {"levels", levels}};
  json runs_json = json::array();
  for (const ConvergenceResult& r : results) {
    for (const ConvergenceLevel& l : r.levels)
      csv << to_string(r.kind) << ',' << to_string(r.scheme) << ',' << l.n << ',' << l.h << ',' << l.vertices << ','
          << l.triangles << ',' << l.error.l2 << ',' << l.error.h1 << '\n';
    runs_json.push_back(
        {{"family", to_string(r.kind)}, {"scheme", to_string(r.scheme)}, {"l2_slope", r.l2_slope}, {"h1_slope", r.h1_slope}});
  }
  summary["runs"] = runs_json;
  summary["seconds"] = clock.seconds();
  if (out.empty()) {
    std::cout << csv.str();
    log(LogLevel::Info, summary.dump());
  } else {
    write_text_file(out, csv.str());
    summary["output"] = out;
    write_json(summary_path(out), summary);
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

int report_error(const std::string& kind, const std::string& message, std::optional<int> patch, int code) {
  json j = {{"status", "error"}, {"kind", kind}, {"message", message}};
  j["patch"] = patch ? json(*patch) : json(nullptr);
  std::cout << j.dump(2) << '\n';
  log(LogLevel::Error, message);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface atlas construction, parametrization and remeshing"};
  app.require_subcommand(1);

  InputArgs in;
  OutputArgs out;
  AtlasArgs atlas_args;
  RefineArgs refine_args;
  double size = 0.0;
  int passes = RemeshOptions{}.passes;
  std::string uv_dir;
  std::string conv_scheme = "all", conv_family = "all";
  std::vector<int> levels;
  std::uint32_t seed = kDefaultMeshSeed;

  auto* info = app.add_subcommand("info", "Validate a surface and report its topology");
  add_input(info, in);

  auto* atlas = app.add_subcommand("atlas", "Build and parametrize the atlas; write the tagged model");
  add_input(atlas, in);
  add_output(atlas, out);
  add_atlas(atlas, atlas_args);
  atlas->add_option("--uv-dump", uv_dir, "Directory for per-patch UV dumps");

  auto* remesh = app.add_subcommand("remesh", "Full remeshing pipeline");
  add_input(remesh, in);
  add_output(remesh, out);
  add_atlas(remesh, atlas_args);
  add_refine(remesh, refine_args);
  remesh->add_option("--size", size, "Target edge length (default: 5% of the bounding-box diagonal)")
      ->check(CLI::PositiveNumber);
  remesh->add_option("--passes", passes, "Local-operation passes")->check(CLI::NonNegativeNumber);

  auto* quality = app.add_subcommand("quality", "Per-patch singular-value report");
  add_input(quality, in);
  add_output(quality, out);
  add_atlas(quality, atlas_args);
  add_refine(quality, refine_args);

  auto* conv = app.add_subcommand("convergence", "Laplace convergence study on the unit square");
  conv->add_option("--scheme", conv_scheme, "Scheme")->check(CLI::IsMember({"mvc", "fem", "all"}));
  conv->add_option("--mesh", conv_family, "Mesh family")->check(CLI::IsMember({"structured", "delaunay", "all"}));
  conv->add_option("--levels", levels, "Cells per side, increasing")->delimiter(',');
  conv->add_option("--seed", seed, "Jitter seed of the delaunay family");
  conv->add_option("-o,--output", out.path, "CSV output; the slopes summary goes next to it");
  conv->add_option("--threads", atlas_args.threads, "Worker threads")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), std::nullopt, 2);
  }

  try {
    if (info->parsed()) return cmd_info(in);
    if (atlas->parsed()) return cmd_atlas(in, out, atlas_args, uv_dir);
    if (remesh->parsed()) return cmd_remesh(in, out, atlas_args, refine_args, size, passes);
    if (quality->parsed()) return cmd_quality(in, out, atlas_args, refine_args);
    if (conv->parsed()) return cmd_convergence(conv_scheme, conv_family, levels, seed, out.path, atlas_args.threads);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), e.patch(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), std::nullopt, 1);
  }
  return 2;
}
