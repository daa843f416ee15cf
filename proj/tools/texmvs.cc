#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "texmvs/config.h"
#include "texmvs/error.h"
#include "texmvs/fusion_eval.h"
#include "texmvs/pipeline.h"
#include "texmvs/scene_io.h"
#include "texmvs/synthetic.h"

namespace fs = std::filesystem;
using namespace texmvs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReconstructArgs {
  std::string scene_dir;
  std::string out_dir;
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool no_tw = false, no_cs = false, no_fs = false, no_dr = false;
  std::string ablate;
};

struct EvalArgs {
  std::string out_dir;
  std::string scene_dir;
  std::string config;
  std::vector<double> taus;
};

struct SynthArgs {
  std::string spec;
  std::string out_dir;
  bool preview = false;
};

RunConfig LoadConfigOrDefault(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return LoadRunConfig(path);
}

// Piecewise-linear blue -> cyan -> yellow -> red ramp over [0, 1].
Eigen::Vector3f Ramp(double v) {
  static const Eigen::Vector3f kStops[] = {{0.05f, 0.05f, 0.5f}, {0.0f, 0.8f, 0.9f},
                                           {0.95f, 0.9f, 0.1f}, {0.8f, 0.05f, 0.05f}};
  v = std::clamp(v, 0.0, 1.0) * 3.0;
  const int i = std::min(2, static_cast<int>(v));
  const float f = static_cast<float>(v - i);
  return kStops[i] * (1.0f - f) + kStops[i + 1] * f;
}

RgbImage ColorizeDepth(const DepthNormalMap& map, const DepthRange& range) {
  RgbImage out(map.width(), map.height(), Eigen::Vector3f::Zero());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (map.depth[i] > 0.0f) out[i] = Ramp((map.depth[i] - range.min) / (range.max - range.min));
  }
  return out;
}

// Black for missing estimates, ramp up to `scale` otherwise.
RgbImage ErrorHeatmap(const DepthNormalMap& map, const Grid<float>& truth, double scale) {
  RgbImage out(map.width(), map.height(), Eigen::Vector3f::Zero());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(truth[i] > 0.0f)) continue;
    out[i] = map.depth[i] > 0.0f ? Ramp(std::abs(map.depth[i] - truth[i]) / scale)
                                 : Eigen::Vector3f(0.0f, 0.0f, 0.0f);
  }
  return out;
}

EvalReport EvaluateCloud(const PointCloud& cloud, const GroundTruth& gt,
                         const std::vector<double>& taus) {
  if (gt.points.empty()) throw Error(ErrorKind::kMissingArtifact, "ground truth has no points.ply");
  return Evaluate(cloud.points, gt.points, taus);
}

void ApplyFlags(const ReconstructArgs& args, RunConfig& config) {
  if (args.seed) config.patchmatch.seed = *args.seed;
  if (args.no_tw) config.ablation.texture_weighting = false;
  if (args.no_cs) config.ablation.coarse_superpixels = false;
  if (args.no_fs) config.ablation.fine_superpixels = false;
  if (args.no_dr) config.ablation.depth_refinement = false;
}

void PrintReport(const std::string& label, const EvalReport& report) {
  std::printf("%s\n%12s %10s %13s %8s\n", label.c_str(), "tau", "accuracy", "completeness", "f1");
  for (const EvalRow& r : report.rows)
    std::printf("%12.6g %10.2f %13.2f %8.2f\n", r.tau, r.accuracy, r.completeness, r.f1);
}

int RunReconstruct(const ReconstructArgs& args) {
  RunConfig config = LoadConfigOrDefault(args.config);
  ApplyFlags(args, config);
  config.output_dir = args.out_dir;
  if (args.jobs < 1) throw UsageError("--jobs must be >= 1");
  const SceneBundle scene = LoadScene(args.scene_dir);
  auto log = [](const std::string& msg) { std::cerr << msg << "\n"; };

  if (args.ablate.empty()) {
    const Reconstruction result = Reconstruct(scene, config, args.jobs, log);
    WriteReconstruction(result, scene, config, args.out_dir);
    std::cerr << "wrote " << args.out_dir << "\n";
    return kExitOk;
  }
  if (args.ablate != "all") throw UsageError("--ablate only accepts 'all'");

  struct Variant {
    const char* name;
    void (*apply)(AblationFlags&);
  };
  static const Variant kVariants[] = {
      {"full", [](AblationFlags&) {}},
      {"no_tw", [](AblationFlags& f) { f.texture_weighting = false; }},
      {"no_cs", [](AblationFlags& f) { f.coarse_superpixels = false; }},
      {"no_fs", [](AblationFlags& f) { f.fine_superpixels = false; }},
      {"no_dr", [](AblationFlags& f) { f.depth_refinement = false; }},
  };
  const fs::path gt_dir = fs::path(args.scene_dir) / "gt";
  const bool have_gt = fs::exists(gt_dir / "points.ply");
  const GroundTruth gt = have_gt ? LoadGroundTruth(gt_dir, scene) : GroundTruth{};
  const std::vector<double> taus = config.eval.Thresholds(scene.scene_size);

  std::vector<std::pair<std::string, EvalReport>> reports;
  for (const Variant& v : kVariants) {
    RunConfig variant = config;
    v.apply(variant.ablation);
    const fs::path dir = fs::path(args.out_dir) / v.name;
    variant.output_dir = dir.string();
    std::cerr << "ablation run " << v.name << "\n";
    const Reconstruction result = Reconstruct(scene, variant, args.jobs, log);
    WriteReconstruction(result, scene, variant, dir);
    if (have_gt && !result.cloud.empty()) reports.emplace_back(v.name, EvaluateCloud(result.cloud, gt, taus));
    if (have_gt && result.cloud.empty()) reports.emplace_back(v.name, EvalReport{});
  }
  if (!have_gt) {
    std::cerr << "no ground truth under " << gt_dir << "; skipped comparison table\n";
    return kExitOk;
  }

  // F1 per threshold (rows) and variant (columns).
  std::ofstream table(fs::path(args.out_dir) / "ablation.tsv");
  nlohmann::json json = nlohmann::json::object();
  table << "tau";
  for (const auto& [name, report] : reports) table << "\t" << name;
  table << "\n";
  for (std::size_t k = 0; k < taus.size(); ++k) {
    table << taus[k];
    for (const auto& [name, report] : reports) table << "\t" << (k < report.rows.size() ? report.rows[k].f1 : 0.0);
    table << "\n";
  }
  for (const auto& [name, report] : reports) json[name] = nlohmann::json::parse(EvalReportJson(report));
  std::ofstream(fs::path(args.out_dir) / "ablation.json") << json.dump(2) << "\n";
  std::printf("F1 (%%) per variant\n%12s", "tau");
  for (const auto& [name, report] : reports) std::printf(" %8s", name.c_str());
  std::printf("\n");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    std::printf("%12.6g", taus[k]);
    for (const auto& [name, report] : reports)
      std::printf(" %8.2f", k < report.rows.size() ? report.rows[k].f1 : 0.0);
    std::printf("\n");
  }
  return kExitOk;
}

int RunEval(const EvalArgs& args) {
  const RunConfig config = LoadConfigOrDefault(args.config);
  const SceneBundle scene = LoadScene(args.scene_dir);
  const fs::path out(args.out_dir);
  const fs::path fused = out / "fused.ply";
  if (!fs::exists(fused)) throw Error(ErrorKind::kMissingArtifact, "missing " + fused.string());

  std::vector<DepthNormalMap> maps;
  std::vector<Grid<float>> textureness;
  for (const CameraView& v : scene.views) {
    for (const fs::path& p : {DepthPath(out, v.view_id), NormalPath(out, v.view_id),
                              TexturenessPath(out, v.view_id)}) {
      if (!fs::exists(p)) throw Error(ErrorKind::kMissingArtifact, "missing " + p.string());
    }
    maps.push_back(ReadDepthMap(DepthPath(out, v.view_id), NormalPath(out, v.view_id)));
    textureness.push_back(ReadPfmGray(TexturenessPath(out, v.view_id)));
  }
  const GroundTruth gt = LoadGroundTruth(fs::path(args.scene_dir) / "gt", scene);
  const std::vector<double> taus =
      args.taus.empty() ? config.eval.Thresholds(scene.scene_size) : args.taus;
  const PointCloud cloud = ReadPly(fused);
  const EvalReport report = EvaluateCloud(cloud, gt, taus);
  WriteEvalTsv(report, out / "eval.tsv");
  std::ofstream(out / "eval.json") << EvalReportJson(report) << "\n";
  PrintReport("point cloud evaluation", report);

  const double range = scene.depth_range.max - scene.depth_range.min;
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    const int id = scene.views[i].view_id;
    WritePng(ColorizeDepth(maps[i], scene.depth_range), out / ("depth_" + std::to_string(id) + ".png"), 8);
    if (gt.depth[i]) {
      WritePng(ErrorHeatmap(maps[i], *gt.depth[i], 0.05 * range),
               out / ("error_" + std::to_string(id) + ".png"), 8);
    }
  }

  std::vector<DepthNormalMap> est;
  std::vector<Grid<float>> truth, tex;
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    if (!gt.depth[i]) continue;
    est.push_back(maps[i]);
    truth.push_back(*gt.depth[i]);
    tex.push_back(textureness[i]);
  }
  if (!truth.empty()) {
    std::vector<double> thresholds;
    for (double f : config.eval.depth_error_fractions) thresholds.push_back(f * range);
    const DepthErrorReport depth_report = ComputeDepthErrorReport(
        est, truth, tex, thresholds, config.eval.textureness_cutoffs);
    WriteDepthErrorTsv(depth_report, out / "depth_error.tsv");
  }
  return kExitOk;
}

int RunSynth(const SynthArgs& args) {
  const SyntheticSpec spec = LoadSyntheticSpec(args.spec);
  if (spec.cameras.count < 1) throw UsageError("synthetic spec defines no cameras");
  const SyntheticScene syn = GenerateSyntheticScene(spec);
  fs::create_directories(args.out_dir);
  if (args.preview) {
    for (const CameraView& v : syn.scene.views)
      WritePng(v.rgb, fs::path(args.out_dir) / ("preview_" + std::to_string(v.view_id) + ".png"), 8);
    return kExitOk;
  }
  SaveScene(syn.scene, args.out_dir);
  SaveGroundTruth(syn.truth, syn.scene, fs::path(args.out_dir) / "gt");
  std::cerr << "wrote " << syn.scene.views.size() << " views to " << args.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Textureness-aware PatchMatch multi-view stereo"};
  app.require_subcommand(1);

  ReconstructArgs rec;
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "estimate depth maps and fuse them");
  reconstruct->add_option("scene", rec.scene_dir, "scene directory")->required();
  reconstruct->add_option("output", rec.out_dir, "output directory")->required();
  reconstruct->add_option("--config", rec.config, "run configuration (TOML)");
  reconstruct->add_option("--seed", rec.seed, "random seed override");
  reconstruct->add_option("--jobs", rec.jobs, "views estimated concurrently");
  reconstruct->add_flag("--no-tw", rec.no_tw, "disable texture weighting");
  reconstruct->add_flag("--no-cs", rec.no_cs, "disable coarse superpixel priors");
  reconstruct->add_flag("--no-fs", rec.no_fs, "disable fine superpixel priors");
  reconstruct->add_flag("--no-dr", rec.no_dr, "disable depth refinement");
  reconstruct->add_option("--ablate", rec.ablate, "'all': full run plus one run per disabled component");

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a reconstruction against ground truth");
  eval->add_option("output", ev.out_dir, "reconstruction directory")->required();
  eval->add_option("scene", ev.scene_dir, "scene directory holding gt/")->required();
  eval->add_option("--config", ev.config, "run configuration (TOML)");
  eval->add_option("--taus", ev.taus, "distance thresholds in scene units")->delimiter(',');

  SynthArgs syn;
  CLI::App* synth = app.add_subcommand("synth", "render a synthetic scene");
  synth->add_option("spec", syn.spec, "synthetic scene spec (TOML)")->required();
  synth->add_option("output", syn.out_dir, "scene directory to write")->required();
  synth->add_flag("--preview", syn.preview, "only write PNG renders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*reconstruct) return RunReconstruct(rec);
    if (*eval) return RunEval(ev);
    if (*synth) return RunSynth(syn);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << ErrorKindName(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::kConfigError ? kExitUsage : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
