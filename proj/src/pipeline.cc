#include "texmvs/pipeline.h"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "texmvs/error.h"
#include "texmvs/patchmatch.h"
#include "texmvs/refinement.h"

namespace texmvs {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Runs task(i) for i in [0, n) on up to `jobs` threads and rethrows the first
// failure.
void ParallelFor(int n, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

nlohmann::json TomlToJson(const toml::Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, toml::Array>) {
          nlohmann::json a = nlohmann::json::array();
          for (const auto& e : x) a.push_back(TomlToJson(e));
          return a;
        } else {
          return x;
        }
      },
      v.data);
}

}  // namespace

std::filesystem::path DepthPath(const std::filesystem::path& dir, int view_id) {
  return dir / ("depth_" + std::to_string(view_id) + ".pfm");
}
std::filesystem::path NormalPath(const std::filesystem::path& dir, int view_id) {
  return dir / ("normal_" + std::to_string(view_id) + ".pfm");
}
std::filesystem::path TexturenessPath(const std::filesystem::path& dir, int view_id) {
  return dir / ("textureness_" + std::to_string(view_id) + ".pfm");
}

Reconstruction Reconstruct(const SceneBundle& scene, const RunConfig& config, int jobs,
                           const ProgressLog& log) {
  config.Validate();
  const int n = static_cast<int>(scene.views.size());
  if (n < 2) throw Error(ErrorKind::kNoSources, "reconstruction needs at least two views");
  const PatchMatchSettings settings = config.EffectiveSettings(scene);
  settings.Validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };

  Reconstruction result;
  std::vector<std::vector<const CameraView*>> sources(n);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      if (s != r) sources[r].push_back(&scene.views[s]);

  auto start = Clock::now();
  std::vector<PlanarPriorContext> contexts(n);
  if (settings.patchmatch.enable_planar_priors) {
    ParallelFor(n, jobs, [&](int r) { contexts[r] = BuildPlanarPriorContext(scene.views[r], settings.prior); });
  }
  result.timings["segmentation"] = Seconds(start);

  start = Clock::now();
  std::vector<DepthNormalMap> round(n);
  result.textureness.resize(n);
  ParallelFor(n, jobs, [&](int r) {
    PatchMatchInputs in;
    in.prior_context = &contexts[r];
    PatchMatchResult pm = RunPatchMatch(scene.views[r], sources[r], settings, in);
    round[r] = std::move(pm.map);
    result.textureness[r] = std::move(pm.textureness.t);
    say("photometric round done for view " + std::to_string(scene.views[r].view_id));
  });
  result.timings["photometric_round"] = Seconds(start);

  if (config.geometric_round) {
    start = Clock::now();
    std::vector<DepthNormalMap> next(n);
    ParallelFor(n, jobs, [&](int r) {
      std::vector<const DepthNormalMap*> source_maps;
      for (int s = 0; s < n; ++s)
        if (s != r) source_maps.push_back(&round[s]);
      PatchMatchInputs in;
      in.prior_context = &contexts[r];
      in.initial = &round[r];
      in.source_maps = source_maps;
      next[r] = RunPatchMatch(scene.views[r], sources[r], settings, in).map;
      say("geometric round done for view " + std::to_string(scene.views[r].view_id));
    });
    round = std::move(next);
    result.timings["geometric_round"] = Seconds(start);
  }

  start = Clock::now();
  if (config.ablation.depth_refinement) {
    ParallelFor(n, jobs, [&](int r) {
      DepthNormalMap filtered = SpeckleFilter(round[r], config.speckle, scene.scene_size);
      if (config.fill.enable)
        filtered = MedianFill(filtered, scene.views[r].gray, config.fill, config.window);
      round[r] = std::move(filtered);
    });
  }
  result.timings["refinement"] = Seconds(start);

  start = Clock::now();
  result.cloud = Fuse(scene.views, round, config.fusion);
  result.timings["fusion"] = Seconds(start);
  say("fused " + std::to_string(result.cloud.size()) + " points");
  result.maps = std::move(round);
  return result;
}

std::string RunJson(const Reconstruction& result, const SceneBundle& scene,
                    const RunConfig& config) {
  nlohmann::json j;
  const toml::Document doc = RunConfigToToml(config);
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [name, table] : doc.tables) {
    nlohmann::json section = nlohmann::json::object();
    for (const auto& [key, value] : table.entries()) section[key] = TomlToJson(value);
    cfg[name] = section;
  }
  j["config"] = cfg;
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : scene.views) views.push_back(v.view_id);
  j["scene"] = {{"views", views},
                {"depth_min", scene.depth_range.min},
                {"depth_max", scene.depth_range.max},
                {"scene_size", scene.scene_size}};
  j["refinement_applied"] = config.ablation.depth_refinement;
  j["fused_points"] = result.cloud.size();
  j["timings_s"] = result.timings;
  return j.dump(2);
}

void WriteReconstruction(const Reconstruction& result, const SceneBundle& scene,
                         const RunConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + out_dir.string());
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    const int id = scene.views[i].view_id;
    WriteDepthMap(result.maps[i], DepthPath(out_dir, id), NormalPath(out_dir, id));
    WritePfm(result.textureness[i], TexturenessPath(out_dir, id));
  }
  WritePly(result.cloud, out_dir / "fused.ply");
  std::ofstream out(out_dir / "run.json");
  out << RunJson(result, scene, config) << "\n";
  if (!out) throw Error(ErrorKind::kIoError, "cannot write run.json");
}

}  // namespace texmvs
