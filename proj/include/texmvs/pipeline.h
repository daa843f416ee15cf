#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "texmvs/config.h"
#include "texmvs/scene.h"
#include "texmvs/scene_io.h"
#include "texmvs/texture_prior.h"

namespace texmvs {

struct Reconstruction {
  std::vector<DepthNormalMap> maps;      // parallel to scene.views, after refinement
  std::vector<Grid<float>> textureness;  // parallel to scene.views
  PointCloud cloud;
  std::map<std::string, double> timings;  // seconds per stage
};

using ProgressLog = std::function<void(const std::string&)>;

// Photometric round over every view, optional geometric round seeded with the
// first round's maps, refinement and fusion. Views run on up to `jobs` threads;
// per-pixel random streams keep the output independent of scheduling.
Reconstruction Reconstruct(const SceneBundle& scene, const RunConfig& config, int jobs = 1,
                           const ProgressLog& log = {});

// Writes depth_<id>.pfm, normal_<id>.pfm, textureness_<id>.pfm, fused.ply and
// run.json (config echo, scene summary and timings).
void WriteReconstruction(const Reconstruction& result, const SceneBundle& scene,
                         const RunConfig& config, const std::filesystem::path& out_dir);

std::string RunJson(const Reconstruction& result, const SceneBundle& scene,
                    const RunConfig& config);

std::filesystem::path DepthPath(const std::filesystem::path& dir, int view_id);
std::filesystem::path NormalPath(const std::filesystem::path& dir, int view_id);
std::filesystem::path TexturenessPath(const std::filesystem::path& dir, int view_id);

}  // namespace texmvs
