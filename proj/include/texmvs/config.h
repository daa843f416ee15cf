#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "texmvs/fusion_eval.h"
#include "texmvs/patchmatch.h"
#include "texmvs/refinement.h"
#include "texmvs/texture_prior.h"
#include "texmvs/toml.h"
#include "texmvs/view_selection.h"

namespace texmvs {

// Component toggles of the ablation study. Each flag switches one part of the
// method off when false.
struct AblationFlags {
  bool texture_weighting = true;
  bool coarse_superpixels = true;
  bool fine_superpixels = true;
  bool depth_refinement = true;
};

struct EvalConfig {
  std::vector<double> taus;  // absolute, scene units
  std::vector<double> tau_fractions = {0.0025, 0.005, 0.01, 0.02, 0.05, 0.1};  // of scene_size
  std::vector<double> depth_error_fractions = {0.001, 0.0025, 0.005, 0.01, 0.02, 0.05, 0.1};
  std::vector<double> textureness_cutoffs = {0.55, 0.6, 0.7, 0.8, 0.9, 1.01};

  // Absolute thresholds followed by the scene-relative ones, sorted and unique.
  std::vector<double> Thresholds(double scene_size) const;
};

struct RunConfig {
  MatchWindow window;
  double psi_max = 3.0;
  ViewSelectionParams views;
  PatchMatchConfig patchmatch;
  PriorConfig prior;
  SpeckleConfig speckle;
  FillConfig fill;
  FusionConfig fusion;
  EvalConfig eval;
  AblationFlags ablation;
  bool geometric_round = true;  // second pass with the geometric term
  std::string output_dir;

  void Validate() const;

  // Settings handed to the per-view optimizer with ablations applied.
  PatchMatchSettings EffectiveSettings(const SceneBundle& scene) const;
};

// Unknown sections or keys are rejected so typos do not silently fall back to
// defaults.
RunConfig ParseRunConfig(const toml::Document& doc);
RunConfig LoadRunConfig(const std::filesystem::path& path);
toml::Document RunConfigToToml(const RunConfig& config);
std::string RunConfigToTomlString(const RunConfig& config);

}  // namespace texmvs
