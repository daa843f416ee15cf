#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "texmvs/geometry.h"
#include "texmvs/photoconsistency.h"
#include "texmvs/rng.h"
#include "texmvs/scene.h"
#include "texmvs/texture_prior.h"
#include "texmvs/view_selection.h"

namespace texmvs {

enum class HypothesisKind {
  kCurrent,
  kPropagated,
  kRandomDepth,
  kRandomNormal,
  kRandomBoth,
  kPerturbedDepth,
  kPerturbedNormal,
  kPlanarFine,
  kPlanarCoarse,
};

const char* HypothesisKindName(HypothesisKind kind);

inline bool IsPlanarKind(HypothesisKind kind) {
  return kind == HypothesisKind::kPlanarFine || kind == HypothesisKind::kPlanarCoarse;
}

struct Hypothesis {
  LocalPlane plane;
  HypothesisKind kind;
};

using HypothesisSet = std::vector<Hypothesis>;

enum class SweepDirection { kLeftToRight, kTopToBottom, kRightToLeft, kBottomToTop };

// Direction of the 0-based iteration: rows and columns alternate.
SweepDirection SweepForIteration(int iteration);

// Pixel sequences of every line swept in `direction`, in processing order.
std::vector<std::vector<Eigen::Vector2i>> SweepLines(int width, int height,
                                                     SweepDirection direction);

struct PatchMatchConfig {
  int iterations = 5;
  double lambda_geom = 0.2;
  double perturb_depth_frac = 0.025;
  double perturb_normal_deg = 5.0;
  std::uint64_t seed = 0;
  bool enable_planar_priors = true;
  bool enable_texture_weighting = true;

  void Validate() const;
};

Eigen::Vector3d RandomFacingNormal(const CameraView& view, const Eigen::Vector2d& pixel,
                                   StreamRng& rng);
// Rotates `normal` by an angle drawn uniformly in [0, max_deg] about a random
// perpendicular axis, then faces it towards the camera.
Eigen::Vector3d PerturbNormal(const CameraView& view, const Eigen::Vector2d& pixel,
                              const Eigen::Vector3d& normal, double max_deg, StreamRng& rng);

struct HypothesisInputs {
  LocalPlane current;
  // Plane of the previous pixel on the line and where it is anchored.
  std::optional<std::pair<LocalPlane, Eigen::Vector2i>> previous;
  std::optional<LocalPlane> planar_fine;
  std::optional<LocalPlane> planar_coarse;
};

// current first, then propagated (when a previous pixel exists), the random
// and perturbed entries, and the planar entries when given. A propagated plane
// that is parallel to the pixel ray is omitted.
HypothesisSet BuildHypotheses(const CameraView& view, const Eigen::Vector2i& pixel,
                              const HypothesisInputs& inputs, const DepthRange& range,
                              const PatchMatchConfig& config, StreamRng& rng);

struct TextureWeighting {
  double photo;
  double geom;
};

// Photometric and geometric weights for a hypothesis kind at textureness t.
// Without texture weighting both are 1.
TextureWeighting KindWeights(HypothesisKind kind, double textureness, bool enabled);

struct CostContext {
  const CameraView* ref = nullptr;
  std::span<const CameraView* const> sources;
  // Parallel to `sources` or empty; the geometric term is used when non-empty.
  std::span<const DepthNormalMap* const> source_maps;
  MatchWindow window;
  double psi_max = 3.0;
  double lambda_geom = 0.2;
  bool texture_weighting = true;
  DepthRange range;
};

struct HypothesisScore {
  double cost = 0.0;
  std::vector<double> rho;  // per sampled source, parallel to the subset
};

// Mean weighted cost over the sampled subset. Empty for hypotheses that are
// invalid here: depth outside the range or a non-finite plane.
std::optional<HypothesisScore> ScoreHypothesis(const CostContext& ctx,
                                               const ReferencePatch& patch,
                                               const Eigen::Vector2i& pixel,
                                               const Hypothesis& hypothesis,
                                               std::span<const int> subset, double textureness);

struct Selection {
  int index = 0;  // into the hypothesis set; 0 (current) when everything is invalid
  std::optional<HypothesisScore> score;
};

// Argmin of the weighted cost; strict comparison in list order keeps `current`
// (index 0) on ties.
Selection EvaluateAndSelect(const CostContext& ctx, const ReferencePatch& patch,
                            const Eigen::Vector2i& pixel, std::span<const Hypothesis> hypotheses,
                            std::span<const int> subset, double textureness);

struct PatchMatchSettings {
  PatchMatchConfig patchmatch;
  MatchWindow window;
  double psi_max = 3.0;
  ViewSelectionParams views;
  PriorConfig prior;
  DepthRange range;
  double scene_size = 1.0;

  void Validate() const;
};

struct PatchMatchResult {
  DepthNormalMap map;
  ViewSelectionState visibility;
  TexturenessMap textureness;
};

struct PatchMatchInputs {
  // Source depth maps for the geometric term, parallel to the sources.
  std::span<const DepthNormalMap* const> source_maps;
  // Starting estimate; random initialisation when null.
  const DepthNormalMap* initial = nullptr;
  // Cached segmentations; built on demand when null.
  const PlanarPriorContext* prior_context = nullptr;
};

PatchMatchResult RunPatchMatch(const CameraView& ref, std::span<const CameraView* const> sources,
                               const PatchMatchSettings& settings,
                               const PatchMatchInputs& inputs = {});

}  // namespace texmvs
