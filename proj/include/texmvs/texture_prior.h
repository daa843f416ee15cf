#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "texmvs/geometry.h"
#include "texmvs/image.h"
#include "texmvs/refinement.h"
#include "texmvs/rng.h"
#include "texmvs/scene.h"
#include "texmvs/superpixels.h"

namespace texmvs {

// ---------------------------------------------------------------------------
// Textureness

inline constexpr double kTexturenessEpsVar = 0.00005;
inline constexpr double kTexturenessMin = 0.5;

struct TexturenessMap {
  Grid<float> t;
  double eps_var = kTexturenessEpsVar;
  double t_min = kTexturenessMin;
};

// t = (Var + eps) / (Var + eps / t_min), Var taken over the 5x5 patch (clipped
// at the border).
inline double TexturenessFromVariance(double variance, double eps_var = kTexturenessEpsVar,
                                      double t_min = kTexturenessMin) {
  return (variance + eps_var) / (variance + eps_var / t_min);
}

// Population variance of the clipped 5x5 patch around every pixel.
Grid<float> LocalVariance5x5(const GrayImage& gray);

TexturenessMap ComputeTextureness(const GrayImage& gray);

struct TextureWeights {
  double plus;   // 0.8 + 0.2 t
  double minus;  // 1.0 - 0.2 t
};

inline TextureWeights ComputeTextureWeights(double t) {
  return {0.8 + 0.2 * t, 1.0 - 0.2 * t};
}

// ---------------------------------------------------------------------------
// Plane priors

struct RansacConfig {
  enum class ThresholdMode { kAbsolute, kSceneFraction };
  ThresholdMode mode = ThresholdMode::kAbsolute;
  double threshold = 0.10;            // scene units, kAbsolute
  double threshold_fraction = 0.005;  // of scene_size, kSceneFraction
  int max_iterations = 1000;
  double confidence = 0.99;

  double Threshold(double scene_size) const {
    return mode == ThresholdMode::kAbsolute ? threshold : threshold_fraction * scene_size;
  }
  void Validate() const;
};

struct PlanePrior {
  std::optional<Plane3> plane;  // world frame; empty when support < 3
  double inlier_ratio = 0.0;    // inliers / support
  int support = 0;              // |P_k|
  int inliers = 0;
};

// RANSAC over 3-point samples with adaptive termination, followed by a
// least-squares refit on the inliers. The refit model is kept only when it
// does not lose inliers.
PlanePrior FitPlaneRansac(std::span<const Eigen::Vector3d> points, double threshold,
                          const RansacConfig& config, StreamRng& rng);

// Fits one world-frame plane per segment to the unprojected valid depths.
std::vector<PlanePrior> FitSuperpixelPlanes(const SuperpixelSegmentation& seg,
                                            const DepthNormalMap& filtered_depth,
                                            const CameraView& view, const RansacConfig& config,
                                            double scene_size, std::uint64_t seed);

enum class NeighborWeighting {
  kBhattacharyyaCoefficient,  // similar appearance -> more likely
  kBhattacharyyaDistance,     // sqrt(1 - BC)
};

double NeighborWeight(const Segment& a, const Segment& b, NeighborWeighting mode);

// Draws the planar hypothesis for a pixel of segment k: with probability r_k the
// segment's own plane, otherwise a neighbour's plane chosen proportionally to
// histogram weight among neighbours that have a plane. Empty when nothing
// applies or the plane is ray-parallel / outside the depth range here.
std::optional<LocalPlane> DrawPlanarHypothesis(const CameraView& view,
                                               const Eigen::Vector2i& pixel,
                                               const SuperpixelSegmentation& seg,
                                               std::span<const PlanePrior> priors,
                                               NeighborWeighting weighting,
                                               const DepthRange& range, StreamRng& rng);

// Plane evaluated at a pixel; empty on ray-parallel planes or out-of-range depth.
std::optional<LocalPlane> PlaneHypothesisAtPixel(const CameraView& view,
                                                 const Eigen::Vector2i& pixel,
                                                 const Plane3& world_plane,
                                                 const DepthRange& range);

struct PriorConfig {
  double fine_divisor = 20.0;
  double coarse_divisor = 30.0;
  bool use_fine = true;
  bool use_coarse = true;
  RansacConfig ransac;
  SuperpixelParams superpixels;
  NeighborWeighting weighting = NeighborWeighting::kBhattacharyyaCoefficient;
  SpeckleConfig speckle;

  void Validate() const;
};

// Segmentations depend only on the image, so they are built once per view.
struct PlanarPriorContext {
  std::optional<SuperpixelSegmentation> fine;
  std::optional<SuperpixelSegmentation> coarse;
};

PlanarPriorContext BuildPlanarPriorContext(const CameraView& view, const PriorConfig& config);

struct PlanarHypotheses {
  Grid<std::optional<LocalPlane>> fine;
  Grid<std::optional<LocalPlane>> coarse;
};

// Speckle-filters the current depth map, fits per-segment planes at each
// enabled level and draws one hypothesis per pixel and level. Draws use
// independent streams keyed by (seed, view, iteration, level, pixel).
PlanarHypotheses BuildPlanarPriors(const CameraView& view, const PlanarPriorContext& context,
                                   const DepthNormalMap& depth, const PriorConfig& config,
                                   const DepthRange& range, double scene_size,
                                   std::uint64_t seed, int iteration);

}  // namespace texmvs
