#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "texmvs/scene.h"
#include "texmvs/scene_io.h"

namespace texmvs {

struct FusionConfig {
  double max_reproj_error = 1.0;      // pixels
  double max_depth_error = 0.01;      // relative
  double max_normal_error_deg = 20.0;
  int min_consistent_views = 3;       // including the pixel being fused

  void Validate() const;
};

// Greedy pixel consumption. Views are visited in view-id order so the result
// does not depend on the order of `views`; `maps` is parallel to `views`.
PointCloud Fuse(std::span<const CameraView> views, std::span<const DepthNormalMap> maps,
                const FusionConfig& config);

struct EvalRow {
  double tau = 0.0;
  double accuracy = 0.0;      // percent
  double completeness = 0.0;  // percent
  double f1 = 0.0;            // percent
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

// Nearest-neighbour distance from every query to `targets`, exact up to
// `radius`; queries with nothing within `radius` get +infinity.
std::vector<double> NearestDistances(std::span<const Eigen::Vector3d> queries,
                                     std::span<const Eigen::Vector3d> targets, double radius);

// Accuracy: % of model points within tau of the ground truth. Completeness: %
// of ground-truth points within tau of the model. Throws EmptyCloud.
EvalReport Evaluate(std::span<const Eigen::Vector3d> model, std::span<const Eigen::Vector3d> truth,
                    std::span<const double> taus);

void WriteEvalTsv(const EvalReport& report, const std::filesystem::path& path);
std::string EvalReportJson(const EvalReport& report);

struct DepthErrorReport {
  std::vector<double> thresholds;
  std::vector<double> cdf;  // % of GT-valid pixels with error <= threshold
  std::size_t pixels = 0;
  std::vector<double> cutoffs;
  // binned[c][k]: % of pixels with textureness < cutoffs[c] whose error <= thresholds[k].
  std::vector<std::vector<double>> binned;
  std::vector<std::size_t> binned_pixels;
};

// Pixels are those with valid ground truth; a missing estimate counts as an
// infinite error. All three lists are parallel over views.
DepthErrorReport ComputeDepthErrorReport(std::span<const DepthNormalMap> estimates,
                                         std::span<const Grid<float>> truth,
                                         std::span<const Grid<float>> textureness,
                                         std::span<const double> thresholds,
                                         std::span<const double> cutoffs);

void WriteDepthErrorTsv(const DepthErrorReport& report, const std::filesystem::path& path);

}  // namespace texmvs
