#include "texmvs/texture_prior.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "texmvs/error.h"

namespace texmvs {
namespace {

std::optional<Plane3> PlaneThrough(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                   const Eigen::Vector3d& c) {
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), 1e-300});
  if (n.squaredNorm() <= 1e-20 * scale * scale) return std::nullopt;
  return PlaneFromPointNormal(a, n.normalized());
}

int CountInliers(std::span<const Eigen::Vector3d> points, const Plane3& plane, double threshold) {
  int count = 0;
  for (const auto& p : points) count += std::abs(plane.SignedDistance(p)) <= threshold;
  return count;
}

std::optional<Plane3> LeastSquaresPlane(std::span<const Eigen::Vector3d> points,
                                        const Plane3& model, double threshold) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  int n = 0;
  for (const auto& p : points) {
    if (std::abs(model.SignedDistance(p)) > threshold) continue;
    centroid += p;
    ++n;
  }
  if (n < 3) return std::nullopt;
  centroid /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    if (std::abs(model.SignedDistance(p)) > threshold) continue;
    const Eigen::Vector3d d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) return std::nullopt;
  Eigen::Vector3d normal = solver.eigenvectors().col(0);
  if (normal.dot(model.normal) < 0.0) normal = -normal;
  return PlaneFromPointNormal(centroid, normal.normalized());
}

enum : std::uint64_t { kFitStream = 0x51, kDrawStream = 0x52 };

std::uint64_t LevelTag(SegmentationLevel level) {
  return level == SegmentationLevel::kFine ? 1 : 2;
}

}  // namespace

Grid<float> LocalVariance5x5(const GrayImage& gray) {
  const int w = gray.width();
  const int h = gray.height();
  Grid<float> out(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - 2), y1 = std::min(h - 1, y + 2);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - 2), x1 = std::min(w - 1, x + 2);
      double sum = 0.0;
      for (int v = y0; v <= y1; ++v)
        for (int u = x0; u <= x1; ++u) sum += gray(u, v);
      const int n = (x1 - x0 + 1) * (y1 - y0 + 1);
      const double mean = sum / n;
      double sq = 0.0;
      for (int v = y0; v <= y1; ++v)
        for (int u = x0; u <= x1; ++u) sq += (gray(u, v) - mean) * (gray(u, v) - mean);
      out(x, y) = static_cast<float>(sq / n);
    }
  }
  return out;
}

TexturenessMap ComputeTextureness(const GrayImage& gray) {
  TexturenessMap map;
  const Grid<float> var = LocalVariance5x5(gray);
  map.t = Grid<float>(gray.width(), gray.height());
  for (std::size_t i = 0; i < var.size(); ++i)
    map.t[i] = static_cast<float>(TexturenessFromVariance(var[i], map.eps_var, map.t_min));
  return map;
}

void RansacConfig::Validate() const {
  if (!(threshold > 0.0) || !(threshold_fraction > 0.0))
    throw Error(ErrorKind::kConfigError, "ransac threshold must be positive");
  if (max_iterations < 1) throw Error(ErrorKind::kConfigError, "ransac iterations must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw Error(ErrorKind::kConfigError, "ransac confidence must lie in (0, 1)");
}

PlanePrior FitPlaneRansac(std::span<const Eigen::Vector3d> points, double threshold,
                          const RansacConfig& config, StreamRng& rng) {
  PlanePrior prior;
  prior.support = static_cast<int>(points.size());
  if (prior.support < 3) return prior;

  const int n = prior.support;
  std::optional<Plane3> best;
  int best_inliers = -1;
  double needed = config.max_iterations;
  for (int iter = 0; iter < config.max_iterations && iter < needed; ++iter) {
    const int i = static_cast<int>(rng() % n);
    int j = static_cast<int>(rng() % (n - 1));
    if (j >= i) ++j;
    int k = static_cast<int>(rng() % (n - 2));
    if (k >= std::min(i, j)) ++k;
    if (k >= std::max(i, j)) ++k;
    const auto model = PlaneThrough(points[i], points[j], points[k]);
    if (!model) continue;
    const int inliers = CountInliers(points, *model, threshold);
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best = model;
      const double ratio = static_cast<double>(inliers) / n;
      const double miss = 1.0 - ratio * ratio * ratio;
      if (miss <= 0.0) {
        needed = 0.0;
      } else if (miss < 1.0) {
        needed = std::log(1.0 - config.confidence) / std::log(miss);
      }
    }
  }
  if (!best) return prior;

  if (const auto refit = LeastSquaresPlane(points, *best, threshold)) {
    const int refit_inliers = CountInliers(points, *refit, threshold);
    if (refit_inliers >= best_inliers) {
      best = refit;
      best_inliers = refit_inliers;
    }
  }
  prior.plane = best;
  prior.inliers = best_inliers;
  prior.inlier_ratio = static_cast<double>(best_inliers) / n;
  return prior;
}

std::vector<PlanePrior> FitSuperpixelPlanes(const SuperpixelSegmentation& seg,
                                            const DepthNormalMap& filtered_depth,
                                            const CameraView& view, const RansacConfig& config,
                                            double scene_size, std::uint64_t seed) {
  const int w = filtered_depth.width();
  const double threshold = config.Threshold(scene_size);
  std::vector<PlanePrior> priors(seg.segments.size());
  std::vector<Eigen::Vector3d> points;
  for (int k = 0; k < seg.size(); ++k) {
    points.clear();
    for (int idx : seg.segments[k].pixels) {
      const int x = idx % w, y = idx / w;
      if (!filtered_depth.valid(x, y)) continue;
      points.push_back(Unproject(view, Eigen::Vector2d(x, y), filtered_depth.depth(x, y)));
    }
    StreamRng rng({seed, kFitStream, static_cast<std::uint64_t>(k)});
    priors[k] = FitPlaneRansac(points, threshold, config, rng);
  }
  return priors;
}

double NeighborWeight(const Segment& a, const Segment& b, NeighborWeighting mode) {
  const double bc = BhattacharyyaCoefficient(a.histogram, b.histogram);
  return mode == NeighborWeighting::kBhattacharyyaCoefficient ? bc
                                                              : std::sqrt(std::max(0.0, 1.0 - bc));
}

std::optional<LocalPlane> PlaneHypothesisAtPixel(const CameraView& view,
                                                 const Eigen::Vector2i& pixel,
                                                 const Plane3& world_plane,
                                                 const DepthRange& range) {
  const Eigen::Vector2d p = pixel.cast<double>();
  const Plane3 cam = PlaneToCamera(view, world_plane);
  const auto depth = DepthOfPlaneAtPixel(view, cam, p);
  if (!depth || *depth < range.min || *depth > range.max) return std::nullopt;
  return LocalPlane{FaceCamera(view, p, cam.normal), *depth};
}

std::optional<LocalPlane> DrawPlanarHypothesis(const CameraView& view,
                                               const Eigen::Vector2i& pixel,
                                               const SuperpixelSegmentation& seg,
                                               std::span<const PlanePrior> priors,
                                               NeighborWeighting weighting,
                                               const DepthRange& range, StreamRng& rng) {
  const int k = seg.labels(pixel.x(), pixel.y());
  const PlanePrior& own = priors[k];
  if (rng.Uniform() < own.inlier_ratio && own.plane)
    return PlaneHypothesisAtPixel(view, pixel, *own.plane, range);

  const Segment& segment = seg.segments[k];
  std::vector<int> candidates;
  std::vector<double> weights;
  double total = 0.0;
  for (int j : segment.neighbors) {
    if (!priors[j].plane) continue;
    candidates.push_back(j);
    weights.push_back(NeighborWeight(segment, seg.segments[j], weighting));
    total += weights.back();
  }
  if (candidates.empty()) return std::nullopt;
  if (!(total > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0);
    total = static_cast<double>(weights.size());
  }
  const double target = rng.Uniform() * total;
  std::size_t pick = candidates.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) {
      pick = i;
      break;
    }
  }
  return PlaneHypothesisAtPixel(view, pixel, *priors[candidates[pick]].plane, range);
}

void PriorConfig::Validate() const {
  if (!(fine_divisor > 0.0) || !(coarse_divisor > 0.0))
    throw Error(ErrorKind::kConfigError, "superpixel divisors must be positive");
  if (superpixels.histogram_bins < 1)
    throw Error(ErrorKind::kConfigError, "histogram bins must be >= 1");
  ransac.Validate();
  speckle.Validate();
}

PlanarPriorContext BuildPlanarPriorContext(const CameraView& view, const PriorConfig& config) {
  PlanarPriorContext context;
  if (config.use_fine) {
    context.fine = SegmentSuperpixels(view.rgb, SuperpixelTarget(view.width, config.fine_divisor),
                                      config.superpixels, SegmentationLevel::kFine);
  }
  if (config.use_coarse) {
    context.coarse =
        SegmentSuperpixels(view.rgb, SuperpixelTarget(view.width, config.coarse_divisor),
                           config.superpixels, SegmentationLevel::kCoarse);
  }
  return context;
}

PlanarHypotheses BuildPlanarPriors(const CameraView& view, const PlanarPriorContext& context,
                                   const DepthNormalMap& depth, const PriorConfig& config,
                                   const DepthRange& range, double scene_size,
                                   std::uint64_t seed, int iteration) {
  const int w = depth.width();
  const int h = depth.height();
  PlanarHypotheses out{Grid<std::optional<LocalPlane>>(w, h), Grid<std::optional<LocalPlane>>(w, h)};
  const DepthNormalMap filtered = SpeckleFilter(depth, config.speckle, scene_size);

  auto draw_level = [&](const SuperpixelSegmentation& seg, Grid<std::optional<LocalPlane>>& dst) {
    const std::uint64_t tag = LevelTag(seg.level);
    const std::uint64_t base[] = {seed, static_cast<std::uint64_t>(view.view_id),
                                  static_cast<std::uint64_t>(iteration), tag};
    const std::uint64_t fit_seed = StreamRng({base[0], base[1], base[2], base[3]})();
    const auto priors = FitSuperpixelPlanes(seg, filtered, view, config.ransac, scene_size, fit_seed);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        StreamRng rng({base[0], base[1], base[2], base[3], kDrawStream,
                       static_cast<std::uint64_t>(y) * w + x});
        dst(x, y) = DrawPlanarHypothesis(view, {x, y}, seg, priors, config.weighting, range, rng);
      }
    }
  };
  if (context.fine) draw_level(*context.fine, out.fine);
  if (context.coarse) draw_level(*context.coarse, out.coarse);
  return out;
}

}  // namespace texmvs
