#include "texmvs/fusion_eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "json.hpp"

#include "texmvs/error.h"
#include "texmvs/geometry.h"

namespace texmvs {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class VoxelHash {
 public:
  VoxelHash(std::span<const Eigen::Vector3d> points, double cell) : points_(points), cell_(cell) {
    for (int i = 0; i < static_cast<int>(points.size()); ++i) cells_[KeyOf(points[i])].push_back(i);
  }

  double Nearest(const Eigen::Vector3d& q, double radius) const {
    const CellKey c = KeyOf(q);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (int i : it->second) best = std::min(best, (points_[i] - q).norm());
        }
      }
    }
    return best <= radius ? best : std::numeric_limits<double>::infinity();
  }

 private:
  CellKey KeyOf(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  std::span<const Eigen::Vector3d> points_;
  double cell_;
  std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

double PercentWithin(const std::vector<double>& distances, double tau) {
  if (distances.empty()) return 0.0;
  const auto n = std::count_if(distances.begin(), distances.end(), [tau](double d) { return d <= tau; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(distances.size());
}

}  // namespace

void FusionConfig::Validate() const {
  if (!(max_reproj_error > 0.0) || !(max_depth_error > 0.0) || !(max_normal_error_deg > 0.0))
    throw Error(ErrorKind::kConfigError, "fusion tolerances must be positive");
  if (min_consistent_views < 2)
    throw Error(ErrorKind::kConfigError, "fusion.min_consistent_views must be >= 2");
}

PointCloud Fuse(std::span<const CameraView> views, std::span<const DepthNormalMap> maps,
                const FusionConfig& config) {
  config.Validate();
  if (views.size() != maps.size())
    throw Error(ErrorKind::kDimensionMismatch, "fusion needs one map per view");
  std::vector<int> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return views[a].view_id < views[b].view_id; });
  for (int i : order) {
    if (maps[i].width() != views[i].width || maps[i].height() != views[i].height)
      throw Error(ErrorKind::kDimensionMismatch, "map size differs from its view");
  }

  std::vector<Grid<std::uint8_t>> consumed;
  for (const CameraView& v : views) consumed.emplace_back(v.width, v.height, 0);
  const double cos_normal = std::cos(config.max_normal_error_deg * kDegToRad);

  struct Member {
    int view, x, y;
    Eigen::Vector3d point;
    Eigen::Vector3d normal;
  };
  std::vector<Member> members;
  PointCloud cloud;
  for (int r : order) {
    const CameraView& ref = views[r];
    const DepthNormalMap& ref_map = maps[r];
    for (int y = 0; y < ref.height; ++y) {
      for (int x = 0; x < ref.width; ++x) {
        if (consumed[r](x, y) || !ref_map.valid(x, y)) continue;
        const Eigen::Vector2d p(x, y);
        const Eigen::Vector3d point = Unproject(ref, p, ref_map.depth(x, y));
        const Eigen::Vector3d normal =
            (ref.rotation.transpose() * ref_map.normal(x, y).cast<double>()).normalized();
        members.clear();
        members.push_back({r, x, y, point, normal});
        for (int s : order) {
          if (s == r) continue;
          const CameraView& src = views[s];
          const Projection proj = Project(src, point);
          if (!(proj.depth > 0.0)) continue;
          const int sx = static_cast<int>(std::lround(proj.pixel.x()));
          const int sy = static_cast<int>(std::lround(proj.pixel.y()));
          if (!maps[s].depth.contains(sx, sy) || consumed[s](sx, sy) || !maps[s].valid(sx, sy))
            continue;
          const double src_depth = maps[s].depth(sx, sy);
          if (std::abs(src_depth - proj.depth) > config.max_depth_error * proj.depth) continue;
          const Eigen::Vector3d src_point = Unproject(src, Eigen::Vector2d(sx, sy), src_depth);
          const Projection back = Project(ref, src_point);
          if (!(back.depth > 0.0) || (back.pixel - p).norm() > config.max_reproj_error) continue;
          const Eigen::Vector3d src_normal =
              (src.rotation.transpose() * maps[s].normal(sx, sy).cast<double>()).normalized();
          if (src_normal.dot(normal) < cos_normal) continue;
          members.push_back({s, sx, sy, src_point, src_normal});
        }
        if (static_cast<int>(members.size()) < config.min_consistent_views) continue;
        Eigen::Vector3d sum_p = Eigen::Vector3d::Zero(), sum_n = Eigen::Vector3d::Zero();
        Eigen::Vector3d sum_c = Eigen::Vector3d::Zero();
        for (const Member& m : members) {
          sum_p += m.point;
          sum_n += m.normal;
          sum_c += views[m.view].rgb(m.x, m.y).cast<double>();
          consumed[m.view](m.x, m.y) = 1;
        }
        const double n = static_cast<double>(members.size());
        cloud.points.push_back(sum_p / n);
        cloud.normals.push_back(sum_n.normalized().cast<float>());
        cloud.colors.push_back((sum_c / n).cast<float>());
      }
    }
  }
  return cloud;
}

std::vector<double> NearestDistances(std::span<const Eigen::Vector3d> queries,
                                     std::span<const Eigen::Vector3d> targets, double radius) {
  std::vector<double> out(queries.size(), std::numeric_limits<double>::infinity());
  if (targets.empty() || !(radius > 0.0)) return out;
  const VoxelHash hash(targets, radius);
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = hash.Nearest(queries[i], radius);
  return out;
}

EvalReport Evaluate(std::span<const Eigen::Vector3d> model, std::span<const Eigen::Vector3d> truth,
                    std::span<const double> taus) {
  if (model.empty()) throw Error(ErrorKind::kEmptyCloud, "reconstructed cloud is empty");
  if (truth.empty()) throw Error(ErrorKind::kEmptyCloud, "ground-truth cloud is empty");
  EvalReport report;
  if (taus.empty()) return report;
  const double tau_max = *std::max_element(taus.begin(), taus.end());
  if (!(tau_max > 0.0)) throw Error(ErrorKind::kConfigError, "thresholds must be positive");
  const auto model_to_truth = NearestDistances(model, truth, tau_max);
  const auto truth_to_model = NearestDistances(truth, model, tau_max);
  for (double tau : taus) {
    EvalRow row;
    row.tau = tau;
    row.accuracy = PercentWithin(model_to_truth, tau);
    row.completeness = PercentWithin(truth_to_model, tau);
    const double sum = row.accuracy + row.completeness;
    row.f1 = sum > 0.0 ? 2.0 * row.accuracy * row.completeness / sum : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

void WriteEvalTsv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << "tau\taccuracy\tcompleteness\tf1\n";
  char line[160];
  for (const EvalRow& r : report.rows) {
    std::snprintf(line, sizeof line, "%.9g\t%.6f\t%.6f\t%.6f\n", r.tau, r.accuracy,
                  r.completeness, r.f1);
    out << line;
  }
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path.string());
}

std::string EvalReportJson(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"tau", r.tau},
                    {"accuracy", r.accuracy},
                    {"completeness", r.completeness},
                    {"f1", r.f1}});
  }
  return nlohmann::json{{"rows", rows}}.dump(2);
}

DepthErrorReport ComputeDepthErrorReport(std::span<const DepthNormalMap> estimates,
                                         std::span<const Grid<float>> truth,
                                         std::span<const Grid<float>> textureness,
                                         std::span<const double> thresholds,
                                         std::span<const double> cutoffs) {
  if (estimates.size() != truth.size() || textureness.size() != truth.size())
    throw Error(ErrorKind::kDimensionMismatch, "depth error report needs parallel view lists");
  std::vector<double> errors;
  std::vector<float> texture;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    const Grid<float>& gt = truth[v];
    if (estimates[v].width() != gt.width() || estimates[v].height() != gt.height() ||
        textureness[v].width() != gt.width() || textureness[v].height() != gt.height()) {
      throw Error(ErrorKind::kDimensionMismatch, "depth maps differ in size");
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (!(gt[i] > 0.0f)) continue;
      const float d = estimates[v].depth[i];
      errors.push_back(d > 0.0f ? std::abs(static_cast<double>(d) - gt[i])
                                : std::numeric_limits<double>::infinity());
      texture.push_back(textureness[v][i]);
    }
  }

  DepthErrorReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  report.pixels = errors.size();
  for (double t : thresholds) report.cdf.push_back(PercentWithin(errors, t));
  for (double c : cutoffs) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (texture[i] < c) subset.push_back(errors[i]);
    std::vector<double> row;
    for (double t : thresholds) row.push_back(PercentWithin(subset, t));
    report.binned.push_back(std::move(row));
    report.binned_pixels.push_back(subset.size());
  }
  return report;
}

void WriteDepthErrorTsv(const DepthErrorReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << "threshold\tall";
  for (double c : report.cutoffs) out << "\tt_below_" << c;
  out << "\n";
  for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
    out << report.thresholds[k] << "\t" << report.cdf[k];
    for (std::size_t c = 0; c < report.cutoffs.size(); ++c) out << "\t" << report.binned[c][k];
    out << "\n";
  }
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path.string());
}

}  // namespace texmvs
