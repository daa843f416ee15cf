#include "texmvs/view_selection.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "texmvs/error.h"

namespace texmvs {
namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

}  // namespace

void ViewSelectionParams::Validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::kConfigError, "views.gamma must lie in (0, 1)");
  }
  if (subset_size < 1) throw Error(ErrorKind::kConfigError, "views.subset_size must be >= 1");
  if (!(parallax_sigma_deg > 0.0)) {
    throw Error(ErrorKind::kConfigError, "views.parallax_sigma_deg must be positive");
  }
  if (!(u_anchor_rho >= -1.0 && u_anchor_rho <= 1.0)) {
    throw Error(ErrorKind::kConfigError, "views.u_anchor_rho must lie in [-1, 1]");
  }
}

ViewSelectionState::ViewSelectionState(int width, int height, int num_sources)
    : width_(width), height_(height), num_sources_(num_sources),
      q_(static_cast<std::size_t>(width) * height * num_sources, 0.5) {}

double HiddenEmission(const MatchWindow& win, const ViewSelectionParams& params) {
  return EvaluatePhotoLikelihood(params.u_anchor_rho, win).density;
}

std::vector<double> SmoothVisibility(std::span<const double> visible, double hidden,
                                     double initial_visible, double gamma) {
  const std::size_t n = visible.size();
  std::vector<double> posterior(n);
  if (n == 0) return posterior;
  const double stay = gamma;
  const double flip = 1.0 - gamma;

  // alpha[l] = P(Z_l | e_0..e_l), normalised; index 0 = hidden, 1 = visible.
  std::vector<std::array<double, 2>> alpha(n);
  {
    double a0 = (1.0 - initial_visible) * hidden;
    double a1 = initial_visible * visible[0];
    const double s = a0 + a1;
    alpha[0] = s > 0.0 ? std::array<double, 2>{a0 / s, a1 / s}
                       : std::array<double, 2>{1.0 - initial_visible, initial_visible};
  }
  for (std::size_t l = 1; l < n; ++l) {
    const double p0 = alpha[l - 1][0] * stay + alpha[l - 1][1] * flip;
    const double p1 = alpha[l - 1][0] * flip + alpha[l - 1][1] * stay;
    double a0 = p0 * hidden;
    double a1 = p1 * visible[l];
    const double s = a0 + a1;
    alpha[l] = s > 0.0 ? std::array<double, 2>{a0 / s, a1 / s} : std::array<double, 2>{p0, p1};
  }

  std::array<double, 2> beta{1.0, 1.0};
  for (std::size_t l = n; l-- > 0;) {
    const double g0 = alpha[l][0] * beta[0];
    const double g1 = alpha[l][1] * beta[1];
    posterior[l] = g1 / (g0 + g1);
    if (l == 0) break;
    const double b0 = stay * hidden * beta[0] + flip * visible[l] * beta[1];
    const double b1 = flip * hidden * beta[0] + stay * visible[l] * beta[1];
    const double s = b0 + b1;
    beta = s > 0.0 ? std::array<double, 2>{b0 / s, b1 / s} : std::array<double, 2>{0.5, 0.5};
  }
  return posterior;
}

void UpdateVisibilityLine(ViewSelectionState& state, std::span<const Eigen::Vector2i> line,
                          const std::vector<std::vector<double>>& densities, double hidden,
                          double gamma) {
  if (line.empty()) return;
  std::vector<double> emissions(line.size());
  for (int m = 0; m < state.num_sources(); ++m) {
    for (std::size_t i = 0; i < line.size(); ++i) emissions[i] = densities[i][m];
    const double initial = state.q(line[0].x(), line[0].y(), m);
    const std::vector<double> post = SmoothVisibility(emissions, hidden, initial, gamma);
    for (std::size_t i = 0; i < line.size(); ++i) state.q(line[i].x(), line[i].y(), m) = post[i];
  }
}

double ParallaxPrior(double angle_deg, const ViewSelectionParams& params) {
  const double d = angle_deg - params.parallax_peak_deg;
  if (angle_deg < 0.0 || d > 3.0 * params.parallax_sigma_deg) return 0.0;
  return std::exp(-d * d / (2.0 * params.parallax_sigma_deg * params.parallax_sigma_deg));
}

double ResolutionPrior(double footprint_ratio) {
  if (!(footprint_ratio > 0.0)) return 0.0;
  if (footprint_ratio < 0.5) return footprint_ratio / 0.5;
  if (footprint_ratio > 2.0) return std::max(0.0, 1.0 - (footprint_ratio - 2.0) / 2.0);
  return 1.0;
}

double FrontFacingPrior(const Eigen::Vector3d& world_normal, const Eigen::Vector3d& view_ray) {
  return std::max(0.0, -world_normal.normalized().dot(view_ray.normalized()));
}

std::vector<double> SourceWeights(const CameraView& ref, std::span<const CameraView* const> sources,
                                  const Eigen::Vector2i& pixel, const LocalPlane& plane,
                                  std::span<const double> q, const ViewSelectionParams& params) {
  const Eigen::Vector2d p = pixel.cast<double>();
  const Eigen::Vector3d point = Unproject(ref, p, plane.depth);
  const Eigen::Vector3d ref_center = ref.Center();
  const Eigen::Vector3d world_normal = ref.rotation.transpose() * plane.normal;
  const double ref_footprint = plane.depth / ref.fx;
  std::vector<double> weights(sources.size(), 0.0);
  for (std::size_t m = 0; m < sources.size(); ++m) {
    const CameraView& src = *sources[m];
    const Eigen::Vector3d src_center = src.Center();
    const Eigen::Vector3d to_ref = (ref_center - point).normalized();
    const Eigen::Vector3d to_src = (src_center - point).normalized();
    const double angle =
        std::acos(std::clamp(to_ref.dot(to_src), -1.0, 1.0)) * kRadToDeg;
    const double src_depth = (src.rotation * point + src.translation).z();
    if (!(src_depth > 0.0)) continue;
    const double ratio = (src_depth / src.fx) / ref_footprint;
    weights[m] = q[m] * ParallaxPrior(angle, params) * ResolutionPrior(ratio) *
                 FrontFacingPrior(world_normal, point - src_center);
  }
  return weights;
}

std::vector<int> SampleSourceSubset(std::span<const double> weights, int subset_size,
                                    StreamRng& rng) {
  if (weights.empty()) throw Error(ErrorKind::kNoSources, "no source views to sample from");
  const int n = static_cast<int>(weights.size());
  const int want = std::min(subset_size, n);
  std::vector<double> remaining(weights.begin(), weights.end());
  std::vector<int> chosen;
  chosen.reserve(want);
  const bool all_zero =
      std::none_of(remaining.begin(), remaining.end(), [](double w) { return w > 0.0; });
  if (all_zero) std::fill(remaining.begin(), remaining.end(), 1.0);
  while (static_cast<int>(chosen.size()) < want) {
    const double total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
    if (!(total > 0.0)) break;
    double u = rng.Uniform() * total;
    int pick = -1;
    for (int m = 0; m < n; ++m) {
      if (remaining[m] <= 0.0) continue;
      pick = m;
      if (u < remaining[m]) break;
      u -= remaining[m];
    }
    chosen.push_back(pick);
    remaining[pick] = 0.0;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace texmvs
