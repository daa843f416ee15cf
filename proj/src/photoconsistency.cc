#include "texmvs/photoconsistency.h"

#include <algorithm>
#include <cmath>

#include "texmvs/error.h"

namespace texmvs {
namespace {

constexpr double kMinVariance = 1e-10;

}  // namespace

void MatchWindow::Validate() const {
  if (half_size < 1 || !(sigma_spatial > 0.0) || !(sigma_color > 0.0) || !(sigma_rho > 0.0)) {
    throw Error(ErrorKind::kConfigError,
                "match window needs half_size >= 1 and positive sigmas");
  }
}

ReferencePatch::ReferencePatch(const GrayImage& ref_gray, int x, int y, const MatchWindow& win) {
  const int h = win.half_size;
  const double center = ref_gray(x, y);
  samples_.reserve(static_cast<std::size_t>(2 * h + 1) * (2 * h + 1));
  for (int dy = -h; dy <= h; ++dy) {
    for (int dx = -h; dx <= h; ++dx) {
      const int qx = x + dx;
      const int qy = y + dy;
      if (!ref_gray.contains(qx, qy)) continue;
      const double value = ref_gray(qx, qy);
      samples_.push_back({static_cast<double>(qx), static_cast<double>(qy),
                          BilateralWeight(dx * dx + dy * dy, value - center, win), value});
    }
  }
}

double ReferencePatch::Ncc(const GrayImage& src, const Eigen::Matrix3d& h) const {
  const int n = sample_count();
  if (n < kMinWindowSamples) return -1.0;
  const double max_x = src.width() - 1;
  const double max_y = src.height() - 1;
  int outside = 0;
  double sw = 0.0, sr = 0.0, ss = 0.0, srr = 0.0, sss = 0.0, srs = 0.0;
  for (const Sample& q : samples_) {
    const double hz = h(2, 0) * q.x + h(2, 1) * q.y + h(2, 2);
    if (!(hz > 1e-12)) {
      ++outside;
      continue;
    }
    const double u = (h(0, 0) * q.x + h(0, 1) * q.y + h(0, 2)) / hz;
    const double v = (h(1, 0) * q.x + h(1, 1) * q.y + h(1, 2)) / hz;
    if (!(u >= 0.0 && v >= 0.0 && u <= max_x && v <= max_y)) {
      ++outside;
      continue;
    }
    const double s = SampleBilinear(src, u, v);
    const double w = q.weight;
    sw += w;
    sr += w * q.value;
    ss += w * s;
    srr += w * q.value * q.value;
    sss += w * s * s;
    srs += w * q.value * s;
  }
  if (2 * outside > n) return -1.0;
  const double mr = sr / sw;
  const double ms = ss / sw;
  const double var_r = srr / sw - mr * mr;
  const double var_s = sss / sw - ms * ms;
  if (var_r < kMinVariance || var_s < kMinVariance) return 0.0;
  const double cov = srs / sw - mr * ms;
  return std::clamp(cov / std::sqrt(var_r * var_s), -1.0, 1.0);
}

double BilateralNcc(const CameraView& ref, const CameraView& src, const Eigen::Vector2i& pixel,
                    const LocalPlane& plane, const MatchWindow& win) {
  const auto h = PlaneHomography::Create(ref, src, pixel.cast<double>(), plane);
  if (!h) return -1.0;
  return ReferencePatch(ref.gray, pixel.x(), pixel.y(), win).Ncc(src.gray, h->matrix());
}

PhotoLikelihood EvaluatePhotoLikelihood(double rho, const MatchWindow& win) {
  const double e = 1.0 - rho;
  return {std::exp(-e * e / (2.0 * win.sigma_rho * win.sigma_rho)), e};
}

double GeometricCost(const CameraView& ref, const CameraView& src, const DepthNormalMap& src_map,
                     const Eigen::Vector2i& pixel, const LocalPlane& plane, double psi_max) {
  const Eigen::Vector2d p = pixel.cast<double>();
  const auto warped = PlaneInducedWarp(ref, src, plane, p);
  if (!warped) return 1.0;
  const int sx = static_cast<int>(std::lround(warped->x()));
  const int sy = static_cast<int>(std::lround(warped->y()));
  if (!src_map.depth.contains(sx, sy) || !src_map.valid(sx, sy)) return 1.0;
  const Eigen::Vector3d world = Unproject(src, *warped, src_map.depth(sx, sy));
  const Projection back = Project(ref, world);
  if (!(back.depth > 0.0)) return 1.0;
  const double err = (back.pixel - p).norm();
  return std::min(err, psi_max) / psi_max;
}

}  // namespace texmvs
