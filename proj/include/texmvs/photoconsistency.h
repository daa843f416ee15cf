#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "texmvs/geometry.h"
#include "texmvs/scene.h"

namespace texmvs {

struct MatchWindow {
  int half_size = 5;
  double sigma_spatial = 3.0;  // pixels
  double sigma_color = 0.12;   // gray units
  double sigma_rho = 0.6;

  void Validate() const;
};

// Bilateral weight exp(-|q-p|^2 / 2 s_s^2) * exp(-(I(q)-I(p))^2 / 2 s_c^2).
inline double BilateralWeight(double dist_sq, double color_diff, const MatchWindow& win) {
  return std::exp(-dist_sq / (2.0 * win.sigma_spatial * win.sigma_spatial) -
                  color_diff * color_diff / (2.0 * win.sigma_color * win.sigma_color));
}

// Reference-side half of the bilateral NCC: window samples, weights and
// weighted statistics are fixed per pixel and shared by every hypothesis and
// every source view scored at that pixel.
class ReferencePatch {
 public:
  ReferencePatch(const GrayImage& ref_gray, int x, int y, const MatchWindow& win);

  // Weighted NCC against the source image sampled through homography `h`
  // (reference pixel -> source pixel). Returns -1 when more than half of the
  // window lands outside the source or the clipped window has < 9 samples,
  // and 0 when either side has zero variance.
  double Ncc(const GrayImage& src_gray, const Eigen::Matrix3d& h) const;

  int sample_count() const { return static_cast<int>(samples_.size()); }

 private:
  struct Sample {
    double x, y;
    double weight;
    double value;
  };
  std::vector<Sample> samples_;
};

inline constexpr int kMinWindowSamples = 9;

double BilateralNcc(const CameraView& ref, const CameraView& src, const Eigen::Vector2i& pixel,
                    const LocalPlane& plane, const MatchWindow& win);

struct PhotoLikelihood {
  double density;  // exp(-(1-rho)^2 / 2 sigma_rho^2); normalisers cancel
  double cost;     // 1 - rho
};

PhotoLikelihood EvaluatePhotoLikelihood(double rho, const MatchWindow& win);

// Forward-backward reprojection error through the source depth map, truncated
// at psi_max and scaled to [0, 1]. Missing source depth gives 1.
double GeometricCost(const CameraView& ref, const CameraView& src, const DepthNormalMap& src_map,
                     const Eigen::Vector2i& pixel, const LocalPlane& plane, double psi_max);

}  // namespace texmvs
