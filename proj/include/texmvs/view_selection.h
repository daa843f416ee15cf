#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "texmvs/geometry.h"
#include "texmvs/photoconsistency.h"
#include "texmvs/rng.h"
#include "texmvs/scene.h"

namespace texmvs {

struct ViewSelectionParams {
  double gamma = 0.999;  // probability that Z keeps its value between neighbours
  int subset_size = 4;
  double parallax_peak_deg = 15.0;
  double parallax_sigma_deg = 10.0;
  double u_anchor_rho = 0.2;  // Z=0 emission equals the Z=1 density at this rho

  void Validate() const;
};

// Per-pixel, per-source probability q(Z = 1) that the pixel is visible in the
// source. Starts at 0.5.
class ViewSelectionState {
 public:
  ViewSelectionState() = default;
  ViewSelectionState(int width, int height, int num_sources);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_sources() const { return num_sources_; }

  double& q(int x, int y, int source) { return q_[Index(x, y) + source]; }
  double q(int x, int y, int source) const { return q_[Index(x, y) + source]; }
  std::span<const double> At(int x, int y) const {
    return {q_.data() + Index(x, y), static_cast<std::size_t>(num_sources_)};
  }

 private:
  std::size_t Index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * num_sources_;
  }
  int width_ = 0;
  int height_ = 0;
  int num_sources_ = 0;
  std::vector<double> q_;
};

// Emission density of the hidden state (Z = 0), anchored to the visible-state
// density at params.u_anchor_rho.
double HiddenEmission(const MatchWindow& win, const ViewSelectionParams& params);

// Exact two-state forward-backward smoothing along one line. `visible` holds
// the Z=1 emission per element, `hidden` the constant Z=0 emission,
// `initial_visible` the prior P(Z_0 = 1). Returns P(Z_l = 1 | all emissions).
std::vector<double> SmoothVisibility(std::span<const double> visible, double hidden,
                                     double initial_visible, double gamma);

// Replaces q along `line` for every source. densities[i][m] is the Z=1
// emission of line pixel i against source m. The forward pass starts from the
// previous q of the first pixel, which carries the previous sweep forward.
void UpdateVisibilityLine(ViewSelectionState& state, std::span<const Eigen::Vector2i> line,
                          const std::vector<std::vector<double>>& densities, double hidden,
                          double gamma);

double ParallaxPrior(double angle_deg, const ViewSelectionParams& params);
// `footprint_ratio` = source pixel footprint / reference pixel footprint.
double ResolutionPrior(double footprint_ratio);
double FrontFacingPrior(const Eigen::Vector3d& world_normal, const Eigen::Vector3d& view_ray);

// Unnormalised P_l(m) for each source: q * w_par * w_res * w_front, evaluated
// at the 3D point given by `plane` at `pixel`.
std::vector<double> SourceWeights(const CameraView& ref, std::span<const CameraView* const> sources,
                                  const Eigen::Vector2i& pixel, const LocalPlane& plane,
                                  std::span<const double> q, const ViewSelectionParams& params);

// Draws up to subset_size distinct indices without replacement, proportional to
// `weights`. Stops early once only zero-weight entries remain; falls back to a
// uniform draw when every weight is zero. Throws NoSources on an empty list.
std::vector<int> SampleSourceSubset(std::span<const double> weights, int subset_size,
                                    StreamRng& rng);

}  // namespace texmvs
