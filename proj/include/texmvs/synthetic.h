#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "texmvs/scene.h"
#include "texmvs/toml.h"

namespace texmvs {

enum class TextureMode { kChecker, kNoise, kConstant };

struct TextureSpec {
  TextureMode mode = TextureMode::kChecker;
  Eigen::Vector3d color_a = Eigen::Vector3d(0.15, 0.15, 0.15);
  Eigen::Vector3d color_b = Eigen::Vector3d(0.85, 0.85, 0.85);
  double cell = 0.25;    // checker cell / noise feature size, scene units
  double jitter = 0.3;   // per-cell brightness jitter for checkers
  int octaves = 4;       // noise only
  std::uint64_t seed = 1;
};

// Rectangle on a plane, in the plane's (u, v) coordinates around its point.
struct RectSpec {
  double half_u = 0.0;
  double half_v = 0.0;
};

struct SyntheticPlane {
  Eigen::Vector3d point = Eigen::Vector3d(0.0, 0.0, 5.0);
  Eigen::Vector3d normal = Eigen::Vector3d(0.0, 0.0, -1.0);
  Eigen::Vector3d u_axis = Eigen::Vector3d(1.0, 0.0, 0.0);  // projected into the plane
  std::optional<RectSpec> extent;  // unbounded when empty
  TextureSpec texture;
  // Optional inner rectangle rendered with its own texture.
  std::optional<RectSpec> inner;
  TextureSpec inner_texture;
};

struct CameraRingSpec {
  int count = 2;                 // total cameras
  double radius = 0.5;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // ring centre (eye position)
  Eigen::Vector3d look_at = Eigen::Vector3d(0.0, 0.0, 5.0);
  bool include_center = true;    // first camera sits at the ring centre
  double phase_deg = 0.0;
};

struct SyntheticSpec {
  int width = 320;
  int height = 240;
  double fov_deg = 60.0;  // horizontal
  CameraRingSpec cameras;
  std::vector<SyntheticPlane> planes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 7;
  int supersample = 3;
  int gt_stride = 2;
  // Derived from the ground truth when absent.
  std::optional<double> depth_min;
  std::optional<double> depth_max;
  std::optional<double> scene_size;

  void Validate() const;
};

SyntheticSpec ParseSyntheticSpec(const toml::Document& doc);
SyntheticSpec LoadSyntheticSpec(const std::filesystem::path& path);

struct SyntheticScene {
  SceneBundle scene;
  GroundTruth truth;
};

// Ray-plane rendering (nearest hit wins) with supersampled colour, exact
// per-pixel z-depth from the pixel-centre ray and additive clipped Gaussian
// noise. Throws DegenerateGeometry when some view sees no plane at all.
SyntheticScene GenerateSyntheticScene(const SyntheticSpec& spec);

// Camera ring poses only; images are left empty.
std::vector<CameraView> SyntheticCameras(const SyntheticSpec& spec);

}  // namespace texmvs
