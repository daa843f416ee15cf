#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "texmvs/scene.h"
#include "texmvs/synthetic.h"

namespace texmvs::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("texmvs_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Eigen::Matrix3d RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

inline CameraView MakeCamera(int id, int width, int height, double focal,
                             const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center) {
  CameraView v;
  v.view_id = id;
  v.width = width;
  v.height = height;
  v.fx = v.fy = focal;
  v.cx = 0.5 * (width - 1);
  v.cy = 0.5 * (height - 1);
  v.rotation = rotation;
  v.translation = -rotation * center;
  return v;
}

// Small ring of cameras looking at one textured wall.
inline SyntheticSpec WallSpec(int width, int height, int cameras, TextureMode mode,
                              double noise = 0.0) {
  SyntheticSpec spec;
  spec.width = width;
  spec.height = height;
  spec.fov_deg = 60.0;
  spec.cameras.count = cameras;
  spec.cameras.radius = 0.8;
  spec.cameras.look_at = Eigen::Vector3d(0.0, 0.0, 5.0);
  spec.noise_sigma = noise;
  spec.supersample = 2;
  SyntheticPlane plane;
  plane.point = Eigen::Vector3d(0.0, 0.0, 5.0);
  plane.normal = Eigen::Vector3d(0.15, 0.1, -1.0);
  plane.texture.mode = mode;
  plane.texture.cell = 0.06;
  spec.planes.push_back(plane);
  return spec;
}

}  // namespace texmvs::testing
