#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "texmvs/image.h"

namespace texmvs {

// Pinhole view: world->camera transform X_cam = rotation * X_world + translation.
struct CameraView {
  int view_id = 0;
  int width = 0;
  int height = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  RgbImage rgb;
  GrayImage gray;

  Eigen::Matrix3d K() const;
  Eigen::Matrix3d KInverse() const;
  Eigen::Vector3d Center() const { return -rotation.transpose() * translation; }

  bool InImage(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1;
  }
};

struct DepthRange {
  double min = 0.0;
  double max = 0.0;
};

struct SceneBundle {
  std::vector<CameraView> views;
  DepthRange depth_range;
  double scene_size = 0.0;

  const CameraView& ViewById(int view_id) const;
};

// Per-pixel depth (z in the camera frame) and unit normal (camera frame).
// Depth 0 marks an invalid pixel; there is no separate mask buffer.
struct DepthNormalMap {
  Grid<float> depth;
  Grid<Eigen::Vector3f> normal;

  DepthNormalMap() = default;
  DepthNormalMap(int width, int height)
      : depth(width, height, 0.0f),
        normal(width, height, Eigen::Vector3f(0.0f, 0.0f, -1.0f)) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  bool valid(int x, int y) const { return depth(x, y) > 0.0f; }
  void invalidate(int x, int y) { depth(x, y) = 0.0f; }
  std::size_t CountValid() const;
};

struct GroundTruth {
  // Indexed parallel to SceneBundle::views; entries may be empty.
  std::vector<std::optional<Grid<float>>> depth;
  std::vector<Eigen::Vector3d> points;
};

}  // namespace texmvs
