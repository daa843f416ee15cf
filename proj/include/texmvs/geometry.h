#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "texmvs/scene.h"

namespace texmvs {

// Per-pixel surface hypothesis: unit normal in the reference camera frame and
// z-depth at the pixel it is anchored to.
struct LocalPlane {
  Eigen::Vector3d normal = Eigen::Vector3d(0.0, 0.0, -1.0);
  double depth = 1.0;
};

// Plane n.X + offset = 0 with unit n, in whatever frame the caller uses.
struct Plane3 {
  Eigen::Vector3d normal = Eigen::Vector3d(0.0, 0.0, -1.0);
  double offset = 0.0;

  double SignedDistance(const Eigen::Vector3d& x) const { return normal.dot(x) + offset; }
};

struct Projection {
  Eigen::Vector2d pixel;
  double depth = 0.0;  // z in the camera frame
};

// Direction K^-1 [u, v, 1] (z component is 1).
Eigen::Vector3d PixelRay(const CameraView& view, const Eigen::Vector2d& pixel);

Eigen::Vector3d UnprojectToCamera(const CameraView& view, const Eigen::Vector2d& pixel,
                                  double depth);
Eigen::Vector3d Unproject(const CameraView& view, const Eigen::Vector2d& pixel, double depth);
Projection Project(const CameraView& view, const Eigen::Vector3d& world);

Plane3 PlaneFromPointNormal(const Eigen::Vector3d& point, const Eigen::Vector3d& normal);

// z-depth at which the pixel ray meets a camera-frame plane. Empty when the ray
// is parallel to the plane (|n . ray_unit| <= 1e-9). The value may be negative
// when the plane lies behind the camera along this ray.
std::optional<double> DepthOfPlaneAtPixel(const CameraView& view, const Plane3& camera_plane,
                                          const Eigen::Vector2d& pixel);

Plane3 PlaneToCamera(const CameraView& view, const Plane3& world_plane);
Plane3 PlaneToWorld(const CameraView& view, const Plane3& camera_plane);

// Camera-frame plane through the anchored 3D point of a LocalPlane.
Plane3 CameraPlane(const CameraView& view, const Eigen::Vector2d& anchor, const LocalPlane& plane);

// Flips the normal when it points away from the camera along the anchor ray.
Eigen::Vector3d FaceCamera(const CameraView& view, const Eigen::Vector2d& pixel,
                           const Eigen::Vector3d& normal);

// Homography ref -> src induced by a LocalPlane anchored at a reference pixel.
class PlaneHomography {
 public:
  // Empty when the anchored point is not in front of the source camera.
  static std::optional<PlaneHomography> Create(const CameraView& ref, const CameraView& src,
                                               const Eigen::Vector2d& anchor,
                                               const LocalPlane& plane);

  // Empty when the warped point falls behind the source camera.
  std::optional<Eigen::Vector2d> Warp(const Eigen::Vector2d& pixel) const {
    const Eigen::Vector3d h = matrix_ * pixel.homogeneous();
    if (!(h.z() > 1e-12)) return std::nullopt;
    return h.hnormalized();
  }

  const Eigen::Matrix3d& matrix() const { return matrix_; }

 private:
  explicit PlaneHomography(const Eigen::Matrix3d& m) : matrix_(m) {}
  Eigen::Matrix3d matrix_;
};

// Warps `pixel` into `src` through the plane anchored at that same pixel.
// Empty when the point lands behind the source camera.
std::optional<Eigen::Vector2d> PlaneInducedWarp(const CameraView& ref, const CameraView& src,
                                                const LocalPlane& plane,
                                                const Eigen::Vector2d& pixel);

// Relative pose taking reference-camera coordinates to source-camera coordinates.
struct RelativePose {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
};
RelativePose ComputeRelativePose(const CameraView& ref, const CameraView& src);

}  // namespace texmvs
