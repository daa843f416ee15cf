#include "texmvs/geometry.h"

#include <cmath>

namespace texmvs {

Eigen::Vector3d PixelRay(const CameraView& view, const Eigen::Vector2d& pixel) {
  return Eigen::Vector3d((pixel.x() - view.cx) / view.fx, (pixel.y() - view.cy) / view.fy, 1.0);
}

Eigen::Vector3d UnprojectToCamera(const CameraView& view, const Eigen::Vector2d& pixel,
                                  double depth) {
  return depth * PixelRay(view, pixel);
}

Eigen::Vector3d Unproject(const CameraView& view, const Eigen::Vector2d& pixel, double depth) {
  return view.rotation.transpose() * (UnprojectToCamera(view, pixel, depth) - view.translation);
}

Projection Project(const CameraView& view, const Eigen::Vector3d& world) {
  const Eigen::Vector3d cam = view.rotation * world + view.translation;
  Projection p;
  p.depth = cam.z();
  p.pixel = Eigen::Vector2d(view.fx * cam.x() / cam.z() + view.cx,
                            view.fy * cam.y() / cam.z() + view.cy);
  return p;
}

Plane3 PlaneFromPointNormal(const Eigen::Vector3d& point, const Eigen::Vector3d& normal) {
  const Eigen::Vector3d n = normal.normalized();
  return {n, -n.dot(point)};
}

std::optional<double> DepthOfPlaneAtPixel(const CameraView& view, const Plane3& camera_plane,
                                          const Eigen::Vector2d& pixel) {
  const Eigen::Vector3d ray = PixelRay(view, pixel);
  const double denom = camera_plane.normal.dot(ray);
  if (std::abs(denom) <= 1e-9 * ray.norm()) return std::nullopt;
  return -camera_plane.offset / denom;
}

Plane3 PlaneToCamera(const CameraView& view, const Plane3& world_plane) {
  // X_w = R^T (X_c - t)  =>  n.R^T X_c - n.R^T t + d = 0
  const Eigen::Vector3d n = view.rotation * world_plane.normal;
  return {n, world_plane.offset - n.dot(view.translation)};
}

Plane3 PlaneToWorld(const CameraView& view, const Plane3& camera_plane) {
  const Eigen::Vector3d n = view.rotation.transpose() * camera_plane.normal;
  return {n, camera_plane.offset + camera_plane.normal.dot(view.translation)};
}

Plane3 CameraPlane(const CameraView& view, const Eigen::Vector2d& anchor, const LocalPlane& plane) {
  return PlaneFromPointNormal(UnprojectToCamera(view, anchor, plane.depth), plane.normal);
}

Eigen::Vector3d FaceCamera(const CameraView& view, const Eigen::Vector2d& pixel,
                           const Eigen::Vector3d& normal) {
  return normal.dot(PixelRay(view, pixel)) > 0.0 ? Eigen::Vector3d(-normal) : normal;
}

RelativePose ComputeRelativePose(const CameraView& ref, const CameraView& src) {
  RelativePose pose;
  pose.rotation = src.rotation * ref.rotation.transpose();
  pose.translation = src.translation - pose.rotation * ref.translation;
  return pose;
}

std::optional<PlaneHomography> PlaneHomography::Create(const CameraView& ref,
                                                       const CameraView& src,
                                                       const Eigen::Vector2d& anchor,
                                                       const LocalPlane& plane) {
  const Plane3 p = CameraPlane(ref, anchor, plane);
  if (std::abs(p.offset) < 1e-12) return std::nullopt;  // plane through the centre
  const RelativePose pose = ComputeRelativePose(ref, src);
  const Eigen::Vector3d anchor_src =
      pose.rotation * UnprojectToCamera(ref, anchor, plane.depth) + pose.translation;
  if (!(anchor_src.z() > 0.0)) return std::nullopt;
  // Points on the plane satisfy 1 = -n.X / d, so X_src = (R - t n^T / d) X_ref.
  const Eigen::Matrix3d h = src.K() *
                            (pose.rotation - pose.translation * p.normal.transpose() / p.offset) *
                            ref.KInverse();
  return PlaneHomography(h);
}

std::optional<Eigen::Vector2d> PlaneInducedWarp(const CameraView& ref, const CameraView& src,
                                                const LocalPlane& plane,
                                                const Eigen::Vector2d& pixel) {
  const auto h = PlaneHomography::Create(ref, src, pixel, plane);
  if (!h) return std::nullopt;
  return h->Warp(pixel);
}

}  // namespace texmvs
