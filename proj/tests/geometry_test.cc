#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.h"
#include "texmvs/geometry.h"

namespace texmvs {
namespace {

CameraView AxisCamera(int id = 0) {
  return testing::MakeCamera(id, 64, 48, 50.0, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
}

TEST(Unproject, PrincipalPointIdentityPose) {
  const CameraView cam = AxisCamera();
  const Eigen::Vector3d x = Unproject(cam, Eigen::Vector2d(cam.cx, cam.cy), 1.0);
  EXPECT_NEAR((x - Eigen::Vector3d(0, 0, 1)).norm(), 0.0, 1e-12);
}

TEST(Unproject, RoundTripRandomPosesAndPixels) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const CameraView cam = testing::MakeCamera(0, 640, 480, 300.0 + 400.0 * u(rng),
                                               testing::RandomRotation(rng),
                                               Eigen::Vector3d(u(rng), u(rng), u(rng)) * 4.0);
    const Eigen::Vector2d p(639.0 * u(rng), 479.0 * u(rng));
    const double d = 0.1 + 50.0 * u(rng);
    const Projection back = Project(cam, Unproject(cam, p, d));
    ASSERT_LT((back.pixel - p).norm(), 1e-6);
    ASSERT_NEAR(back.depth, d, 1e-9 * d);
  }
}

TEST(Unproject, DepthScalingIsCollinear) {
  std::mt19937_64 rng(2);
  const CameraView cam = testing::MakeCamera(0, 64, 48, 40.0, testing::RandomRotation(rng),
                                             Eigen::Vector3d(1.0, -2.0, 0.5));
  const Eigen::Vector2d p(10.3, 33.7);
  const Eigen::Vector3d a = Unproject(cam, p, 1.7) - cam.Center();
  const Eigen::Vector3d b = Unproject(cam, p, 3.4) - cam.Center();
  EXPECT_NEAR(a.cross(b).norm(), 0.0, 1e-9);
  EXPECT_NEAR(b.norm() / a.norm(), 2.0, 1e-12);
}

TEST(PlaneInducedWarp, IdenticalPosesGiveIdentity) {
  const CameraView cam = AxisCamera();
  LocalPlane plane;
  plane.normal = Eigen::Vector3d(0.3, -0.2, -1.0).normalized();
  plane.depth = 4.0;
  const Eigen::Vector2d p(20.0, 17.0);
  const auto q = PlaneInducedWarp(cam, cam, plane, p);
  ASSERT_TRUE(q.has_value());
  EXPECT_LT((*q - p).norm(), 1e-9);
}

TEST(PlaneInducedWarp, FrontoParallelDisparity) {
  const double f = 50.0, b = 0.3, z = 6.0;
  const CameraView ref = AxisCamera(0);
  const CameraView src = testing::MakeCamera(1, 64, 48, f, Eigen::Matrix3d::Identity(),
                                             Eigen::Vector3d(b, 0.0, 0.0));
  LocalPlane plane;
  plane.depth = z;
  const Eigen::Vector2d p(40.0, 20.0);
  const auto q = PlaneInducedWarp(ref, src, plane, p);
  ASSERT_TRUE(q.has_value());
  EXPECT_NEAR(p.x() - q->x(), f * b / z, 1e-9);
  EXPECT_NEAR(q->y(), p.y(), 1e-9);
}

TEST(PlaneInducedWarp, MatchesProjectOfUnprojectOnPlane) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CameraView ref = AxisCamera(0);
  for (int i = 0; i < 500; ++i) {
    const CameraView src = testing::MakeCamera(
        1, 64, 48, 50.0,
        Eigen::AngleAxisd(0.1 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized())
            .toRotationMatrix(),
        Eigen::Vector3d(u(rng), u(rng), 0.2 * u(rng)));
    LocalPlane plane;
    plane.normal = Eigen::Vector3d(0.4 * u(rng), 0.4 * u(rng), -1.0).normalized();
    plane.depth = 5.0 + u(rng);
    const Eigen::Vector2d anchor(32.0 + 20.0 * u(rng), 24.0 + 15.0 * u(rng));
    const Eigen::Vector2d p = anchor + Eigen::Vector2d(5.0 * u(rng), 5.0 * u(rng));
    const Plane3 cam_plane = CameraPlane(ref, anchor, plane);
    const auto depth = DepthOfPlaneAtPixel(ref, cam_plane, p);
    ASSERT_TRUE(depth.has_value());
    const Eigen::Vector2d expected = Project(src, Unproject(ref, p, *depth)).pixel;
    const auto h = PlaneHomography::Create(ref, src, anchor, plane);
    ASSERT_TRUE(h.has_value());
    const auto got = h->Warp(p);
    ASSERT_TRUE(got.has_value());
    EXPECT_LT((*got - expected).norm(), 1e-6);
  }
}

TEST(PlaneInducedWarp, WindowCornersFinite) {
  const CameraView ref = AxisCamera(0);
  const CameraView src = testing::MakeCamera(1, 64, 48, 50.0, Eigen::Matrix3d::Identity(),
                                             Eigen::Vector3d(0.5, 0.1, 0.0));
  LocalPlane plane;
  plane.normal = Eigen::Vector3d(0.2, 0.1, -1.0).normalized();
  plane.depth = 5.0;
  const Eigen::Vector2d anchor(30.0, 20.0);
  const auto h = PlaneHomography::Create(ref, src, anchor, plane);
  ASSERT_TRUE(h.has_value());
  for (int dx : {-5, 5}) {
    for (int dy : {-5, 5}) {
      const auto q = h->Warp(anchor + Eigen::Vector2d(dx, dy));
      ASSERT_TRUE(q.has_value());
      EXPECT_TRUE(q->allFinite());
    }
  }
}

TEST(PlaneInducedWarp, BehindSourceCameraIsEmpty) {
  const CameraView ref = AxisCamera(0);
  // Source sits beyond the plane looking the same way.
  const CameraView src = testing::MakeCamera(1, 64, 48, 50.0, Eigen::Matrix3d::Identity(),
                                             Eigen::Vector3d(0.0, 0.0, 10.0));
  LocalPlane plane;
  plane.depth = 5.0;
  EXPECT_FALSE(PlaneInducedWarp(ref, src, plane, Eigen::Vector2d(32.0, 24.0)).has_value());
}

TEST(PlaneInducedWarp, CompositionReturnsStart) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  for (int i = 0; i < 1000; ++i) {
    const CameraView ref = testing::MakeCamera(0, 64, 48, 50.0, Eigen::Matrix3d::Identity(),
                                               Eigen::Vector3d::Zero());
    const CameraView src = testing::MakeCamera(
        1, 64, 48, 50.0,
        Eigen::AngleAxisd(0.15 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized())
            .toRotationMatrix(),
        Eigen::Vector3d(u(rng), u(rng), 0.3 * u(rng)));
    const Plane3 world = PlaneFromPointNormal(Eigen::Vector3d(u(rng), u(rng), 5.0 + u(rng)),
                                              Eigen::Vector3d(0.3 * u(rng), 0.3 * u(rng), -1.0));
    const Eigen::Vector2d p(32.0 + 20.0 * u(rng), 24.0 + 15.0 * u(rng));
    const Plane3 ref_plane = PlaneToCamera(ref, world);
    const auto d = DepthOfPlaneAtPixel(ref, ref_plane, p);
    if (!d || *d <= 0.0) continue;
    LocalPlane lp{FaceCamera(ref, p, ref_plane.normal), *d};
    const auto q = PlaneInducedWarp(ref, src, lp, p);
    if (!q) continue;
    const Plane3 src_plane = PlaneToCamera(src, world);
    const auto ds = DepthOfPlaneAtPixel(src, src_plane, *q);
    ASSERT_TRUE(ds.has_value());
    LocalPlane sp{FaceCamera(src, *q, src_plane.normal), *ds};
    const auto back = PlaneInducedWarp(src, ref, sp, *q);
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - p).norm(), 1e-4);
    ++tested;
  }
  EXPECT_GT(tested, 900);
}

TEST(DepthOfPlane, PlaneZEqualsFiveGivesSlantDepth) {
  const CameraView cam = AxisCamera();
  const Plane3 plane = PlaneFromPointNormal(Eigen::Vector3d(0, 0, 5), Eigen::Vector3d(0, 0, -1));
  for (const Eigen::Vector2d p : {Eigen::Vector2d(0, 0), Eigen::Vector2d(63, 47), Eigen::Vector2d(10, 40)}) {
    const auto d = DepthOfPlaneAtPixel(cam, plane, p);
    ASSERT_TRUE(d.has_value());
    // z-depth of the hit is 5; the distance along the ray is 5 / cos.
    EXPECT_NEAR(*d, 5.0, 1e-12);
    const Eigen::Vector3d hit = Unproject(cam, p, *d);
    const double cos_angle = PixelRay(cam, p).normalized().z();
    EXPECT_NEAR(hit.norm(), 5.0 / cos_angle, 1e-9);
  }
}

TEST(DepthOfPlane, OnAxisPointWithMinusZNormal) {
  const CameraView cam = AxisCamera();
  const Plane3 plane = PlaneFromPointNormal(Eigen::Vector3d(0, 0, 3.25), Eigen::Vector3d(0, 0, -1));
  EXPECT_NEAR(*DepthOfPlaneAtPixel(cam, plane, Eigen::Vector2d(cam.cx, cam.cy)), 3.25, 1e-12);
}

TEST(DepthOfPlane, UnprojectedPointLiesOnPlane) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const CameraView cam = testing::MakeCamera(0, 64, 48, 50.0, testing::RandomRotation(rng),
                                               Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const Plane3 world = PlaneFromPointNormal(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 3.0,
                                              Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const Plane3 cp = PlaneToCamera(cam, world);
    const Eigen::Vector2d p(32.0 + 30.0 * u(rng), 24.0 + 20.0 * u(rng));
    const auto d = DepthOfPlaneAtPixel(cam, cp, p);
    if (!d) continue;
    EXPECT_NEAR(cp.SignedDistance(UnprojectToCamera(cam, p, *d)), 0.0, 1e-9);
    EXPECT_NEAR(world.SignedDistance(Unproject(cam, p, *d)), 0.0, 1e-9);
  }
}

TEST(DepthOfPlane, GrazingPlaneIsRayParallel) {
  const CameraView cam = AxisCamera();
  const Plane3 plane = PlaneFromPointNormal(Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 1, 0));
  EXPECT_FALSE(DepthOfPlaneAtPixel(cam, plane, Eigen::Vector2d(cam.cx, cam.cy)).has_value());
}

TEST(DepthOfPlane, PositiveForFacingPlanesInRange) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CameraView cam = AxisCamera();
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector2d p(32.0 + 30.0 * u(rng), 24.0 + 20.0 * u(rng));
    LocalPlane lp;
    lp.normal = FaceCamera(cam, p, Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized());
    lp.depth = 3.0 + u(rng);
    const Plane3 cp = CameraPlane(cam, p, lp);
    const auto d = DepthOfPlaneAtPixel(cam, cp, p);
    if (!d) continue;
    EXPECT_GT(*d, 0.0);
    EXPECT_NEAR(*d, lp.depth, 1e-9);
  }
}

TEST(FaceCamera, FlipsAwayFacingNormal) {
  const CameraView cam = AxisCamera();
  const Eigen::Vector2d p(cam.cx, cam.cy);
  const Eigen::Vector3d n = FaceCamera(cam, p, Eigen::Vector3d(0, 0, 1));
  EXPECT_LT(n.dot(PixelRay(cam, p)), 0.0);
}

TEST(RelativePose, MapsRefCameraPointsToSource) {
  std::mt19937_64 rng(7);
  const CameraView a = testing::MakeCamera(0, 8, 8, 5.0, testing::RandomRotation(rng), Eigen::Vector3d(1, 2, 3));
  const CameraView b = testing::MakeCamera(1, 8, 8, 5.0, testing::RandomRotation(rng), Eigen::Vector3d(-1, 0, 2));
  const RelativePose rel = ComputeRelativePose(a, b);
  const Eigen::Vector3d world(0.3, -0.7, 4.0);
  const Eigen::Vector3d in_a = a.rotation * world + a.translation;
  const Eigen::Vector3d in_b = b.rotation * world + b.translation;
  EXPECT_LT((rel.rotation * in_a + rel.translation - in_b).norm(), 1e-12);
}

}  // namespace
}  // namespace texmvs
