#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.h"
#include "texmvs/photoconsistency.h"
#include "texmvs/error.h"
#include "texmvs/synthetic.h"

namespace texmvs {
namespace {

GrayImage RandomGray(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.1f, 0.9f);
  GrayImage g(w, h);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = u(rng);
  return g;
}

CameraView GrayCamera(int id, const GrayImage& gray) {
  CameraView v = testing::MakeCamera(id, gray.width(), gray.height(), 40.0,
                                     Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  v.gray = gray;
  return v;
}

// Camera-frame GT plane of the first synthetic plane at a pixel.
LocalPlane TruePlane(const SyntheticSpec& spec, const SyntheticScene& s, int view, int x, int y) {
  const CameraView& cam = s.scene.views[view];
  const Plane3 world = PlaneFromPointNormal(spec.planes[0].point, spec.planes[0].normal);
  const Eigen::Vector2d p(x, y);
  const Plane3 cp = PlaneToCamera(cam, world);
  return LocalPlane{FaceCamera(cam, p, cp.normal), (*s.truth.depth[view])(x, y)};
}

TEST(BilateralNcc, SelfCorrelationIsOne) {
  const CameraView v = GrayCamera(0, RandomGray(32, 32, 1));
  LocalPlane plane;
  plane.depth = 3.0;
  EXPECT_NEAR(BilateralNcc(v, v, Eigen::Vector2i(16, 16), plane, MatchWindow{}), 1.0, 1e-6);
}

TEST(BilateralNcc, ZeroVarianceGivesZero) {
  const CameraView flat = GrayCamera(0, GrayImage(32, 32, 0.4f));
  const CameraView tex = GrayCamera(1, RandomGray(32, 32, 2));
  LocalPlane plane;
  plane.depth = 3.0;
  EXPECT_EQ(BilateralNcc(flat, tex, Eigen::Vector2i(16, 16), plane, MatchWindow{}), 0.0);
  EXPECT_EQ(BilateralNcc(tex, flat, Eigen::Vector2i(16, 16), plane, MatchWindow{}), 0.0);
}

TEST(BilateralNcc, AffineIntensityInvariance) {
  const GrayImage base = RandomGray(40, 40, 3);
  const CameraView ref = GrayCamera(0, base);
  GrayImage shifted = base;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = 0.5f * base[i] + 0.2f;
  CameraView src = GrayCamera(1, RandomGray(40, 40, 4));
  CameraView src2 = src;
  for (std::size_t i = 0; i < src2.gray.size(); ++i) src2.gray[i] = 1.7f * src.gray[i] - 0.3f;
  LocalPlane plane;
  plane.depth = 3.0;
  for (int x = 8; x < 32; x += 5) {
    const Eigen::Vector2i p(x, 20);
    EXPECT_NEAR(BilateralNcc(ref, src, p, plane, MatchWindow{}),
                BilateralNcc(ref, src2, p, plane, MatchWindow{}), 1e-6);
  }
}

TEST(BilateralNcc, MostlyOutOfBoundsGivesMinusOne) {
  const CameraView ref = GrayCamera(0, RandomGray(32, 32, 5));
  CameraView src = GrayCamera(1, RandomGray(32, 32, 6));
  src.translation = Eigen::Vector3d(-5.0, 0.0, 0.0);  // huge shift in x
  LocalPlane plane;
  plane.depth = 3.0;
  EXPECT_EQ(BilateralNcc(ref, src, Eigen::Vector2i(16, 16), plane, MatchWindow{}), -1.0);
}

TEST(BilateralNcc, CornerPixelUsesClippedWindow) {
  const CameraView v = GrayCamera(0, RandomGray(32, 32, 7));
  LocalPlane plane;
  plane.depth = 3.0;
  const ReferencePatch patch(v.gray, 0, 0, MatchWindow{});
  EXPECT_EQ(patch.sample_count(), 36);
  EXPECT_NEAR(BilateralNcc(v, v, Eigen::Vector2i(0, 0), plane, MatchWindow{}), 1.0, 1e-6);
}

TEST(BilateralNcc, CheckerGtBeatsOffsetPlane) {
  SyntheticSpec spec = testing::WallSpec(96, 72, 2, TextureMode::kChecker);
  spec.cameras.include_center = true;
  spec.cameras.radius = 1.5;
  spec.depth_min = 2.0;
  spec.depth_max = 10.0;
  spec.planes[0].texture.cell = 0.15;
  const SyntheticScene s = GenerateSyntheticScene(spec);
  const CameraView& ref = s.scene.views[0];
  const CameraView& src = s.scene.views[1];
  const double offset = 0.05 * (s.scene.depth_range.max - s.scene.depth_range.min);
  int better = 0, total = 0;
  double gap = 0.0;
  for (int y = 12; y < 60; y += 6) {
    for (int x = 12; x < 84; x += 6) {
      LocalPlane gt = TruePlane(spec, s, 0, x, y);
      LocalPlane off = gt;
      off.depth += offset;
      const double a = BilateralNcc(ref, src, {x, y}, gt, MatchWindow{});
      const double b = BilateralNcc(ref, src, {x, y}, off, MatchWindow{});
      gap += a - b;
      better += a > b;
      ++total;
    }
  }
  EXPECT_GT(gap / total, 0.2);
  EXPECT_GT(better, 0.9 * total);
}

TEST(BilateralWeight, SymmetricAndPositive) {
  const MatchWindow win;
  EXPECT_EQ(BilateralWeight(4.0, 0.3, win), BilateralWeight(4.0, -0.3, win));
  EXPECT_GT(BilateralWeight(50.0, 1.0, win), 0.0);
  EXPECT_EQ(BilateralWeight(0.0, 0.0, win), 1.0);
}

TEST(PhotoLikelihood, Endpoints) {
  const MatchWindow win;
  const PhotoLikelihood best = EvaluatePhotoLikelihood(1.0, win);
  EXPECT_EQ(best.density, 1.0);
  EXPECT_EQ(best.cost, 0.0);
  const PhotoLikelihood worst = EvaluatePhotoLikelihood(-1.0, win);
  EXPECT_NEAR(worst.density, 3.8659e-3, 1e-6);
  EXPECT_EQ(worst.cost, 2.0);
}

TEST(PhotoLikelihood, StrictlyIncreasingInRho) {
  const MatchWindow win;
  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double d = EvaluatePhotoLikelihood(-1.0 + i * 0.01, win).density;
    EXPECT_GT(d, prev);
    prev = d;
  }
}

TEST(MatchWindow, ValidateRejectsBadValues) {
  MatchWindow win;
  win.half_size = 0;
  EXPECT_THROW(win.Validate(), Error);
  win = MatchWindow{};
  win.sigma_color = 0.0;
  EXPECT_THROW(win.Validate(), Error);
}

class GeometricCostTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = testing::WallSpec(80, 60, 2, TextureMode::kChecker);
    spec_.cameras.radius = 0.6;
    scene_ = GenerateSyntheticScene(spec_);
    for (int v = 0; v < 2; ++v) {
      DepthNormalMap m(80, 60);
      for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 80; ++x) {
          const LocalPlane lp = TruePlane(spec_, scene_, v, x, y);
          m.depth(x, y) = static_cast<float>(lp.depth);
          m.normal(x, y) = lp.normal.cast<float>();
        }
      maps_.push_back(std::move(m));
    }
  }
  SyntheticSpec spec_;
  SyntheticScene scene_;
  std::vector<DepthNormalMap> maps_;
};

TEST_F(GeometricCostTest, ExactMapsGiveLowCost) {
  const CameraView& ref = scene_.scene.views[0];
  const CameraView& src = scene_.scene.views[1];
  int covisible = 0, low = 0;
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 80; ++x) {
      const LocalPlane lp = TruePlane(spec_, scene_, 0, x, y);
      const auto q = PlaneInducedWarp(ref, src, lp, Eigen::Vector2d(x, y));
      if (!q || !src.InImage(q->x(), q->y())) continue;
      ++covisible;
      const double c = GeometricCost(ref, src, maps_[1], {x, y}, lp, 3.0);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      low += c < 0.1;
    }
  }
  ASSERT_GT(covisible, 1000);
  EXPECT_GE(low, 0.99 * covisible);
}

TEST_F(GeometricCostTest, MissingSourceDepthIsOne) {
  const DepthNormalMap empty(80, 60);
  const LocalPlane lp = TruePlane(spec_, scene_, 0, 40, 30);
  EXPECT_EQ(GeometricCost(scene_.scene.views[0], scene_.scene.views[1], empty, {40, 30}, lp, 3.0), 1.0);
}

TEST_F(GeometricCostTest, MonotoneInDepthPerturbation) {
  const CameraView& ref = scene_.scene.views[0];
  const CameraView& src = scene_.scene.views[1];
  for (int x = 30; x <= 50; x += 10) {
    const LocalPlane gt = TruePlane(spec_, scene_, 0, x, 30);
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
      LocalPlane lp = gt;
      lp.depth *= 1.0 + 0.01 * k;
      const double c = GeometricCost(ref, src, maps_[1], {x, 30}, lp, 3.0);
      EXPECT_GE(c, prev - 1e-9);
      prev = c;
    }
    EXPECT_GT(prev, 0.0);
  }
}

}  // namespace
}  // namespace texmvs
