#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "test_support.h"
#include "texmvs/error.h"
#include "texmvs/fusion_eval.h"
#include "texmvs/geometry.h"
#include "texmvs/synthetic.h"

namespace texmvs {
namespace {

// Exact GT depth and normal maps for a single-plane synthetic scene.
struct GtFixture {
  SyntheticSpec spec;
  SyntheticScene scene;
  std::vector<DepthNormalMap> maps;
};

GtFixture MakeGtFixture() {
  GtFixture f;
  f.spec = testing::WallSpec(80, 60, 4, TextureMode::kChecker);
  f.spec.cameras.radius = 0.3;
  f.scene = GenerateSyntheticScene(f.spec);
  const Plane3 world = PlaneFromPointNormal(f.spec.planes[0].point, f.spec.planes[0].normal);
  for (std::size_t v = 0; v < f.scene.scene.views.size(); ++v) {
    const CameraView& cam = f.scene.scene.views[v];
    const Plane3 cp = PlaneToCamera(cam, world);
    DepthNormalMap m(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        m.depth(x, y) = (*f.scene.truth.depth[v])(x, y);
        m.normal(x, y) = FaceCamera(cam, Eigen::Vector2d(x, y), cp.normal).cast<float>();
      }
    f.maps.push_back(std::move(m));
  }
  return f;
}

TEST(Fuse, ExactMapsFuseMostPixelsOnSurface) {
  const GtFixture f = MakeGtFixture();
  const PointCloud cloud = Fuse(f.scene.scene.views, f.maps, FusionConfig{});
  ASSERT_GT(cloud.size(), 0u);
  const Plane3 world = PlaneFromPointNormal(f.spec.planes[0].point, f.spec.planes[0].normal);
  for (const auto& p : cloud.points)
    EXPECT_LT(std::abs(world.SignedDistance(p.cast<double>())), 1e-3 * f.scene.scene.scene_size);
  // A pixel counts as fused when a fused point lies within one pixel footprint
  // of its surface point.
  std::vector<Eigen::Vector3d> fused;
  for (const auto& p : cloud.points) fused.push_back(p.cast<double>());
  std::size_t pixels = 0, covered = 0;
  for (std::size_t v = 0; v < f.maps.size(); ++v) {
    const CameraView& cam = f.scene.scene.views[v];
    std::vector<Eigen::Vector3d> surface;
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x)
        surface.push_back(Unproject(cam, Eigen::Vector2d(x, y), f.maps[v].depth(x, y)));
    const double footprint = f.scene.scene.depth_range.max / cam.fx;
    for (double d : NearestDistances(surface, fused, footprint)) covered += std::isfinite(d);
    pixels += surface.size();
  }
  EXPECT_GE(static_cast<double>(covered) / pixels, 0.95);
}

TEST(Fuse, ShiftedViewRarelyContributes) {
  GtFixture f = MakeGtFixture();
  const PointCloud clean = Fuse(f.scene.scene.views, f.maps, FusionConfig{});
  for (std::size_t i = 0; i < f.maps[2].depth.size(); ++i) f.maps[2].depth[i] *= 1.1f;
  const PointCloud cloud = Fuse(f.scene.scene.views, f.maps, FusionConfig{});
  // Points from the shifted view sit 10% deeper along its rays: off the plane.
  const Plane3 world = PlaneFromPointNormal(f.spec.planes[0].point, f.spec.planes[0].normal);
  std::size_t off = 0;
  for (const auto& p : cloud.points) off += std::abs(world.SignedDistance(p.cast<double>())) > 0.02;
  EXPECT_LT(off, 0.05 * cloud.size());
  EXPECT_GT(cloud.size(), 0.5 * clean.size());
}

TEST(Fuse, SingleViewGivesEmptyCloud) {
  const GtFixture f = MakeGtFixture();
  const PointCloud cloud = Fuse(std::span(f.scene.scene.views).first(1), std::span(f.maps).first(1),
                                FusionConfig{});
  EXPECT_EQ(cloud.size(), 0u);
}

TEST(Fuse, PermutationInvariant) {
  const GtFixture f = MakeGtFixture();
  const PointCloud a = Fuse(f.scene.scene.views, f.maps, FusionConfig{});
  std::vector<CameraView> views(f.scene.scene.views.rbegin(), f.scene.scene.views.rend());
  std::vector<DepthNormalMap> maps(f.maps.rbegin(), f.maps.rend());
  const PointCloud b = Fuse(views, maps, FusionConfig{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT((a.points[i] - b.points[i]).norm(), 1e-6f);
    EXPECT_LT((a.normals[i] - b.normals[i]).norm(), 1e-6f);
  }
}

TEST(FusionConfig, RejectsSingleViewMinimum) {
  FusionConfig c;
  c.min_consistent_views = 1;
  EXPECT_ANY_THROW(c.Validate());
}

std::vector<Eigen::Vector3d> RandomCloud(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

TEST(Evaluate, IdenticalCloudsAreFull) {
  std::mt19937_64 rng(1);
  const auto pts = RandomCloud(200, rng);
  const std::vector<double> taus = {0.001, 0.01, 0.1};
  const EvalReport r = Evaluate(pts, pts, taus);
  for (const EvalRow& row : r.rows) {
    EXPECT_EQ(row.accuracy, 100.0);
    EXPECT_EQ(row.completeness, 100.0);
    EXPECT_EQ(row.f1, 100.0);
  }
}

TEST(Evaluate, FarOutlierCountsAgainstAccuracyOnly) {
  std::mt19937_64 rng(2);
  const auto truth = RandomCloud(99, rng);
  auto model = truth;
  model.emplace_back(100.0, 100.0, 100.0);
  const std::vector<double> taus = {0.05};
  const EvalReport r = Evaluate(model, truth, taus);
  EXPECT_DOUBLE_EQ(r.rows[0].completeness, 100.0);
  EXPECT_DOUBLE_EQ(r.rows[0].accuracy, 100.0 * 99.0 / 100.0);
}

TEST(Evaluate, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  const auto model = RandomCloud(500, rng);
  const auto truth = RandomCloud(500, rng);
  const std::vector<double> taus = {0.01, 0.03, 0.05, 0.1};
  auto brute = [](const std::vector<Eigen::Vector3d>& q, const std::vector<Eigen::Vector3d>& t, double tau) {
    int hit = 0;
    for (const auto& a : q) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : t) best = std::min(best, (a - b).norm());
      hit += best <= tau;
    }
    return 100.0 * hit / q.size();
  };
  const EvalReport r = Evaluate(model, truth, taus);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    EXPECT_NEAR(r.rows[k].accuracy, brute(model, truth, taus[k]), 1e-9);
    EXPECT_NEAR(r.rows[k].completeness, brute(truth, model, taus[k]), 1e-9);
    const double a = r.rows[k].accuracy, c = r.rows[k].completeness;
    EXPECT_DOUBLE_EQ(r.rows[k].f1, a + c > 0 ? 2 * a * c / (a + c) : 0.0);
    if (k > 0) {
      EXPECT_GE(a, r.rows[k - 1].accuracy);
      EXPECT_GE(c, r.rows[k - 1].completeness);
    }
  }
}

TEST(NearestDistances, ExactWithinRadius) {
  std::mt19937_64 rng(4);
  const auto q = RandomCloud(300, rng);
  const auto t = RandomCloud(300, rng);
  const auto d = NearestDistances(q, t, 0.08);
  for (std::size_t i = 0; i < q.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : t) best = std::min(best, (q[i] - b).norm());
    if (best <= 0.08) EXPECT_NEAR(d[i], best, 1e-12);
    else EXPECT_TRUE(std::isinf(d[i]));
  }
}

TEST(Evaluate, EmptyCloudThrows) {
  const std::vector<Eigen::Vector3d> none, one = {Eigen::Vector3d::Zero()};
  const std::vector<double> taus = {0.1};
  try {
    Evaluate(none, one, taus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyCloud);
  }
}

TEST(EvalReport, TsvColumns) {
  testing::TempDir dir("eval");
  EvalReport r;
  r.rows.push_back({0.01, 90.0, 80.0, 2 * 90.0 * 80.0 / 170.0});
  WriteEvalTsv(r, dir.path() / "eval.tsv");
  std::ifstream in(dir.path() / "eval.tsv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "tau\taccuracy\tcompleteness\tf1");
}

TEST(DepthErrorReport, ExactEstimateIsFullAtSmallestThreshold) {
  Grid<float> gt(10, 10, 3.0f);
  gt(0, 0) = 0.0f;  // no ground truth here
  DepthNormalMap est(10, 10);
  est.depth = gt;
  const std::vector<Grid<float>> truth = {gt};
  const std::vector<DepthNormalMap> ests = {est};
  const std::vector<Grid<float>> tex = {Grid<float>(10, 10, 0.5f)};
  const std::vector<double> thresholds = {1e-6, 0.1}, cutoffs = {0.6};
  const DepthErrorReport r = ComputeDepthErrorReport(ests, truth, tex, thresholds, cutoffs);
  EXPECT_EQ(r.pixels, 99u);
  EXPECT_EQ(r.cdf[0], 100.0);
  EXPECT_EQ(r.binned[0][0], 100.0);
}

TEST(DepthErrorReport, ConstantOffsetStepsAtOffset) {
  const Grid<float> gt(8, 8, 2.0f);
  DepthNormalMap est(8, 8);
  est.depth.fill(2.0f + 0.0625f);  // exactly representable offset
  const std::vector<Grid<float>> truth = {gt};
  const std::vector<DepthNormalMap> ests = {est};
  const std::vector<Grid<float>> tex = {Grid<float>(8, 8, 1.0f)};
  const std::vector<double> thresholds = {0.0625 - 1e-9, 0.0625, 0.0625 + 1e-9};
  const std::vector<double> cutoffs = {0.6};
  const DepthErrorReport r = ComputeDepthErrorReport(ests, truth, tex, thresholds, cutoffs);
  EXPECT_EQ(r.cdf[0], 0.0);
  EXPECT_EQ(r.cdf[1], 100.0);
  EXPECT_EQ(r.cdf[2], 100.0);
  EXPECT_EQ(r.binned_pixels[0], 0u);
}

TEST(DepthErrorReport, MissingEstimateIsError) {
  const Grid<float> gt(4, 4, 2.0f);
  DepthNormalMap est(4, 4);
  est.depth = gt;
  est.invalidate(1, 1);
  const std::vector<Grid<float>> truth = {gt};
  const std::vector<DepthNormalMap> ests = {est};
  const std::vector<Grid<float>> tex = {Grid<float>(4, 4, 0.5f)};
  const std::vector<double> thresholds = {1.0}, cutoffs = {1.0};
  const DepthErrorReport r = ComputeDepthErrorReport(ests, truth, tex, thresholds, cutoffs);
  EXPECT_DOUBLE_EQ(r.cdf[0], 100.0 * 15.0 / 16.0);
}

TEST(DepthErrorReport, DimensionMismatch) {
  const std::vector<Grid<float>> truth = {Grid<float>(4, 4, 2.0f)};
  const std::vector<DepthNormalMap> ests = {DepthNormalMap(5, 4)};
  const std::vector<Grid<float>> tex = {Grid<float>(4, 4, 0.5f)};
  const std::vector<double> thresholds = {1.0}, cutoffs = {1.0};
  try {
    ComputeDepthErrorReport(ests, truth, tex, thresholds, cutoffs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
}

}  // namespace
}  // namespace texmvs
