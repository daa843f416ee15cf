#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "test_support.h"
#include "texmvs/error.h"
#include "texmvs/view_selection.h"

namespace texmvs {
namespace {

// Exact posterior P(Z_l = 1 | e) by summing the 2^L joint.
std::vector<double> EnumeratePosterior(const std::vector<double>& visible, double hidden,
                                       double initial, double gamma) {
  const std::size_t n = visible.size();
  std::vector<double> num(n, 0.0);
  double total = 0.0;
  for (std::uint32_t z = 0; z < (1u << n); ++z) {
    double p = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      const bool on = (z >> l) & 1u;
      if (l == 0) {
        p *= on ? initial : 1.0 - initial;
      } else {
        const bool prev = (z >> (l - 1)) & 1u;
        p *= on == prev ? gamma : 1.0 - gamma;
      }
      p *= on ? visible[l] : hidden;
    }
    total += p;
    for (std::size_t l = 0; l < n; ++l)
      if ((z >> l) & 1u) num[l] += p;
  }
  for (double& v : num) v /= total;
  return num;
}

TEST(SmoothVisibility, MatchesEnumeration) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<double> e(n);
    for (double& v : e) v = 0.01 + u(rng);
    const double hidden = 0.05 + 0.5 * u(rng);
    const double initial = u(rng);
    const double gamma = 0.5 + 0.499 * u(rng);
    const auto fb = SmoothVisibility(e, hidden, initial, gamma);
    const auto exact = EnumeratePosterior(e, hidden, initial, gamma);
    for (int l = 0; l < n; ++l) ASSERT_NEAR(fb[l], exact[l], 1e-9);
  }
}

TEST(SmoothVisibility, UninformativeEmissionsKeepHalf) {
  const std::vector<double> e(20, 0.3);
  for (double q : SmoothVisibility(e, 0.3, 0.5, 0.999)) EXPECT_NEAR(q, 0.5, 1e-12);
}

TEST(SmoothVisibility, HalfGammaIsPointwiseBayes) {
  const std::vector<double> e = {0.9, 0.1, 0.5, 1.0, 0.004};
  const double u = 0.2;
  const auto post = SmoothVisibility(e, u, 0.5, 0.5);
  for (std::size_t l = 0; l < e.size(); ++l) EXPECT_NEAR(post[l], e[l] / (e[l] + u), 1e-12);
}

TEST(SmoothVisibility, IsolatedPeakIsPulledDown) {
  const MatchWindow win;
  const double hidden = HiddenEmission(win, ViewSelectionParams{});
  std::vector<double> e(10, EvaluatePhotoLikelihood(-0.5, win).density);
  e[5] = EvaluatePhotoLikelihood(0.95, win).density;
  const auto post = SmoothVisibility(e, hidden, 0.5, 0.999);
  const auto exact = EnumeratePosterior(e, hidden, 0.5, 0.999);
  const double unsmoothed = e[5] / (e[5] + hidden);
  EXPECT_LT(post[5], unsmoothed);
  for (int l = 0; l < 10; ++l) EXPECT_NEAR(post[l], exact[l], 1e-9);
}

TEST(SmoothVisibility, MonotoneInOwnEmission) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> e(8);
    for (double& v : e) v = u(rng);
    const int l = trial % 8;
    const double before = SmoothVisibility(e, 0.3, 0.5, 0.99)[l];
    e[l] *= 1.5;
    EXPECT_GE(SmoothVisibility(e, 0.3, 0.5, 0.99)[l], before - 1e-15);
  }
}

TEST(HiddenEmission, EqualsDensityAtAnchor) {
  const MatchWindow win;
  EXPECT_DOUBLE_EQ(HiddenEmission(win, ViewSelectionParams{}),
                   std::exp(-0.64 / (2.0 * 0.36)));
}

TEST(ViewSelectionState, InitialisedToHalf) {
  const ViewSelectionState s(4, 3, 2);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x)
      for (double q : s.At(x, y)) EXPECT_EQ(q, 0.5);
}

TEST(UpdateVisibilityLine, StartsFromPreviousQ) {
  ViewSelectionState s(3, 1, 1);
  s.q(0, 0, 0) = 0.9;
  const std::vector<Eigen::Vector2i> line = {{0, 0}, {1, 0}, {2, 0}};
  const std::vector<std::vector<double>> dens = {{0.4}, {0.4}, {0.4}};
  UpdateVisibilityLine(s, line, dens, 0.4, 0.999);
  const auto expected = SmoothVisibility(std::vector<double>{0.4, 0.4, 0.4}, 0.4, 0.9, 0.999);
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(s.q(x, 0, 0), expected[x], 1e-15);
  EXPECT_GT(s.q(2, 0, 0), 0.85);
}

TEST(Priors, ParallaxShape) {
  const ViewSelectionParams p;
  EXPECT_EQ(ParallaxPrior(15.0, p), 1.0);
  EXPECT_LT(ParallaxPrior(0.0, p), ParallaxPrior(15.0, p));
  EXPECT_EQ(ParallaxPrior(50.0, p), 0.0);
}

TEST(Priors, ResolutionPenalisesOutsideBand) {
  EXPECT_EQ(ResolutionPrior(1.0), 1.0);
  EXPECT_EQ(ResolutionPrior(0.5), 1.0);
  EXPECT_EQ(ResolutionPrior(2.0), 1.0);
  EXPECT_NEAR(ResolutionPrior(0.25), 0.5, 1e-12);
  EXPECT_NEAR(ResolutionPrior(3.0), 0.5, 1e-12);
}

TEST(Priors, FrontFacing) {
  EXPECT_EQ(FrontFacingPrior(Eigen::Vector3d(0, 0, -1), Eigen::Vector3d(0, 0, 1)), 1.0);
  EXPECT_EQ(FrontFacingPrior(Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, 1)), 0.0);
}

TEST(SampleSourceSubset, SingleSourceAlwaysChosen) {
  StreamRng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleSourceSubset(std::vector<double>{0.3}, 4, rng),
                                          std::vector<int>{0});
}

TEST(SampleSourceSubset, VisibleSourceFrequency) {
  StreamRng rng(7);
  const int n = 10000;
  int visible = 0;
  for (int i = 0; i < n; ++i) visible += SampleSourceSubset(std::vector<double>{0.01, 0.99}, 1, rng)[0] == 1;
  const double sd = std::sqrt(n * 0.99 * 0.01);
  EXPECT_NEAR(visible, 0.99 * n, 3.0 * sd);
}

TEST(SampleSourceSubset, WithoutReplacementAndZeroStop) {
  StreamRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto s = SampleSourceSubset(std::vector<double>{0.5, 0.0, 0.2, 0.3}, 4, rng);
    EXPECT_EQ(s, (std::vector<int>{0, 2, 3}));
  }
}

TEST(SampleSourceSubset, AllZeroFallsBackToUniform) {
  StreamRng rng(4);
  std::array<int, 3> counts{};
  for (int i = 0; i < 9000; ++i) ++counts[SampleSourceSubset(std::vector<double>{0, 0, 0}, 1, rng)[0]];
  for (int c : counts) EXPECT_NEAR(c, 3000, 3.0 * std::sqrt(9000 * (1.0 / 3) * (2.0 / 3)));
}

TEST(SampleSourceSubset, EmptyThrowsNoSources) {
  StreamRng rng(5);
  try {
    SampleSourceSubset(std::vector<double>{}, 2, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoSources);
  }
}

TEST(SourceWeights, BehindSourceAndZeroQ) {
  const CameraView ref = testing::MakeCamera(0, 64, 48, 50, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  const CameraView good = testing::MakeCamera(1, 64, 48, 50, Eigen::Matrix3d::Identity(), Eigen::Vector3d(1.3, 0, 0));
  const CameraView same = testing::MakeCamera(2, 64, 48, 50, Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 0.01));
  const std::vector<const CameraView*> srcs = {&good, &same, &good};
  LocalPlane plane;
  plane.depth = 5.0;
  const auto w = SourceWeights(ref, srcs, {32, 24}, plane, std::vector<double>{1.0, 1.0, 0.0}, ViewSelectionParams{});
  EXPECT_GT(w[0], 0.9);
  EXPECT_LT(w[1], w[0]);
  EXPECT_EQ(w[2], 0.0);
}

}  // namespace
}  // namespace texmvs
