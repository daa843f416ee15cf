#include "texmvs/refinement.h"

#include <array>
#include <limits>
#include <cmath>
#include <vector>

#include "texmvs/error.h"

namespace texmvs {

void SpeckleConfig::Validate() const {
  if (!(max_area_fraction > 0.0 && max_area_fraction < 1.0) ||
      !(continuity_fraction > 0.0 && continuity_fraction < 1.0)) {
    throw Error(ErrorKind::kConfigError, "speckle fractions must lie in (0, 1)");
  }
}

void FillConfig::Validate() const {
  if (window_radius < 1 || k_min < 1) {
    throw Error(ErrorKind::kConfigError, "refine.window_radius and refine.k_min must be >= 1");
  }
}

DepthNormalMap SpeckleFilter(const DepthNormalMap& map, const SpeckleConfig& config,
                             double scene_size) {
  const int w = map.width();
  const int h = map.height();
  const double max_jump = config.continuity_fraction * scene_size;
  const double min_area = config.max_area_fraction * w * h;
  DepthNormalMap out = map;
  std::vector<int> component_of(static_cast<std::size_t>(w) * h, -1);
  std::vector<int> stack;
  std::vector<int> members;
  int next = 0;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  for (int start = 0; start < w * h; ++start) {
    if (component_of[start] >= 0 || !(map.depth[start] > 0.0f)) continue;
    members.clear();
    stack.assign(1, start);
    component_of[start] = next;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      members.push_back(idx);
      const int x = idx % w, y = idx / w;
      const double d = map.depth[idx];
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (!map.depth.contains(nx, ny)) continue;
        const int nidx = ny * w + nx;
        if (component_of[nidx] >= 0 || !(map.depth[nidx] > 0.0f)) continue;
        if (std::abs(map.depth[nidx] - d) > max_jump) continue;
        component_of[nidx] = next;
        stack.push_back(nidx);
      }
    }
    if (static_cast<double>(members.size()) < min_area) {
      for (int idx : members) out.depth[idx] = 0.0f;
    }
    ++next;
  }
  return out;
}

DepthNormalMap MedianFill(const DepthNormalMap& map, const GrayImage& gray,
                          const FillConfig& config, const MatchWindow& kernel) {
  const int w = map.width();
  const int h = map.height();
  const int r = config.window_radius;
  DepthNormalMap out = map;

  struct Neighbor {
    float depth;
    Eigen::Vector3f normal;
    double weight;
  };
  std::vector<Neighbor> neighbors;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (map.valid(x, y)) continue;
      neighbors.clear();
      float dmin = std::numeric_limits<float>::max();
      float dmax = 0.0f;
      for (int oy = -r; oy <= r; ++oy) {
        for (int ox = -r; ox <= r; ++ox) {
          const int qx = x + ox, qy = y + oy;
          if (!map.depth.contains(qx, qy) || !map.valid(qx, qy)) continue;
          const float d = map.depth(qx, qy);
          dmin = std::min(dmin, d);
          dmax = std::max(dmax, d);
          neighbors.push_back({d, map.normal(qx, qy),
                               BilateralWeight(ox * ox + oy * oy,
                                               gray(qx, qy) - gray(x, y), kernel)});
        }
      }
      if (static_cast<int>(neighbors.size()) < config.k_min) continue;

      const double width = (static_cast<double>(dmax) - dmin) / 3.0;
      auto bin_of = [&](float d) {
        if (!(width > 0.0)) return 0;
        return std::min(2, static_cast<int>((d - dmin) / width));
      };
      std::array<int, 3> count{0, 0, 0};
      std::array<double, 3> sum{0.0, 0.0, 0.0};
      for (const Neighbor& n : neighbors) {
        ++count[bin_of(n.depth)];
        sum[bin_of(n.depth)] += n.depth;
      }
      int best = -1;
      for (int b = 0; b < 3; ++b) {
        if (count[b] == 0) continue;
        if (best < 0 || count[b] > count[best] ||
            (count[b] == count[best] && sum[b] / count[b] < sum[best] / count[best])) {
          best = b;
        }
      }

      double wsum = 0.0, dsum = 0.0;
      Eigen::Vector3d nsum = Eigen::Vector3d::Zero();
      double plain_dsum = 0.0;
      Eigen::Vector3d plain_nsum = Eigen::Vector3d::Zero();
      for (const Neighbor& n : neighbors) {
        if (bin_of(n.depth) != best) continue;
        wsum += n.weight;
        dsum += n.weight * n.depth;
        nsum += n.weight * n.normal.cast<double>();
        plain_dsum += n.depth;
        plain_nsum += n.normal.cast<double>();
      }
      if (!(wsum > 0.0)) {  // every weight underflowed
        wsum = count[best];
        dsum = plain_dsum;
        nsum = plain_nsum;
      }
      if (nsum.norm() < 1e-12) nsum = plain_nsum;
      if (nsum.norm() < 1e-12) continue;
      out.depth(x, y) = static_cast<float>(dsum / wsum);
      out.normal(x, y) = nsum.normalized().cast<float>();
    }
  }
  return out;
}

}  // namespace texmvs
