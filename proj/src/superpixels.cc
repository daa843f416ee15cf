#include "texmvs/superpixels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace texmvs {
namespace {

double SrgbToLinear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double LabF(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

Eigen::Vector3d RgbToLab(const Eigen::Vector3f& rgb) {
  const double r = SrgbToLinear(std::clamp<double>(rgb.x(), 0.0, 1.0));
  const double g = SrgbToLinear(std::clamp<double>(rgb.y(), 0.0, 1.0));
  const double b = SrgbToLinear(std::clamp<double>(rgb.z(), 0.0, 1.0));
  // D65 white.
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b);
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  const double fx = LabF(x), fy = LabF(y), fz = LabF(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Center {
  Eigen::Vector3d lab;
  double x, y;
};

// Relabels into 4-connected regions, absorbing fragments of at most
// `min_size` pixels into the previously visited neighbouring region.
Grid<int> EnforceConnectivity(const Grid<int>& labels, int min_size) {
  const int w = labels.width();
  const int h = labels.height();
  Grid<int> out(w, h, -1);
  const int dx[4] = {-1, 0, 1, 0};
  const int dy[4] = {0, -1, 0, 1};
  std::vector<int> component;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (out(x, y) >= 0) continue;
      int adjacent = -1;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (out.contains(nx, ny) && out(nx, ny) >= 0) adjacent = out(nx, ny);
      }
      component.clear();
      component.push_back(y * w + x);
      out(x, y) = next;
      for (std::size_t i = 0; i < component.size(); ++i) {
        const int cx = component[i] % w, cy = component[i] / w;
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (out.contains(nx, ny) && out(nx, ny) < 0 && labels(nx, ny) == labels(x, y)) {
            out(nx, ny) = next;
            component.push_back(ny * w + nx);
          }
        }
      }
      if (static_cast<int>(component.size()) <= min_size && adjacent >= 0) {
        for (int idx : component) out[idx] = adjacent;
      } else {
        ++next;
      }
    }
  }
  return out;
}

}  // namespace

int SuperpixelTarget(int image_width, double divisor) {
  return std::max(2, static_cast<int>(std::lround(image_width / divisor)));
}

double BhattacharyyaCoefficient(const std::vector<double>& a, const std::vector<double>& b) {
  double bc = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) bc += std::sqrt(a[i] * b[i]);
  return std::min(bc, 1.0);
}

SuperpixelSegmentation SegmentSuperpixels(const RgbImage& rgb, int target_count,
                                          const SuperpixelParams& params,
                                          SegmentationLevel level) {
  const int w = rgb.width();
  const int h = rgb.height();
  const int n = w * h;
  target_count = std::clamp(target_count, 1, n);

  Grid<Eigen::Vector3d> lab(w, h);
  for (int i = 0; i < n; ++i) lab[i] = RgbToLab(rgb[i]);

  const int grid_x = std::max(1, static_cast<int>(std::lround(
                                     std::sqrt(static_cast<double>(target_count) * w / h))));
  const int grid_y = std::max(1, static_cast<int>(std::lround(
                                     static_cast<double>(target_count) / grid_x)));
  const double step_x = static_cast<double>(w) / grid_x;
  const double step_y = static_cast<double>(h) / grid_y;
  const double step = std::sqrt(static_cast<double>(n) / (grid_x * grid_y));

  auto gradient = [&](int x, int y) {
    const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
    return (lab(x1, y) - lab(x0, y)).squaredNorm() + (lab(x, y1) - lab(x, y0)).squaredNorm();
  };

  std::vector<Center> centers;
  for (int j = 0; j < grid_y; ++j) {
    for (int i = 0; i < grid_x; ++i) {
      int cx = std::min(w - 1, static_cast<int>((i + 0.5) * step_x));
      int cy = std::min(h - 1, static_cast<int>((j + 0.5) * step_y));
      int best_x = cx, best_y = cy;
      double best = gradient(cx, cy);
      for (int oy = -1; oy <= 1; ++oy) {
        for (int ox = -1; ox <= 1; ++ox) {
          const int px = cx + ox, py = cy + oy;
          if (!lab.contains(px, py)) continue;
          const double g = gradient(px, py);
          if (g < best) {
            best = g;
            best_x = px;
            best_y = py;
          }
        }
      }
      centers.push_back({lab(best_x, best_y), static_cast<double>(best_x),
                         static_cast<double>(best_y)});
    }
  }

  Grid<int> labels(w, h, 0);
  Grid<double> dist(w, h);
  const double spatial_scale = (params.compactness / step) * (params.compactness / step);
  const int radius = static_cast<int>(std::ceil(std::max(step_x, step_y)));
  for (int iter = 0; iter < params.iterations; ++iter) {
    dist.fill(std::numeric_limits<double>::infinity());
    for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
      const Center& ctr = centers[c];
      const int x0 = std::max(0, static_cast<int>(ctr.x) - radius);
      const int x1 = std::min(w - 1, static_cast<int>(ctr.x) + radius);
      const int y0 = std::max(0, static_cast<int>(ctr.y) - radius);
      const int y1 = std::min(h - 1, static_cast<int>(ctr.y) + radius);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double ds = (x - ctr.x) * (x - ctr.x) + (y - ctr.y) * (y - ctr.y);
          const double d = (lab(x, y) - ctr.lab).squaredNorm() + ds * spatial_scale;
          if (d < dist(x, y)) {
            dist(x, y) = d;
            labels(x, y) = c;
          }
        }
      }
    }
    std::vector<Eigen::Vector3d> sum_lab(centers.size(), Eigen::Vector3d::Zero());
    std::vector<double> sum_x(centers.size(), 0.0), sum_y(centers.size(), 0.0);
    std::vector<int> count(centers.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int c = labels(x, y);
        sum_lab[c] += lab(x, y);
        sum_x[c] += x;
        sum_y[c] += y;
        ++count[c];
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (count[c] == 0) continue;
      centers[c] = {sum_lab[c] / count[c], sum_x[c] / count[c], sum_y[c] / count[c]};
    }
  }

  const int min_size = std::max(1, n / (4 * grid_x * grid_y));
  SuperpixelSegmentation seg;
  seg.level = level;
  seg.histogram_bins = params.histogram_bins;
  seg.labels = EnforceConnectivity(labels, min_size);

  int count = 0;
  for (int i = 0; i < n; ++i) count = std::max(count, seg.labels[i] + 1);
  seg.segments.resize(count);
  const int bins = params.histogram_bins;
  std::vector<std::set<int>> adjacency(count);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int k = seg.labels(x, y);
      Segment& s = seg.segments[k];
      s.pixels.push_back(y * w + x);
      if (x + 1 < w && seg.labels(x + 1, y) != k) {
        adjacency[k].insert(seg.labels(x + 1, y));
        adjacency[seg.labels(x + 1, y)].insert(k);
      }
      if (y + 1 < h && seg.labels(x, y + 1) != k) {
        adjacency[k].insert(seg.labels(x, y + 1));
        adjacency[seg.labels(x, y + 1)].insert(k);
      }
    }
  }
  auto bin_of = [bins](float v) {
    return std::clamp(static_cast<int>(v * bins), 0, bins - 1);
  };
  for (int k = 0; k < count; ++k) {
    Segment& s = seg.segments[k];
    s.neighbors.assign(adjacency[k].begin(), adjacency[k].end());
    s.histogram.assign(static_cast<std::size_t>(bins) * bins * bins, 0.0);
    for (int idx : s.pixels) {
      const Eigen::Vector3f& c = rgb[idx];
      ++s.histogram[(bin_of(c.x()) * bins + bin_of(c.y())) * bins + bin_of(c.z())];
    }
    const double total = static_cast<double>(s.pixels.size());
    for (double& v : s.histogram) v /= total;
  }
  return seg;
}

}  // namespace texmvs
