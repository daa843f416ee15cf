#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace texmvs {

// Row-major 2D buffer. Pixel (x, y) is column x, row y.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T())
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Grid<float>;
using RgbImage = Grid<Eigen::Vector3f>;

inline float Luma(const Eigen::Vector3f& rgb) {
  return 0.299f * rgb.x() + 0.587f * rgb.y() + 0.114f * rgb.z();
}

GrayImage ToGray(const RgbImage& rgb);

// Bilinear lookup; caller guarantees 0 <= x <= w-1 and 0 <= y <= h-1.
inline float SampleBilinear(const GrayImage& image, double x, double y) {
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = x0 + 1 < image.width() ? x0 + 1 : x0;
  const int y1 = y0 + 1 < image.height() ? y0 + 1 : y0;
  const float ax = static_cast<float>(x - x0);
  const float ay = static_cast<float>(y - y0);
  const float top = image(x0, y0) + ax * (image(x1, y0) - image(x0, y0));
  const float bottom = image(x0, y1) + ax * (image(x1, y1) - image(x0, y1));
  return top + ay * (bottom - top);
}

}  // namespace texmvs
