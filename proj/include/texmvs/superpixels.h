#pragma once

#include <vector>

#include "texmvs/image.h"

namespace texmvs {

enum class SegmentationLevel { kFine, kCoarse };

struct Segment {
  std::vector<int> pixels;       // linear indices y * width + x
  std::vector<double> histogram; // joint RGB histogram, bins^3 entries, sums to 1
  std::vector<int> neighbors;    // sorted, 4-adjacent segment ids
};

struct SuperpixelSegmentation {
  Grid<int> labels;
  std::vector<Segment> segments;
  SegmentationLevel level = SegmentationLevel::kFine;
  int histogram_bins = 8;

  int size() const { return static_cast<int>(segments.size()); }
};

struct SuperpixelParams {
  double compactness = 10.0;  // Lab units per grid step
  int iterations = 10;
  int histogram_bins = 8;     // per channel
};

// SLIC clustering in CIELab followed by connectivity enforcement: every label is
// one 4-connected region, fragments smaller than a quarter of the nominal
// superpixel area are merged into an adjacent region.
SuperpixelSegmentation SegmentSuperpixels(const RgbImage& rgb, int target_count,
                                          const SuperpixelParams& params = {},
                                          SegmentationLevel level = SegmentationLevel::kFine);

// Target counts from the image width: width / divisor, at least 2.
int SuperpixelTarget(int image_width, double divisor);

double BhattacharyyaCoefficient(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace texmvs
