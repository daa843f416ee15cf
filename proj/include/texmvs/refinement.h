#pragma once

#include "texmvs/image.h"
#include "texmvs/photoconsistency.h"
#include "texmvs/scene.h"

namespace texmvs {

struct SpeckleConfig {
  double max_area_fraction = 1.0 / 5000.0;  // of image area
  double continuity_fraction = 0.10;        // of scene size

  void Validate() const;
};

// Invalidates 4-connected components (neighbours continuous when their depths
// differ by at most continuity_fraction * scene_size) whose area is below
// max_area_fraction * image area. Surviving depths are untouched.
DepthNormalMap SpeckleFilter(const DepthNormalMap& map, const SpeckleConfig& config,
                             double scene_size);

struct FillConfig {
  int window_radius = 7;
  int k_min = 5;
  bool enable = true;

  void Validate() const;
};

// Single-pass gap filling by an approximate bilateral weighted median: for each
// invalid pixel with at least k_min valid neighbours, the neighbour depths are
// binned into three equal bins over [min, max], the most populated bin wins
// (ties go to the bin with the smaller mean depth) and its members are averaged
// with the bilateral kernel of `kernel`.
DepthNormalMap MedianFill(const DepthNormalMap& map, const GrayImage& gray,
                          const FillConfig& config, const MatchWindow& kernel);

}  // namespace texmvs
