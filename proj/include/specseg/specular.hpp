#pragma once

#include "specseg/image.hpp"

namespace specseg {

enum class DetectorMethod { percentile, adaptive };

struct DetectorConfig {
  DetectorMethod method = DetectorMethod::percentile;
  /// Upper bound on the fraction of pixels at or above the percentile threshold.
  double percentile_fraction = 0.005;
  /// Adaptive threshold is mean + adaptive_k * stddev.
  double adaptive_k = 3.0;
  int absolute_floor = 200;
  /// Opening uses a square of side 2 * opening_radius + 1.
  int opening_radius = 1;
  /// Components (8-connected) smaller than this are dropped after opening.
  int min_region_area = 4;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Method threshold before the floor is applied; may be 256 (nothing passes).
int method_threshold(const GrayImage& gray, const DetectorConfig& config);

/// max(absolute_floor, method_threshold).
int detection_threshold(const GrayImage& gray, const DetectorConfig& config);

// Square-element morphology. Out-of-image pixels are ignored, so neither
// operation is biased at the image border.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask open(const BinaryMask& mask, int radius);

/// Drops 8-connected components with fewer than min_area pixels.
BinaryMask remove_small_regions(const BinaryMask& mask, int min_area);

/// Core highlight region. Throws NoSpecularRegion when nothing survives.
BinaryMask detect_specular(const GrayImage& gray, const DetectorConfig& config);

/// Mean foreground position, each coordinate rounded half away from zero.
/// Throws EmptyRegion on an empty mask.
PixelPoint center_of_mass(const BinaryMask& region);

/// Point handed to the segmenter: the center of mass of the largest 8-connected
/// component, snapped to that component's nearest pixel when it falls outside
/// (nearest by Euclidean distance, row-major order on ties). Always foreground.
PixelPoint prompt_point(const BinaryMask& region);

}  // namespace specseg
