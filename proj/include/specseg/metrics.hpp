#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specseg/image.hpp"

namespace specseg {

// All three metrics throw DimensionMismatch when the masks differ in size.

/// |pred ∩ gt| / |pred ∪ gt|, 1.0 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);
/// 2|pred ∩ gt| / (|pred| + |gt|), 1.0 when both masks are empty.
double dsc(const BinaryMask& pred, const BinaryMask& gt);
/// Fraction of pixels where pred and gt agree.
double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt);

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& gray);

/// Threshold t maximizing the between-class variance of {v <= t} and {v > t},
/// smallest t on ties. Throws DegenerateImage when fewer than two distinct
/// intensities occur.
int otsu_threshold(const Histogram& hist);

struct OtsuResult {
  int threshold = 0;
  /// Foreground is the brighter class, v > threshold.
  BinaryMask mask;
};

OtsuResult otsu(const GrayImage& gray);

/// 100 * (value - baseline) / baseline. Throws ZeroBaseline unless baseline > 0.
double relative_improvement(double value, double baseline);

struct PairScores {
  std::string name;
  std::filesystem::path pred;
  std::filesystem::path gt;
  double iou = 0.0;
  double dsc = 0.0;
  double pixel_accuracy = 0.0;
};

struct MetricsReport {
  std::string method;
  std::vector<PairScores> images;
  double mean_iou = 0.0;
  double mean_dsc = 0.0;
  double mean_pixel_accuracy = 0.0;
};

struct MaskPair {
  std::string name;
  std::filesystem::path pred;
  std::filesystem::path gt;
};

/// Per-pair scores plus unweighted means, in input order. Pairs are scored on
/// up to `workers` threads. Load or size errors are rethrown with the pair's
/// paths in the message (same error code).
MetricsReport evaluate_dataset(const std::vector<MaskPair>& pairs, unsigned workers = 1);

/// Fills the means from the per-image entries.
void finalize_means(MetricsReport& report);

}  // namespace specseg
