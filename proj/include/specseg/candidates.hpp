#pragma once

#include <vector>

#include "specseg/image.hpp"

namespace specseg {

/// Up to three candidate masks for one prompt, in the segmenter's order.
struct CandidateSet {
  static constexpr std::size_t kMaxCandidates = 3;

  std::vector<BinaryMask> candidates;
  /// Segmenter quality scores, one per candidate when present. Informational:
  /// selection never looks at them.
  std::vector<double> provider_scores;

  std::size_t size() const noexcept { return candidates.size(); }
  const BinaryMask& operator[](std::size_t i) const { return candidates[i]; }

  /// Enforces 1..3 candidates, matching score count, and that every mask is
  /// width x height. Throws NoCandidates, ProviderFailure or DimensionMismatch.
  void validate(int width, int height) const;
};

}  // namespace specseg
