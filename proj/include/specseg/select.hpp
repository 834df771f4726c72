#pragma once

#include <cstddef>
#include <vector>

#include "specseg/candidates.hpp"
#include "specseg/image.hpp"

namespace specseg {

enum class FallbackPolicy { strict, smallest_ratio };

struct SelectorConfig {
  /// Candidates whose white ratio exceeds this bound are discarded.
  double r_max = 0.5;
  FallbackPolicy fallback_policy = FallbackPolicy::strict;

  void validate() const;
};

struct SelectionResult {
  std::size_t selected_index = 0;
  std::vector<double> ratios;
  std::vector<bool> valid;
  bool used_fallback = false;
};

/// Foreground pixels over the full image area.
double white_ratio(const BinaryMask& mask) noexcept;

/// Picks the candidate with the largest white ratio among those at or below
/// r_max, lowest index on ties. With no valid candidate, strict policy throws
/// NoValidMask and smallest_ratio picks the minimum ratio instead.
SelectionResult select_by_ratio(const std::vector<double>& ratios, const SelectorConfig& config);

SelectionResult select_mask(const CandidateSet& candidates, const SelectorConfig& config);

}  // namespace specseg
