#pragma once

#include <cstdint>
#include <vector>

#include "specseg/image.hpp"

namespace specseg {

enum class Connectivity { four, eight };

/// Component labeling of a binary mask. Label 0 is background; components are
/// numbered 1..K in the row-major order of their first pixel.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> labels;
  /// component_sizes[k] is the pixel count of label k; entry 0 is unused.
  std::vector<std::size_t> component_sizes;

  std::size_t component_count() const noexcept {
    return component_sizes.empty() ? 0 : component_sizes.size() - 1;
  }
  std::uint32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

/// Two-pass union-find labeling.
LabelMap connected_components(const BinaryMask& mask, Connectivity conn);

/// Label id of the largest component, lowest id on ties. Throws EmptyLabeling
/// when there are no components.
std::uint32_t largest_label(const LabelMap& labels);

BinaryMask component_mask(const LabelMap& labels, std::uint32_t label);

/// Mask of the largest component. Throws EmptyLabeling when K = 0.
BinaryMask largest_component(const LabelMap& labels);

/// Invert, keep the largest 4-connected background component, invert back.
/// Every background region other than the largest one becomes foreground.
BinaryMask fill_holes(const BinaryMask& mask);

/// Largest 8-connected foreground component with all holes filled.
/// Throws EmptyMask when the input has no foreground.
BinaryMask postprocess(const BinaryMask& mask);

}  // namespace specseg
