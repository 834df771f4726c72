#include "specseg/specular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "specseg/components.hpp"
#include "specseg/error.hpp"

namespace specseg {
namespace {

// One-dimensional running min/max along rows or columns; the square element is
// separable, so erosion = row pass then column pass.
template <bool kErode>
BinaryMask morph_pass(const BinaryMask& src, int radius, bool horizontal) {
  const int w = src.width();
  const int h = src.height();
  BinaryMask out(w, h);
  const int outer = horizontal ? h : w;
  const int inner = horizontal ? w : h;
  for (int o = 0; o < outer; ++o) {
    // Prefix count of foreground along the line for O(1) window queries.
    std::vector<int> prefix(static_cast<std::size_t>(inner) + 1, 0);
    for (int i = 0; i < inner; ++i) {
      const auto v = horizontal ? src.at(i, o) : src.at(o, i);
      prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + v;
    }
    for (int i = 0; i < inner; ++i) {
      const int lo = std::max(0, i - radius);
      const int hi = std::min(inner - 1, i + radius);
      const int ones = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
      const bool set = kErode ? ones == hi - lo + 1 : ones > 0;
      (horizontal ? out.at(i, o) : out.at(o, i)) = set ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(percentile_fraction > 0.0 && percentile_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "percentile_fraction must lie in (0, 1)");
  }
  if (!(adaptive_k > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "adaptive_k must be positive");
  }
  if (absolute_floor < 0 || absolute_floor > 255) {
    throw Error(ErrorCode::InvalidConfig, "absolute_floor must lie in [0, 255]");
  }
  if (opening_radius < 0) {
    throw Error(ErrorCode::InvalidConfig, "opening_radius must be non-negative");
  }
  if (min_region_area < 0) {
    throw Error(ErrorCode::InvalidConfig, "min_region_area must be non-negative");
  }
}

int method_threshold(const GrayImage& gray, const DetectorConfig& config) {
  const auto n = static_cast<double>(gray.size());
  if (config.method == DetectorMethod::percentile) {
    std::array<std::size_t, 256> histogram{};
    for (const auto v : gray.pixels()) ++histogram[v];
    // Walk down from 255 while the tail fraction stays within the budget; the
    // tail count is monotone in t, so the last admissible t is the smallest.
    std::size_t tail = 0;
    int t = 256;
    for (int candidate = 255; candidate >= 0; --candidate) {
      tail += histogram[static_cast<std::size_t>(candidate)];
      if (static_cast<double>(tail) / n > config.percentile_fraction) break;
      t = candidate;
    }
    return t;
  }
  double sum = 0.0;
  for (const auto v : gray.pixels()) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (const auto v : gray.pixels()) sq += (v - mean) * (v - mean);
  const double sigma = std::sqrt(sq / n);
  const double t = std::round(mean + config.adaptive_k * sigma);
  return static_cast<int>(std::clamp(t, 0.0, 255.0));
}

int detection_threshold(const GrayImage& gray, const DetectorConfig& config) {
  return std::max(config.absolute_floor, method_threshold(gray, config));
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  return morph_pass<true>(morph_pass<true>(mask, radius, true), radius, false);
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  return morph_pass<false>(morph_pass<false>(mask, radius, true), radius, false);
}

BinaryMask open(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }

BinaryMask remove_small_regions(const BinaryMask& mask, int min_area) {
  const auto labels = connected_components(mask, Connectivity::eight);
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto l = labels.labels[i];
    out[i] = (l != 0 && labels.component_sizes[l] >= static_cast<std::size_t>(min_area)) ? 1 : 0;
  }
  return out;
}

BinaryMask detect_specular(const GrayImage& gray, const DetectorConfig& config) {
  config.validate();
  const int t = detection_threshold(gray, config);
  auto region = remove_small_regions(open(threshold_at_least(gray, t), config.opening_radius),
                                     config.min_region_area);
  if (foreground_count(region) == 0) {
    throw Error(ErrorCode::NoSpecularRegion, "no highlight survives threshold " + std::to_string(t));
  }
  return region;
}

PixelPoint center_of_mass(const BinaryMask& region) {
  std::int64_t sx = 0;
  std::int64_t sy = 0;
  std::int64_t n = 0;
  for (int y = 0; y < region.height(); ++y) {
    for (int x = 0; x < region.width(); ++x) {
      if (region.at(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) {
    throw Error(ErrorCode::EmptyRegion, "center of mass of an empty region");
  }
  // Coordinates are non-negative, so half-away-from-zero is floor(s/n + 1/2).
  return {static_cast<int>((2 * sx + n) / (2 * n)), static_cast<int>((2 * sy + n) / (2 * n))};
}

PixelPoint prompt_point(const BinaryMask& region) {
  if (foreground_count(region) == 0) {
    throw Error(ErrorCode::EmptyRegion, "prompt point of an empty region");
  }
  const auto blob = largest_component(connected_components(region, Connectivity::eight));
  const auto com = center_of_mass(blob);
  if (blob.at(com.x, com.y)) {
    return com;
  }
  PixelPoint best = com;
  auto best_d2 = std::numeric_limits<std::int64_t>::max();
  for (int y = 0; y < blob.height(); ++y) {
    for (int x = 0; x < blob.width(); ++x) {
      if (!blob.at(x, y)) continue;
      const std::int64_t dx = x - com.x;
      const std::int64_t dy = y - com.y;
      const auto d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {x, y};
      }
    }
  }
  return best;
}

}  // namespace specseg
