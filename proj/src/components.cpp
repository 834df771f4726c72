#include "specseg/components.hpp"

#include <algorithm>
#include <numeric>

#include "specseg/error.hpp"

namespace specseg {
namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller id becomes the root; provisional ids are raster ordered.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

LabelMap connected_components(const BinaryMask& mask, Connectivity conn) {
  const int w = mask.width();
  const int h = mask.height();
  LabelMap out;
  out.width = w;
  out.height = h;
  out.labels.assign(mask.size(), 0);
  out.component_sizes.assign(1, 0);

  DisjointSet sets;
  sets.make();  // provisional id 0 is background
  auto& labels = out.labels;

  // First pass: look at the already visited neighbors (left, and the row above).
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = mask.index(x, y);
      if (!mask[i]) continue;
      std::uint32_t current = 0;
      auto visit = [&](int nx, int ny) {
        if (!mask.contains(nx, ny)) return;
        const std::uint32_t n = labels[mask.index(nx, ny)];
        if (n == 0) return;
        if (current == 0) {
          current = n;
        } else if (n != current) {
          sets.unite(current, n);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (conn == Connectivity::eight) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      labels[i] = current != 0 ? current : sets.make();
    }
  }

  // Second pass: resolve roots and renumber in order of first appearance.
  std::vector<std::uint32_t> final_id;
  for (auto& label : labels) {
    if (label == 0) continue;
    const std::uint32_t root = sets.find(label);
    if (final_id.size() <= root) final_id.resize(root + 1, 0);
    if (final_id[root] == 0) {
      out.component_sizes.push_back(0);
      final_id[root] = static_cast<std::uint32_t>(out.component_sizes.size() - 1);
    }
    label = final_id[root];
    ++out.component_sizes[label];
  }
  return out;
}

std::uint32_t largest_label(const LabelMap& labels) {
  if (labels.component_count() == 0) {
    throw Error(ErrorCode::EmptyLabeling, "labeling has no components");
  }
  const auto& sizes = labels.component_sizes;
  // max_element returns the first maximum, i.e. the lowest label.
  return static_cast<std::uint32_t>(std::max_element(sizes.begin() + 1, sizes.end()) - sizes.begin());
}

BinaryMask component_mask(const LabelMap& labels, std::uint32_t label) {
  BinaryMask out(labels.width, labels.height);
  std::ranges::transform(labels.labels, out.pixels().begin(),
                         [label](std::uint32_t l) -> std::uint8_t { return l == label ? 1 : 0; });
  return out;
}

BinaryMask largest_component(const LabelMap& labels) {
  return component_mask(labels, largest_label(labels));
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const auto background = connected_components(invert(mask), Connectivity::four);
  if (background.component_count() == 0) {
    return mask;
  }
  return invert(largest_component(background));
}

BinaryMask postprocess(const BinaryMask& mask) {
  if (foreground_count(mask) == 0) {
    throw Error(ErrorCode::EmptyMask, "selected mask has no foreground");
  }
  return fill_holes(largest_component(connected_components(mask, Connectivity::eight)));
}

}  // namespace specseg
