#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library routines they check.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "specseg/components.hpp"
#include "specseg/image.hpp"
#include "specseg/metrics.hpp"

namespace specseg::testing {

/// Mask from rows of '0'/'1' characters.
inline BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '1';
  }
  return m;
}

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(w, h);
  for (auto& v : m.pixels()) v = on(rng) ? 1 : 0;
  return m;
}

struct OracleLabels {
  std::vector<int> labels;  // 0 = background
  int count = 0;
};

/// Recursive flood fill, seeds visited in row-major order.
inline OracleLabels flood_fill_labels(const BinaryMask& m, Connectivity conn) {
  OracleLabels out;
  out.labels.assign(m.size(), 0);
  std::function<void(int, int, int)> fill = [&](int x, int y, int label) {
    if (x < 0 || y < 0 || x >= m.width() || y >= m.height()) return;
    const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(m.width()) + static_cast<std::size_t>(x);
    if (!m[i] || out.labels[i] != 0) return;
    out.labels[i] = label;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (conn == Connectivity::four && dx != 0 && dy != 0) continue;
        fill(x + dx, y + dy, label);
      }
    }
  };
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(m.width()) + static_cast<std::size_t>(x);
      if (m[i] && out.labels[i] == 0) fill(x, y, ++out.count);
    }
  }
  return out;
}

inline int oracle_component_count(const BinaryMask& m, Connectivity conn) {
  return flood_fill_labels(m, conn).count;
}

/// True when both labelings induce the same partition with the same numbering.
inline bool same_labeling(const LabelMap& got, const OracleLabels& want) {
  if (static_cast<int>(got.component_count()) != want.count) return false;
  for (std::size_t i = 0; i < want.labels.size(); ++i) {
    if (static_cast<int>(got.labels[i]) != want.labels[i]) return false;
  }
  return true;
}

/// Exhaustive Otsu: evaluates w0 * w1 * (mu0 - mu1)^2 from the class
/// definitions at every threshold, keeping the first maximum.
inline int exhaustive_otsu(const Histogram& hist) {
  double total = 0.0;
  for (const auto c : hist) total += static_cast<double>(c);
  int best_t = 0;
  double best = -1.0;
  for (int t = 0; t < 256; ++t) {
    double n0 = 0.0, s0 = 0.0, n1 = 0.0, s1 = 0.0;
    for (int v = 0; v < 256; ++v) {
      const auto c = static_cast<double>(hist[static_cast<std::size_t>(v)]);
      if (v <= t) {
        n0 += c;
        s0 += c * v;
      } else {
        n1 += c;
        s1 += c * v;
      }
    }
    double between = 0.0;
    if (n0 > 0 && n1 > 0) {
      const double mu0 = s0 / n0;
      const double mu1 = s1 / n1;
      between = (n0 / total) * (n1 / total) * (mu0 - mu1) * (mu0 - mu1);
    }
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace specseg::testing
