#include "specseg/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "specseg/error.hpp"
#include "specseg/image_io.hpp"

namespace specseg {
namespace {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) {
    throw Error(ErrorCode::DimensionMismatch,
                "prediction is " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                    ", ground truth is " + std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
  }
  Confusion c;
  const auto p = pred.pixels();
  const auto g = gt.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) {
      ++(g[i] ? c.tp : c.fp);
    } else {
      ++(g[i] ? c.fn : c.tn);
    }
  }
  return c;
}

}  // namespace

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  const auto uni = c.tp + c.fp + c.fn;
  return uni == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(uni);
}

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  const auto denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(pred.size());
}

Histogram histogram(const GrayImage& gray) {
  Histogram hist{};
  for (const auto v : gray.pixels()) ++hist[v];
  return hist;
}

int otsu_threshold(const Histogram& hist) {
  __extension__ using i128 = __int128;
  i128 total = 0;
  i128 total_sum = 0;
  int distinct = 0;
  for (int v = 0; v < 256; ++v) {
    total += hist[static_cast<std::size_t>(v)];
    total_sum += static_cast<i128>(v) * hist[static_cast<std::size_t>(v)];
    distinct += hist[static_cast<std::size_t>(v)] != 0;
  }
  if (distinct < 2) {
    throw Error(ErrorCode::DegenerateImage, "image has a single intensity, no two classes exist");
  }
  // w0*w1*(mu0-mu1)^2 = (N*S0 - n0*S)^2 / (N^2 * n0 * n1). The numerator is
  // exact in 128-bit integers; thresholds sharing a partition compare equal.
  i128 n0 = 0;
  i128 s0 = 0;
  int best_t = 0;
  long double best = -1.0L;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[static_cast<std::size_t>(t)];
    s0 += static_cast<i128>(t) * hist[static_cast<std::size_t>(t)];
    const i128 n1 = total - n0;
    long double between = 0.0L;
    if (n0 > 0 && n1 > 0) {
      const auto d = static_cast<long double>(total * s0 - n0 * total_sum);
      between = d * d / (static_cast<long double>(n0) * static_cast<long double>(n1));
    }
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

OtsuResult otsu(const GrayImage& gray) {
  OtsuResult result;
  result.threshold = otsu_threshold(histogram(gray));
  result.mask = threshold_at_least(gray, result.threshold + 1);
  return result;
}

double relative_improvement(double value, double baseline) {
  if (!(baseline > 0.0)) {
    throw Error(ErrorCode::ZeroBaseline, "baseline must be positive");
  }
  return 100.0 * (value - baseline) / baseline;
}

void finalize_means(MetricsReport& report) {
  report.mean_iou = report.mean_dsc = report.mean_pixel_accuracy = 0.0;
  if (report.images.empty()) return;
  for (const auto& s : report.images) {
    report.mean_iou += s.iou;
    report.mean_dsc += s.dsc;
    report.mean_pixel_accuracy += s.pixel_accuracy;
  }
  const auto n = static_cast<double>(report.images.size());
  report.mean_iou /= n;
  report.mean_dsc /= n;
  report.mean_pixel_accuracy /= n;
}

MetricsReport evaluate_dataset(const std::vector<MaskPair>& pairs, unsigned workers) {
  MetricsReport report;
  report.images.resize(pairs.size());
  std::vector<std::optional<Error>> failures(pairs.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      const auto& pair = pairs[i];
      auto& scores = report.images[i];
      scores.name = pair.name;
      scores.pred = pair.pred;
      scores.gt = pair.gt;
      try {
        const auto pred = read_mask(pair.pred);
        const auto gt = read_mask(pair.gt);
        scores.iou = iou(pred, gt);
        scores.dsc = dsc(pred, gt);
        scores.pixel_accuracy = pixel_accuracy(pred, gt);
      } catch (const Error& e) {
        failures[i].emplace(e.code(), "pair '" + pair.name + "' (" + pair.pred.string() + ", " +
                                          pair.gt.string() + "): " + e.detail());
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(pairs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
  }
  // Report the first failing pair in input order, independent of scheduling.
  for (auto& f : failures) {
    if (f) throw *f;
  }
  finalize_means(report);
  return report;
}

}  // namespace specseg
