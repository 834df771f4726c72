#include "specseg/image.hpp"

#include <algorithm>

namespace specseg {

std::uint8_t luma(Rgb pixel) noexcept {
  // Fixed point in thousandths: 299 + 587 + 114 = 1000, so +500 then /1000 is
  // round-half-up of the exact weighted sum.
  const int weighted = 299 * pixel.r + 587 * pixel.g + 114 * pixel.b;
  return static_cast<std::uint8_t>(std::min(255, (weighted + 500) / 1000));
}

GrayImage to_luma(const Image& image) {
  GrayImage gray(image.width(), image.height());
  std::ranges::transform(image.pixels(), gray.pixels().begin(), luma);
  return gray;
}

Image to_rgb(const GrayImage& gray) {
  Image image(gray.width(), gray.height());
  std::ranges::transform(gray.pixels(), image.pixels().begin(),
                         [](std::uint8_t v) { return Rgb{v, v, v}; });
  return image;
}

std::size_t foreground_count(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(std::ranges::count(mask.pixels(), std::uint8_t{1}));
}

BinaryMask invert(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  std::ranges::transform(mask.pixels(), out.pixels().begin(),
                         [](std::uint8_t v) -> std::uint8_t { return v ? 0 : 1; });
  return out;
}

BinaryMask threshold_at_least(const GrayImage& gray, int threshold) {
  BinaryMask out(gray.width(), gray.height());
  std::ranges::transform(gray.pixels(), out.pixels().begin(),
                         [threshold](std::uint8_t v) -> std::uint8_t { return v >= threshold ? 1 : 0; });
  return out;
}

}  // namespace specseg
