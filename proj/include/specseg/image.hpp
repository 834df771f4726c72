#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace specseg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Integer grid coordinate: x is the column, y the row, origin top-left.
struct PixelPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Row-major pixel raster. The tag keeps RGB images, intensity images and
/// binary masks from being mixed up even when they share a storage type.
template <typename T, typename Tag>
class PixelGrid {
 public:
  using value_type = T;

  PixelGrid() = default;

  PixelGrid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  PixelGrid(int width, int height, std::vector<T> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("pixel count does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool contains(PixelPoint p) const noexcept { return contains(p.x, p.y); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& at(int x, int y) { return pixels_[index(x, y)]; }
  const T& at(int x, int y) const { return pixels_[index(x, y)]; }
  T& operator[](std::size_t i) { return pixels_[i]; }
  const T& operator[](std::size_t i) const { return pixels_[i]; }

  std::span<T> pixels() noexcept { return pixels_; }
  std::span<const T> pixels() const noexcept { return pixels_; }

  template <typename U, typename OtherTag>
  bool same_shape(const PixelGrid<U, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> pixels_;
};

struct RgbTag;
struct GrayTag;
struct MaskTag;

using Image = PixelGrid<Rgb, RgbTag>;
using GrayImage = PixelGrid<std::uint8_t, GrayTag>;

/// Binary mask; every pixel holds 0 (background) or 1 (foreground).
using BinaryMask = PixelGrid<std::uint8_t, MaskTag>;

/// BT.601 luma, round-half-up, per pixel.
std::uint8_t luma(Rgb pixel) noexcept;
GrayImage to_luma(const Image& image);

/// Gray image replicated into three equal channels.
Image to_rgb(const GrayImage& gray);

std::size_t foreground_count(const BinaryMask& mask) noexcept;
BinaryMask invert(const BinaryMask& mask);

/// Foreground where the intensity is at or above the threshold. A threshold
/// above 255 yields an empty mask.
BinaryMask threshold_at_least(const GrayImage& gray, int threshold);

}  // namespace specseg
