#pragma once

#include <filesystem>

#include "specseg/image.hpp"

namespace specseg {

// Readers detect the format from the file signature (PNG or binary PNM);
// writers choose it from the extension (.png, .pgm, .ppm).

/// Reads an 8-bit single-channel raster; values >= 128 become foreground.
BinaryMask read_mask(const std::filesystem::path& path);

/// Writes foreground as 255 and background as 0, single channel.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads an 8-bit grayscale, gray+alpha, RGB or RGBA PNG, or a P5/P6 PNM.
/// Gray inputs are replicated into three channels; alpha is dropped.
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const GrayImage& gray, const std::filesystem::path& path);

}  // namespace specseg
