#include "specseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "specseg/error.hpp"

namespace specseg {
namespace fs = std::filesystem;

namespace {

enum class FileKind { png, pnm, unknown };

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> data;
};

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FileKind sniff(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return FileKind::png;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    return FileKind::pnm;
  }
  return FileKind::unknown;
}

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

Raster decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": 16-bit PNG");
  }
  Raster raster;
  raster.width = static_cast<int>(image.width);
  raster.height = static_cast<int>(image.height);
  raster.channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  raster.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raster.data.data(), 0, nullptr)) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
  }
  return raster;
}

// Binary PNM: P5 (gray) or P6 (RGB), maxval <= 255.
Raster decode_pnm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '5' && kind != '6') {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": only binary P5/P6 PNM is supported");
  }
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorCode::DecodeError, path.string() + ": malformed PNM header");
    }
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 24)) {
        throw Error(ErrorCode::DecodeError, path.string() + ": PNM header value out of range");
      }
      ++pos;
    }
    return value;
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (width < 1 || height < 1 || maxval < 1) {
    throw Error(ErrorCode::DecodeError, path.string() + ": invalid PNM dimensions");
  }
  if (maxval > 255) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": 16-bit PNM");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::DecodeError, path.string() + ": malformed PNM header");
  }
  ++pos;
  Raster raster;
  raster.width = static_cast<int>(width);
  raster.height = static_cast<int>(height);
  raster.channels = kind == '5' ? 1 : 3;
  const std::size_t expected =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(raster.channels);
  if (bytes.size() - pos < expected) {
    throw Error(ErrorCode::DecodeError, path.string() + ": truncated PNM data");
  }
  raster.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + expected));
  if (maxval != 255) {
    for (auto& v : raster.data) {
      v = static_cast<std::uint8_t>(std::min<long>(255, (v * 255L + maxval / 2) / maxval));
    }
  }
  return raster;
}

Raster load_raster(const fs::path& path) {
  const auto bytes = slurp(path);
  switch (sniff(bytes)) {
    case FileKind::png: return decode_png(bytes, path);
    case FileKind::pnm: return decode_pnm(bytes, path);
    case FileKind::unknown: break;
  }
  throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a PNG or PNM file");
}

std::string lower_extension(const fs::path& path) {
  auto ext = path.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void store_raster(const Raster& raster, const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".png") {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width);
    image.height = static_cast<png_uint_32>(raster.height);
    image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const bool ok = png_image_write_to_file(&image, path.string().c_str(), 0, raster.data.data(), 0, nullptr);
    const std::string message = image.message;
    png_image_free(&image);
    if (!ok) {
      throw Error(ErrorCode::IoError, path.string() + ": " + message);
    }
    return;
  }
  const bool gray_pnm = ext == ".pgm";
  if (!gray_pnm && ext != ".ppm") {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unknown output extension '" + ext + "'");
  }
  if ((raster.channels == 1) != gray_pnm) {
    throw Error(ErrorCode::UnsupportedFormat,
                path.string() + ": " + (gray_pnm ? "PGM needs a single channel" : "PPM needs RGB data"));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  }
  out << (gray_pnm ? "P5\n" : "P6\n") << raster.width << ' ' << raster.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.data.data()), static_cast<std::streamsize>(raster.data.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed: " + path.string());
  }
}

}  // namespace

BinaryMask read_mask(const fs::path& path) {
  const auto raster = load_raster(path);
  if (raster.channels != 1) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": mask must be single-channel");
  }
  BinaryMask mask(raster.width, raster.height);
  std::ranges::transform(raster.data, mask.pixels().begin(),
                         [](std::uint8_t v) -> std::uint8_t { return v >= 128 ? 1 : 0; });
  return mask;
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
  Raster raster{mask.width(), mask.height(), 1, {}};
  raster.data.resize(mask.size());
  std::ranges::transform(mask.pixels(), raster.data.begin(),
                         [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  store_raster(raster, path);
}

static Image image_from_raster(const Raster& raster) {
  Image image(raster.width, raster.height);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (raster.channels == 1) {
      const auto v = raster.data[i];
      image[i] = Rgb{v, v, v};
    } else {
      image[i] = Rgb{raster.data[3 * i], raster.data[3 * i + 1], raster.data[3 * i + 2]};
    }
  }
  return image;
}

Image read_image(const fs::path& path) { return image_from_raster(load_raster(path)); }

void write_image(const Image& image, const fs::path& path) {
  Raster raster{image.width(), image.height(), 3, {}};
  raster.data.reserve(image.size() * 3);
  for (const auto& p : image.pixels()) {
    raster.data.insert(raster.data.end(), {p.r, p.g, p.b});
  }
  store_raster(raster, path);
}

GrayImage read_gray(const fs::path& path) {
  const auto raster = load_raster(path);
  if (raster.channels == 1) {
    return GrayImage(raster.width, raster.height, raster.data);
  }
  return to_luma(image_from_raster(raster));
}

void write_gray(const GrayImage& gray, const fs::path& path) {
  Raster raster{gray.width(), gray.height(), 1, {gray.pixels().begin(), gray.pixels().end()}};
  store_raster(raster, path);
}

}  // namespace specseg
