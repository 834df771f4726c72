#include <doctest.h>

#include <cmath>
#include <random>

#include "specseg/components.hpp"
#include "specseg/error.hpp"
#include "specseg/specular.hpp"
#include "support/oracles.hpp"

using namespace specseg;
using testing::mask_from_rows;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

GrayImage block_image(int block) {
  GrayImage g(100, 100, 50);
  for (int y = 40; y < 40 + block; ++y) {
    for (int x = 30; x < 30 + block; ++x) g.at(x, y) = 255;
  }
  return g;
}

// Naive square-window morphology, out-of-image pixels ignored.
BinaryMask naive_morph(const BinaryMask& m, int r, bool erode_op) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool all = true, any = false;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (!m.contains(x + dx, y + dy)) continue;
          const bool v = m.at(x + dx, y + dy);
          all = all && v;
          any = any || v;
        }
      }
      out.at(x, y) = erode_op ? all : any;
    }
  }
  return out;
}

GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
  GrayImage g(w, h);
  std::uniform_int_distribution<int> v(0, 255);
  std::bernoulli_distribution bright(0.05);
  for (auto& p : g.pixels()) p = static_cast<std::uint8_t>(bright(rng) ? 230 + v(rng) % 26 : v(rng));
  return g;
}

}  // namespace

TEST_CASE("uniform black image has no highlight") {
  CHECK(code_of([] { detect_specular(GrayImage(32, 32, 0), DetectorConfig{}); }) == ErrorCode::NoSpecularRegion);
  DetectorConfig adaptive;
  adaptive.method = DetectorMethod::adaptive;
  CHECK(code_of([&] { detect_specular(GrayImage(32, 32, 0), adaptive); }) == ErrorCode::NoSpecularRegion);
}

TEST_CASE("5x5 saturated block survives thresholding and opening") {
  const auto gray = block_image(5);
  DetectorConfig config;
  // 25 / 10000 = 0.0025 <= 0.005 down to t = 51; at t = 50 every pixel counts.
  CHECK(method_threshold(gray, config) == 51);
  CHECK(detection_threshold(gray, config) == 200);
  const auto omega = detect_specular(gray, config);
  CHECK(omega == threshold_at_least(gray, 255));
  CHECK(foreground_count(omega) == 25);
}

TEST_CASE("a one-pixel speck is removed by the opening") {
  GrayImage gray(100, 100, 50);
  gray.at(10, 10) = 255;
  CHECK(code_of([&] { detect_specular(gray, DetectorConfig{}); }) == ErrorCode::NoSpecularRegion);
}

TEST_CASE("percentile threshold above the floor") {
  // 200 pixels at 250 (2% of the image) exceed a 0.5% budget: the method
  // threshold moves above 250 and nothing is detected.
  GrayImage gray(100, 100, 10);
  for (int x = 0; x < 100; ++x) {
    gray.at(x, 0) = 250;
    gray.at(x, 1) = 250;
  }
  CHECK(method_threshold(gray, DetectorConfig{}) == 251);
  CHECK(code_of([&] { detect_specular(gray, DetectorConfig{}); }) == ErrorCode::NoSpecularRegion);
}

TEST_CASE("adaptive threshold is mean plus k sigma") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gray = random_gray(rng, 17, 13);
    double mean = 0.0;
    for (const auto v : gray.pixels()) mean += v;
    mean /= static_cast<double>(gray.size());
    double var = 0.0;
    for (const auto v : gray.pixels()) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / static_cast<double>(gray.size()));
    DetectorConfig config;
    config.method = DetectorMethod::adaptive;
    config.adaptive_k = 1.5;
    const int expected = static_cast<int>(std::clamp(std::round(mean + 1.5 * sigma), 0.0, 255.0));
    CHECK(method_threshold(gray, config) == expected);
  }
}

TEST_CASE("adaptive threshold set shrinks as k grows") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto gray = random_gray(rng, 20, 20);
    DetectorConfig config;
    config.method = DetectorMethod::adaptive;
    config.absolute_floor = 0;
    std::size_t previous = gray.size() + 1;
    for (double k = 0.25; k <= 5.0; k += 0.25) {
      config.adaptive_k = k;
      const auto count = foreground_count(threshold_at_least(gray, detection_threshold(gray, config)));
      CHECK(count <= previous);
      previous = count;
    }
  }
}

TEST_CASE("separable morphology matches a naive window") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing::random_mask(rng, 1 + trial % 19, 1 + (trial * 7) % 23, 0.6);
    for (int r = 1; r <= 2; ++r) {
      CHECK(erode(m, r) == naive_morph(m, r, true));
      CHECK(dilate(m, r) == naive_morph(m, r, false));
    }
  }
}

TEST_CASE("detected region respects the floor and the opening is anti-extensive") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> floor_dist(150, 250);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gray = random_gray(rng, 24, 24);
    DetectorConfig config;
    config.absolute_floor = floor_dist(rng);
    config.method = trial % 2 ? DetectorMethod::adaptive : DetectorMethod::percentile;
    config.percentile_fraction = 0.05;
    config.adaptive_k = 1.0;
    const auto raw = threshold_at_least(gray, detection_threshold(gray, config));
    const auto opened = open(raw, config.opening_radius);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (opened[i]) CHECK(raw[i] == 1);
    }
    try {
      const auto omega = detect_specular(gray, config);
      for (std::size_t i = 0; i < omega.size(); ++i) {
        if (omega[i]) CHECK(gray[i] >= config.absolute_floor);
      }
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoSpecularRegion);
    }
  }
}

TEST_CASE("detector config validation") {
  DetectorConfig c;
  c.percentile_fraction = 0.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.adaptive_k = -1.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = {};
  c.absolute_floor = 256;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("center of mass") {
  BinaryMask single(10, 10);
  single.at(3, 7) = 1;
  CHECK(center_of_mass(single) == PixelPoint{3, 7});

  BinaryMask block(11, 11);
  for (int y = 4; y <= 6; ++y)
    for (int x = 4; x <= 6; ++x) block.at(x, y) = 1;
  CHECK(center_of_mass(block) == PixelPoint{5, 5});

  // Mean (0.5, 0.5) rounds half away from zero.
  const auto corner = mask_from_rows({"110", "110", "000"});
  CHECK(center_of_mass(corner) == PixelPoint{1, 1});

  CHECK(code_of([] { center_of_mass(BinaryMask(3, 3)); }) == ErrorCode::EmptyRegion);
}

TEST_CASE("center of mass is translation equivariant and inside the bounding box") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> shift(0, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto base = testing::random_mask(rng, 8, 8, 0.3);
    if (foreground_count(base) == 0) continue;
    const int dx = shift(rng);
    const int dy = shift(rng);
    BinaryMask moved(16, 16);
    BinaryMask padded(16, 16);
    int min_x = 99, min_y = 99, max_x = -1, max_y = -1;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        if (!base.at(x, y)) continue;
        padded.at(x, y) = 1;
        moved.at(x + dx, y + dy) = 1;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
    const auto c = center_of_mass(padded);
    CHECK(center_of_mass(moved) == PixelPoint{c.x + dx, c.y + dy});
    CHECK(c.x >= min_x);
    CHECK(c.x <= max_x);
    CHECK(c.y >= min_y);
    CHECK(c.y <= max_y);
  }
}

TEST_CASE("prompt point") {
  SUBCASE("convex blob gives its center of mass") {
    BinaryMask blob(20, 20);
    for (int y = 5; y <= 9; ++y)
      for (int x = 3; x <= 11; ++x) blob.at(x, y) = 1;
    CHECK(prompt_point(blob) == center_of_mass(blob));
    CHECK(prompt_point(blob) == PixelPoint{7, 7});
  }
  SUBCASE("ring snaps to the nearest ring pixel") {
    BinaryMask ring(21, 21);
    for (int y = 0; y < 21; ++y) {
      for (int x = 0; x < 21; ++x) {
        const double d = std::hypot(x - 10, y - 10);
        ring.at(x, y) = std::abs(d - 5.0) < 0.5;
      }
    }
    REQUIRE(testing::oracle_component_count(ring, Connectivity::eight) == 1);
    CHECK(center_of_mass(ring) == PixelPoint{10, 10});
    CHECK(ring.at(10, 10) == 0);
    // Distance 5 is the minimum; (10, 5) is the first such pixel in row-major order.
    CHECK(prompt_point(ring) == PixelPoint{10, 5});
  }
  SUBCASE("largest of two components wins") {
    const auto m = mask_from_rows({
        "0000000000",
        "0110000000",
        "0111000111",
        "0000000111",
        "0000000111",
    });
    // 5-pixel blob first in row-major order, 9-pixel block centered at (8, 3).
    CHECK(prompt_point(m) == PixelPoint{8, 3});
  }
  SUBCASE("empty region") {
    CHECK(code_of([] { prompt_point(BinaryMask(4, 4)); }) == ErrorCode::EmptyRegion);
  }
}

TEST_CASE("prompt point is always a foreground pixel") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> density(0.02, 0.7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = testing::random_mask(rng, 3 + trial % 20, 3 + (trial * 3) % 17, density(rng));
    if (foreground_count(m) == 0) continue;
    const auto p = prompt_point(m);
    REQUIRE(m.contains(p));
    CHECK(m.at(p.x, p.y) == 1);
  }
}
