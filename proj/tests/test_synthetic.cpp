#include <doctest.h>

#include <set>

#include "specseg/components.hpp"
#include "specseg/error.hpp"
#include "specseg/metrics.hpp"
#include "specseg/select.hpp"
#include "specseg/specular.hpp"
#include "specseg/synthetic.hpp"

using namespace specseg;

namespace {

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scene generation is deterministic in the spec") {
  SceneSpec spec;
  spec.noise_sigma = 3.0;
  spec.seed = 99;
  const auto a = generate_scene(spec);
  const auto b = generate_scene(spec);
  CHECK(a.image == b.image);
  spec.seed = 100;
  CHECK_FALSE(generate_scene(spec).image == a.image);
}

TEST_CASE("noise-free scenes use exactly three intensities") {
  for (const auto shape : {ShapeKind::rectangle, ShapeKind::ellipse, ShapeKind::rounded_rect}) {
    SceneSpec spec;
    spec.shape = shape;
    const auto scene = generate_scene(spec);
    std::set<int> values;
    for (const auto& px : scene.image.pixels()) {
      CHECK(px.r == px.g);
      CHECK(px.g == px.b);
      values.insert(px.r);
    }
    CHECK(values == std::set<int>{40, 120, 255});
    CHECK(subset(scene.gt_specular, scene.gt_object));
    for (std::size_t i = 0; i < scene.image.size(); ++i) {
      CHECK((scene.image[i].r == 255) == (scene.gt_specular[i] == 1));
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  auto code_of = [](SceneSpec spec) {
    try {
      spec.validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  SceneSpec spec;
  spec.highlight.radius = 40;
  CHECK(code_of(spec) == ErrorCode::InvalidSpec);
  spec = {};
  spec.half_width = 63;
  CHECK(code_of(spec) == ErrorCode::InvalidSpec);
  spec = {};
  spec.highlight.peak = 200;
  CHECK(code_of(spec) == ErrorCode::InvalidSpec);
}

TEST_CASE("faithful candidates") {
  const auto scene = generate_scene(SceneSpec{});
  const auto set = generate_candidates(scene, CandidateMode::faithful);
  REQUIRE(set.size() == 3);
  CHECK(set[0] == scene.gt_specular);
  CHECK(set[1] == scene.gt_object);
  const double r0 = white_ratio(set[0]);
  const double r1 = white_ratio(set[1]);
  const double r2 = white_ratio(set[2]);
  CHECK(r0 < r1);
  CHECK(r1 < r2);
  CHECK(r2 > 0.6);
  CHECK(subset(scene.gt_object, set[2]));
  CHECK(select_mask(set, SelectorConfig{}).selected_index == 1);
}

TEST_CASE("noisy candidates clean up into one solid component") {
  const DatasetSpec dataset;
  for (std::size_t i = 0; i < 40; ++i) {
    const auto scene = generate_scene(draw_scene_spec(dataset, i));
    const auto set = generate_candidates(scene, CandidateMode::noisy);
    CHECK(set[0] == scene.gt_specular);
    CHECK_FALSE(set[1] == scene.gt_object);
    const auto cleaned = postprocess(set[1]);
    CHECK(connected_components(cleaned, Connectivity::eight).component_count() == 1);
    CHECK(connected_components(invert(cleaned), Connectivity::four).component_count() <= 1);
    CHECK(iou(cleaned, scene.gt_object) > 0.9);
    CHECK(white_ratio(set[2]) > 0.6);
  }
}

TEST_CASE("dataset draws") {
  const DatasetSpec dataset;
  const auto a = draw_scene_spec(dataset, 5);
  const auto b = draw_scene_spec(dataset, 5);
  CHECK(to_json(a) == to_json(b));
  CHECK_FALSE(to_json(a) == to_json(draw_scene_spec(dataset, 6)));
  for (std::size_t i = 0; i < 50; ++i) {
    const auto spec = draw_scene_spec(dataset, i);
    CHECK_NOTHROW(spec.validate());
    CHECK(std::abs(spec.object_intensity - spec.background_intensity) >= dataset.min_contrast);
  }
}

TEST_CASE("spec JSON round trip") {
  SceneSpec spec;
  spec.shape = ShapeKind::rounded_rect;
  spec.highlight.offset_x = 0.25;
  spec.noise_sigma = 1.5;
  spec.seed = 12345678901234ULL;
  const auto back = scene_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  CHECK(to_json(dataset_spec_from_json(to_json(DatasetSpec{}))) == to_json(DatasetSpec{}));
}

TEST_CASE("detector recovers the highlight with a floor below the peak") {
  // A radius-3 disk survives the 3x3 opening only through its center pixel,
  // so a floor of exactly peak - 10 needs the noise to stay well under 10 / 4.
  const DatasetSpec dataset;
  for (std::size_t i = 0; i < 30; ++i) {
    const auto spec = draw_scene_spec(dataset, i);
    const auto scene = generate_scene(spec);
    const auto gray = to_luma(scene.image);
    DetectorConfig config;
    config.absolute_floor = spec.highlight.peak - 20;
    CHECK(iou(detect_specular(gray, config), scene.gt_specular) >= 0.8);
  }
  DatasetSpec quiet;
  quiet.noise_sigma = {0.0, 2.5};
  for (std::size_t i = 0; i < 30; ++i) {
    const auto spec = draw_scene_spec(quiet, i);
    const auto scene = generate_scene(spec);
    DetectorConfig config;
    config.absolute_floor = spec.highlight.peak - 10;
    CHECK(iou(detect_specular(to_luma(scene.image), config), scene.gt_specular) >= 0.8);
  }
}
