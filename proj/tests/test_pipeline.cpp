#include <doctest.h>

#include <fstream>
#include <memory>
#include <stdexcept>

#include "specseg/components.hpp"
#include "specseg/image_io.hpp"
#include "specseg/metrics.hpp"
#include "specseg/pipeline.hpp"
#include "specseg/synthetic.hpp"
#include "specseg/toml_lite.hpp"
#include "support/temp_dir.hpp"

using namespace specseg;

namespace {

PipelineConfig synthetic_config(const std::shared_ptr<const SceneSample>& sample, CandidateMode mode) {
  PipelineConfig config;
  config.provider = ProviderSpec::synthetic(mode, sample);
  return config;
}

}  // namespace

TEST_CASE("faithful scene reproduces the ground truth exactly") {
  for (const auto shape : {ShapeKind::rectangle, ShapeKind::ellipse, ShapeKind::rounded_rect}) {
    SceneSpec spec;
    spec.shape = shape;
    auto sample = std::make_shared<const SceneSample>(generate_scene(spec));
    const auto out = run_pipeline(sample->image, synthetic_config(sample, CandidateMode::faithful));
    CHECK(out.selection.selected_index == 1);
    CHECK(out.final_mask == sample->gt_object);
    CHECK(out.omega.at(out.prompt.x, out.prompt.y) == 1);
    CHECK_NOTHROW(verify_output(out));
  }
}

TEST_CASE("noisy scenes come close to the ground truth") {
  const DatasetSpec dataset;
  for (std::size_t i = 0; i < 20; ++i) {
    auto sample = std::make_shared<const SceneSample>(generate_scene(draw_scene_spec(dataset, i)));
    const auto out = run_pipeline(sample->image, synthetic_config(sample, CandidateMode::noisy));
    CHECK(out.selection.selected_index != 2);
    CHECK(iou(out.final_mask, sample->gt_object) >= 0.95);
  }
}

TEST_CASE("stage failures name the stage") {
  auto sample = std::make_shared<const SceneSample>(generate_scene(SceneSpec{}));

  SUBCASE("black image fails detection") {
    try {
      run_pipeline(Image(32, 32), synthetic_config(sample, CandidateMode::faithful));
      FAIL("expected a PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "detect");
      CHECK(e.code() == ErrorCode::NoSpecularRegion);
    }
  }
  SUBCASE("no valid candidate fails selection") {
    auto config = synthetic_config(sample, CandidateMode::faithful);
    config.selector.r_max = 0.001;
    try {
      run_pipeline(sample->image, config);
      FAIL("expected a PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "select");
      CHECK(e.code() == ErrorCode::NoValidMask);
    }
  }
  SUBCASE("missing candidates fail the segment stage") {
    testing::TempDir dir;
    PipelineConfig config;
    config.provider = ProviderSpec::files(dir / "nothing");
    try {
      run_pipeline(sample->image, config);
      FAIL("expected a PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "segment");
      CHECK(e.code() == ErrorCode::NoCandidates);
    }
  }
}

TEST_CASE("verify_output catches inconsistent results") {
  auto sample = std::make_shared<const SceneSample>(generate_scene(SceneSpec{}));
  auto out = run_pipeline(sample->image, synthetic_config(sample, CandidateMode::noisy));
  CHECK_NOTHROW(verify_output(out));
  auto tampered = out;
  tampered.final_mask.at(0, 0) = 1;
  CHECK_THROWS_AS(verify_output(tampered), std::logic_error);
  tampered = out;
  tampered.prompt = {0, 0};
  CHECK_THROWS_AS(verify_output(tampered), std::logic_error);
}

TEST_CASE("outputs on disk") {
  auto sample = std::make_shared<const SceneSample>(generate_scene(SceneSpec{}));
  const auto out = run_pipeline(sample->image, synthetic_config(sample, CandidateMode::faithful));
  testing::TempDir dir;
  write_pipeline_output(out, dir / "plain", false);
  CHECK(read_mask(dir / "plain/final_mask.png") == out.final_mask);
  CHECK_FALSE(std::filesystem::exists(dir / "plain/omega.png"));
  write_pipeline_output(out, dir / "full", true);
  CHECK(read_mask(dir / "full/omega.png") == out.omega);
  CHECK(std::filesystem::exists(dir / "full/candidate_2.png"));
  CHECK(summarize(out)["selected_index"] == 1);
}

TEST_CASE("pipeline config from TOML") {
  SUBCASE("shipped defaults match the built-in defaults") {
    const auto config = load_pipeline_config(SPECSEG_CONFIG_DIR "/pipeline.toml");
    CHECK(to_json(config) == to_json(PipelineConfig{}));
  }
  SUBCASE("overrides") {
    const auto config = pipeline_config_from_toml(parse_toml(R"(
[detector]
method = "adaptive"
adaptive_k = 2.5
[selector]
r_max = 0.4
fallback_policy = "smallest_ratio"
[provider]
kind = "subprocess"
command = "seg --flag"
timeout_s = 1.5
)"));
    CHECK(config.detector.method == DetectorMethod::adaptive);
    CHECK(config.detector.adaptive_k == 2.5);
    CHECK(config.selector.r_max == 0.4);
    CHECK(config.selector.fallback_policy == FallbackPolicy::smallest_ratio);
    REQUIRE(config.provider.kind == ProviderKind::subprocess);
    const auto& sub = std::get<SubprocessSettings>(config.provider.settings);
    CHECK(sub.command == "seg --flag");
    CHECK(sub.timeout == std::chrono::milliseconds(1500));
  }
  SUBCASE("unknown keys and bad values are rejected") {
    auto code_of = [](const char* text) {
      try {
        pipeline_config_from_toml(parse_toml(text));
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::IoError;
    };
    CHECK(code_of("[detector]\nthreshold = 3\n") == ErrorCode::InvalidConfig);
    CHECK(code_of("[extra]\na = 1\n") == ErrorCode::InvalidConfig);
    CHECK(code_of("[selector]\nr_max = \"half\"\n") == ErrorCode::InvalidConfig);
    CHECK(code_of("[detector]\nmethod = \"magic\"\n") == ErrorCode::InvalidConfig);
  }
}
