#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "specseg/candidates.hpp"
#include "specseg/error.hpp"
#include "specseg/image.hpp"
#include "specseg/segmenter.hpp"
#include "specseg/select.hpp"
#include "specseg/specular.hpp"

namespace specseg {

struct PipelineConfig {
  DetectorConfig detector;
  SelectorConfig selector;
  ProviderSpec provider = ProviderSpec::files();
  std::filesystem::path output_dir = "out";
  bool emit_intermediates = false;

  void validate() const;
};

/// Builds a config from a parsed TOML tree with tables [detector], [selector],
/// [provider] and [output]. Missing keys keep their defaults; unknown keys are
/// rejected with InvalidConfig.
PipelineConfig pipeline_config_from_toml(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& config);

struct PipelineOutput {
  BinaryMask omega;
  PixelPoint prompt;
  CandidateSet candidates;
  SelectionResult selection;
  BinaryMask final_mask;
};

/// A stage failure; code() is the underlying error, stage() one of
/// detect, prompt, segment, select, postprocess.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Highlight detection, prompt point, candidate request, ratio selection and
/// cleanup. `source` is forwarded to the segmenter.
PipelineOutput run_pipeline(const Image& image, const PipelineConfig& config, Segmenter& segmenter,
                            const std::filesystem::path& source = {});
PipelineOutput run_pipeline(const Image& image, const PipelineConfig& config,
                            const std::filesystem::path& source = {});

/// Re-derives final_mask from the selected candidate and checks that the
/// prompt lies on omega. Throws std::logic_error on a violation.
void verify_output(const PipelineOutput& output);

/// Writes final_mask.png, plus omega.png and candidate_<i>.png when
/// emit_intermediates is set.
void write_pipeline_output(const PipelineOutput& output, const std::filesystem::path& dir, bool emit_intermediates);

nlohmann::json summarize(const PipelineOutput& output);

}  // namespace specseg
