#include "specseg/pipeline.hpp"

#include <set>
#include <stdexcept>

#include "specseg/components.hpp"
#include "specseg/image_io.hpp"
#include "specseg/toml_lite.hpp"

namespace specseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& table, const std::string& name, std::initializer_list<const char*> known) {
  if (!table.is_object()) {
    throw Error(ErrorCode::InvalidConfig, "[" + name + "] must be a table");
  }
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : table.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in [" + name + "]");
    }
  }
}

template <typename T>
void read_key(const json& table, const char* key, T& field) {
  if (!table.contains(key)) return;
  try {
    field = table.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("wrong type for key '") + key + "'");
  }
}

DetectorMethod parse_method(const std::string& name) {
  if (name == "percentile") return DetectorMethod::percentile;
  if (name == "adaptive") return DetectorMethod::adaptive;
  throw Error(ErrorCode::InvalidConfig, "unknown detector method '" + name + "'");
}

FallbackPolicy parse_policy(const std::string& name) {
  if (name == "strict") return FallbackPolicy::strict;
  if (name == "smallest_ratio") return FallbackPolicy::smallest_ratio;
  throw Error(ErrorCode::InvalidConfig, "unknown fallback policy '" + name + "'");
}

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(name, e);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  detector.validate();
  selector.validate();
  provider.validate();
}

PipelineConfig pipeline_config_from_toml(const json& doc) {
  PipelineConfig config;
  reject_unknown(doc, "root", {"detector", "selector", "provider", "output"});
  if (doc.contains("detector")) {
    const auto& t = doc["detector"];
    reject_unknown(t, "detector", {"method", "percentile_fraction", "adaptive_k", "absolute_floor", "opening_radius",
                                   "min_region_area"});
    std::string method = "percentile";
    read_key(t, "method", method);
    config.detector.method = parse_method(method);
    read_key(t, "percentile_fraction", config.detector.percentile_fraction);
    read_key(t, "adaptive_k", config.detector.adaptive_k);
    read_key(t, "absolute_floor", config.detector.absolute_floor);
    read_key(t, "opening_radius", config.detector.opening_radius);
    read_key(t, "min_region_area", config.detector.min_region_area);
  }
  if (doc.contains("selector")) {
    const auto& t = doc["selector"];
    reject_unknown(t, "selector", {"r_max", "fallback_policy"});
    read_key(t, "r_max", config.selector.r_max);
    std::string policy = "strict";
    read_key(t, "fallback_policy", policy);
    config.selector.fallback_policy = parse_policy(policy);
  }
  if (doc.contains("provider")) {
    const auto& t = doc["provider"];
    reject_unknown(t, "provider", {"kind", "candidates_dir", "command", "timeout_s", "mode"});
    std::string kind = "files";
    read_key(t, "kind", kind);
    switch (parse_provider_kind(kind)) {
      case ProviderKind::files: {
        std::string dir;
        read_key(t, "candidates_dir", dir);
        config.provider = ProviderSpec::files(dir);
        break;
      }
      case ProviderKind::subprocess: {
        std::string command;
        double timeout_s = 120.0;
        read_key(t, "command", command);
        read_key(t, "timeout_s", timeout_s);
        if (!(timeout_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "timeout_s must be positive");
        config.provider = ProviderSpec{ProviderKind::subprocess,
                                       SubprocessSettings{command, std::chrono::milliseconds(
                                                                       static_cast<long long>(timeout_s * 1000.0))}};
        break;
      }
      case ProviderKind::synthetic: {
        std::string mode = "noisy";
        read_key(t, "mode", mode);
        config.provider = ProviderSpec::synthetic(parse_candidate_mode(mode));
        break;
      }
    }
  }
  if (doc.contains("output")) {
    const auto& t = doc["output"];
    reject_unknown(t, "output", {"dir", "emit_intermediates"});
    std::string dir = config.output_dir.string();
    read_key(t, "dir", dir);
    config.output_dir = dir;
    read_key(t, "emit_intermediates", config.emit_intermediates);
  }
  return config;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  try {
    return pipeline_config_from_toml(load_toml(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FileNotFound) throw;
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.detail());
  }
}

json to_json(const PipelineConfig& c) {
  json provider = {{"kind", to_string(c.provider.kind)}};
  if (const auto* f = std::get_if<FilesSettings>(&c.provider.settings)) {
    provider["candidates_dir"] = f->directory.string();
  } else if (const auto* s = std::get_if<SubprocessSettings>(&c.provider.settings)) {
    provider["command"] = s->command;
    provider["timeout_s"] = static_cast<double>(s->timeout.count()) / 1000.0;
  } else if (const auto* y = std::get_if<SyntheticSettings>(&c.provider.settings)) {
    provider["mode"] = to_string(y->mode);
  }
  return {{"detector",
           {{"method", c.detector.method == DetectorMethod::percentile ? "percentile" : "adaptive"},
            {"percentile_fraction", c.detector.percentile_fraction},
            {"adaptive_k", c.detector.adaptive_k},
            {"absolute_floor", c.detector.absolute_floor},
            {"opening_radius", c.detector.opening_radius},
            {"min_region_area", c.detector.min_region_area}}},
          {"selector",
           {{"r_max", c.selector.r_max},
            {"fallback_policy", c.selector.fallback_policy == FallbackPolicy::strict ? "strict" : "smallest_ratio"}}},
          {"provider", provider},
          {"output", {{"dir", c.output_dir.string()}, {"emit_intermediates", c.emit_intermediates}}}};
}

PipelineError::PipelineError(std::string stage, const Error& cause)
    : Error(cause.code(), stage + " stage: " + cause.detail()), stage_(std::move(stage)) {}

PipelineOutput run_pipeline(const Image& image, const PipelineConfig& config, Segmenter& segmenter,
                            const fs::path& source) {
  config.validate();
  PipelineOutput out;
  out.omega = stage("detect", [&] { return detect_specular(to_luma(image), config.detector); });
  out.prompt = stage("prompt", [&] { return prompt_point(out.omega); });
  out.candidates = stage("segment", [&] { return request_candidates(segmenter, image, out.prompt, source); });
  out.selection = stage("select", [&] { return select_mask(out.candidates, config.selector); });
  out.final_mask = stage("postprocess", [&] { return postprocess(out.candidates[out.selection.selected_index]); });
  return out;
}

PipelineOutput run_pipeline(const Image& image, const PipelineConfig& config, const fs::path& source) {
  auto segmenter = make_segmenter(config.provider);
  return run_pipeline(image, config, *segmenter, source);
}

void verify_output(const PipelineOutput& output) {
  if (!output.omega.contains(output.prompt) || !output.omega.at(output.prompt.x, output.prompt.y)) {
    throw std::logic_error("prompt point is not on the highlight region");
  }
  if (output.selection.selected_index >= output.candidates.size()) {
    throw std::logic_error("selected index out of range");
  }
  if (postprocess(output.candidates[output.selection.selected_index]) != output.final_mask) {
    throw std::logic_error("final mask differs from the cleaned selected candidate");
  }
}

void write_pipeline_output(const PipelineOutput& output, const fs::path& dir, bool emit_intermediates) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_mask(output.final_mask, dir / "final_mask.png");
  if (!emit_intermediates) return;
  write_mask(output.omega, dir / "omega.png");
  for (std::size_t i = 0; i < output.candidates.size(); ++i) {
    write_mask(output.candidates[i], dir / ("candidate_" + std::to_string(i) + ".png"));
  }
}

json summarize(const PipelineOutput& output) {
  json valid = json::array();
  for (const bool v : output.selection.valid) valid.push_back(v);
  json doc = {{"prompt", {{"x", output.prompt.x}, {"y", output.prompt.y}}},
              {"omega_pixels", foreground_count(output.omega)},
              {"candidate_count", output.candidates.size()},
              {"ratios", output.selection.ratios},
              {"valid", valid},
              {"selected_index", output.selection.selected_index},
              {"used_fallback", output.selection.used_fallback},
              {"final_pixels", foreground_count(output.final_mask)}};
  if (!output.candidates.provider_scores.empty()) doc["provider_scores"] = output.candidates.provider_scores;
  return doc;
}

}  // namespace specseg
