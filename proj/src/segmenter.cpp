#include "specseg/segmenter.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "specseg/error.hpp"
#include "specseg/image_io.hpp"
#include "subprocess.hpp"

namespace specseg {
namespace fs = std::filesystem;

void CandidateSet::validate(int width, int height) const {
  if (candidates.empty()) {
    throw Error(ErrorCode::NoCandidates, "segmenter returned no masks");
  }
  if (candidates.size() > kMaxCandidates) {
    throw Error(ErrorCode::ProviderFailure,
                "segmenter returned " + std::to_string(candidates.size()) + " masks, at most 3 allowed");
  }
  if (!provider_scores.empty() && provider_scores.size() != candidates.size()) {
    throw Error(ErrorCode::ProviderFailure, "score count does not match mask count");
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& m = candidates[i];
    if (m.width() != width || m.height() != height) {
      throw Error(ErrorCode::DimensionMismatch, "candidate " + std::to_string(i) + " is " + std::to_string(m.width()) +
                                                    "x" + std::to_string(m.height()) + ", image is " +
                                                    std::to_string(width) + "x" + std::to_string(height));
    }
  }
}

ProviderSpec ProviderSpec::files(fs::path directory) {
  return {ProviderKind::files, FilesSettings{std::move(directory)}};
}

ProviderSpec ProviderSpec::subprocess(std::string command, std::chrono::milliseconds timeout) {
  ProviderSpec spec{ProviderKind::subprocess, SubprocessSettings{std::move(command), timeout}};
  spec.validate();
  return spec;
}

ProviderSpec ProviderSpec::synthetic(CandidateMode mode, std::shared_ptr<const SceneSample> sample) {
  return {ProviderKind::synthetic, SyntheticSettings{mode, std::move(sample)}};
}

void ProviderSpec::validate() const {
  const bool matches = (kind == ProviderKind::files && std::holds_alternative<FilesSettings>(settings)) ||
                       (kind == ProviderKind::subprocess && std::holds_alternative<SubprocessSettings>(settings)) ||
                       (kind == ProviderKind::synthetic && std::holds_alternative<SyntheticSettings>(settings));
  if (!matches) {
    throw Error(ErrorCode::InvalidConfig, "provider settings do not match provider kind " + to_string(kind));
  }
  if (const auto* sub = std::get_if<SubprocessSettings>(&settings)) {
    if (sub->command.empty()) throw Error(ErrorCode::InvalidConfig, "subprocess provider needs a command");
    if (sub->timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "subprocess timeout must be positive");
  }
}

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::files: return "files";
    case ProviderKind::subprocess: return "subprocess";
    case ProviderKind::synthetic: return "synthetic";
  }
  return "?";
}

ProviderKind parse_provider_kind(const std::string& name) {
  if (name == "files") return ProviderKind::files;
  if (name == "subprocess") return ProviderKind::subprocess;
  if (name == "synthetic") return ProviderKind::synthetic;
  throw Error(ErrorCode::InvalidConfig, "unknown provider '" + name + "'");
}

namespace {

class FilesSegmenter final : public Segmenter {
 public:
  explicit FilesSegmenter(FilesSettings settings) : settings_(std::move(settings)) {}

  CandidateSet segment(const Image&, PixelPoint, const fs::path& source) override {
    fs::path dir = settings_.directory;
    if (dir.empty()) {
      if (source.empty()) {
        throw Error(ErrorCode::NoCandidates, "files provider has no directory and the image has no source path");
      }
      dir = source.parent_path() / "candidates";
    }
    CandidateSet set;
    for (std::size_t i = 0; i < CandidateSet::kMaxCandidates; ++i) {
      const std::string stem = "mask_" + std::to_string(i);
      for (const char* ext : {".png", ".pgm"}) {
        const auto path = dir / (stem + ext);
        std::error_code ec;
        if (fs::is_regular_file(path, ec)) {
          set.candidates.push_back(read_mask(path));
          break;
        }
      }
    }
    if (set.candidates.empty()) {
      throw Error(ErrorCode::NoCandidates, "no mask_{0,1,2}.{png,pgm} in " + dir.string());
    }
    return set;
  }

 private:
  FilesSettings settings_;
};

class SyntheticSegmenter final : public Segmenter {
 public:
  explicit SyntheticSegmenter(SyntheticSettings settings) : settings_(std::move(settings)) {}

  CandidateSet segment(const Image& image, PixelPoint, const fs::path& source) override {
    if (settings_.sample) {
      if (!settings_.sample->image.same_shape(image)) {
        throw Error(ErrorCode::DimensionMismatch, "synthetic scene does not match the image size");
      }
      return generate_candidates(*settings_.sample, settings_.mode);
    }
    if (source.empty()) {
      throw Error(ErrorCode::ProviderFailure, "synthetic provider needs a scene or a source path with spec.json");
    }
    const auto sample = generate_scene(load_scene_spec(source.parent_path() / "spec.json"));
    return generate_candidates(sample, settings_.mode);
  }

 private:
  SyntheticSettings settings_;
};

class SubprocessSegmenter final : public Segmenter {
 public:
  explicit SubprocessSegmenter(SubprocessSettings settings) : settings_(std::move(settings)) {}

  ~SubprocessSegmenter() override {
    child_.reset();
    if (!scratch_.empty()) {
      std::error_code ec;
      fs::remove_all(scratch_, ec);
    }
  }

  CandidateSet segment(const Image& image, PixelPoint point, const fs::path& source) override {
    if (!child_) child_ = std::make_unique<detail::ChildProcess>(settings_.command);

    const std::int64_t id = next_id_++;
    nlohmann::ordered_json request;
    request["id"] = id;
    request["image"] = png_path_for(image, source).string();
    request["point"] = {{"x", point.x}, {"y", point.y}};
    request["max_masks"] = CandidateSet::kMaxCandidates;
    if (!child_->write_line(request.dump())) {
      fail_child("could not send request");
    }

    std::string line;
    switch (child_->read_line(line, settings_.timeout)) {
      case detail::ChildProcess::ReadStatus::line: break;
      case detail::ChildProcess::ReadStatus::eof: fail_child("closed its output without replying");
      case detail::ChildProcess::ReadStatus::timeout:
        child_->kill();
        child_.reset();
        throw Error(ErrorCode::ProviderFailure,
                    "no reply within " + std::to_string(settings_.timeout.count()) + " ms");
    }
    return parse_response(line, id);
  }

 private:
  [[noreturn]] void fail_child(const std::string& what) {
    const int status = child_->finish(std::chrono::milliseconds(500));
    child_.reset();
    throw Error(ErrorCode::ProviderFailure, "segmenter process " + what + " (exit status " + std::to_string(status) + ")");
  }

  [[noreturn]] void protocol_violation(const std::string& what) {
    // The stream position is unknown after a bad reply; start over next time.
    child_->kill();
    child_.reset();
    throw Error(ErrorCode::ProviderFailure, "protocol violation: " + what);
  }

  CandidateSet parse_response(const std::string& line, std::int64_t id) {
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      protocol_violation("reply is not JSON: " + line.substr(0, 200));
    }
    if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_integer()) {
      protocol_violation("reply lacks an integer id");
    }
    if (reply["id"].get<std::int64_t>() != id) {
      protocol_violation("reply id " + reply["id"].dump() + " does not match request id " + std::to_string(id));
    }
    if (reply.contains("error")) {
      throw Error(ErrorCode::ProviderFailure, "segmenter error: " + reply["error"].dump());
    }
    if (!reply.contains("masks") || !reply["masks"].is_array()) {
      protocol_violation("reply lacks a masks array");
    }
    const auto& masks = reply["masks"];
    if (masks.empty()) {
      throw Error(ErrorCode::NoCandidates, "segmenter returned no masks");
    }
    if (masks.size() > CandidateSet::kMaxCandidates) {
      protocol_violation("more than 3 masks");
    }
    CandidateSet set;
    if (reply.contains("scores")) {
      const auto& scores = reply["scores"];
      if (!scores.is_array() || scores.size() != masks.size()) {
        protocol_violation("scores and masks differ in length");
      }
      for (const auto& s : scores) {
        if (!s.is_number()) protocol_violation("non-numeric score");
        set.provider_scores.push_back(s.get<double>());
      }
    }
    for (const auto& m : masks) {
      if (!m.is_string()) protocol_violation("mask entry is not a path");
      set.candidates.push_back(read_mask(m.get<std::string>()));
    }
    return set;
  }

  fs::path png_path_for(const Image& image, const fs::path& source) {
    auto ext = source.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::error_code ec;
    if (!source.empty() && ext == ".png" && fs::is_regular_file(source, ec)) {
      return fs::absolute(source, ec);
    }
    if (scratch_.empty()) {
      static std::atomic<unsigned> counter{0};
      scratch_ = fs::temp_directory_path() /
                 ("specseg-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
      fs::create_directories(scratch_);
    }
    const auto path = scratch_ / ("request_" + std::to_string(next_id_) + ".png");
    write_image(image, path);
    return path;
  }

  SubprocessSettings settings_;
  std::unique_ptr<detail::ChildProcess> child_;
  std::int64_t next_id_ = 0;
  fs::path scratch_;
};

}  // namespace

std::unique_ptr<Segmenter> make_segmenter(const ProviderSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ProviderKind::files: return std::make_unique<FilesSegmenter>(std::get<FilesSettings>(spec.settings));
    case ProviderKind::subprocess:
      return std::make_unique<SubprocessSegmenter>(std::get<SubprocessSettings>(spec.settings));
    case ProviderKind::synthetic:
      return std::make_unique<SyntheticSegmenter>(std::get<SyntheticSettings>(spec.settings));
  }
  throw Error(ErrorCode::InvalidConfig, "unknown provider kind");
}

CandidateSet request_candidates(Segmenter& segmenter, const Image& image, PixelPoint point, const fs::path& source) {
  if (!image.contains(point)) {
    throw std::invalid_argument("prompt point (" + std::to_string(point.x) + ", " + std::to_string(point.y) +
                                ") lies outside the image");
  }
  auto set = segmenter.segment(image, point, source);
  set.validate(image.width(), image.height());
  return set;
}

CandidateSet request_candidates(const ProviderSpec& spec, const Image& image, PixelPoint point,
                                const fs::path& source) {
  auto segmenter = make_segmenter(spec);
  return request_candidates(*segmenter, image, point, source);
}

}  // namespace specseg
