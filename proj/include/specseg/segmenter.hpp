#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include "specseg/candidates.hpp"
#include "specseg/image.hpp"
#include "specseg/synthetic.hpp"

namespace specseg {

enum class ProviderKind { files, subprocess, synthetic };

struct FilesSettings {
  /// Directory holding mask_0..mask_2 (.png or .pgm). When empty, the
  /// "candidates" directory next to the source image is used.
  std::filesystem::path directory;
};

struct SubprocessSettings {
  /// Run through /bin/sh -c.
  std::string command;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

struct SyntheticSettings {
  CandidateMode mode = CandidateMode::noisy;
  /// Scene to emulate. When null, the scene is regenerated from spec.json
  /// next to the source image.
  std::shared_ptr<const SceneSample> sample;
};

struct ProviderSpec {
  ProviderKind kind = ProviderKind::files;
  std::variant<FilesSettings, SubprocessSettings, SyntheticSettings> settings;

  static ProviderSpec files(std::filesystem::path directory = {});
  static ProviderSpec subprocess(std::string command,
                                 std::chrono::milliseconds timeout = std::chrono::seconds(120));
  static ProviderSpec synthetic(CandidateMode mode, std::shared_ptr<const SceneSample> sample = {});

  /// Throws InvalidConfig when kind and settings disagree or a setting is unusable.
  void validate() const;
};

std::string to_string(ProviderKind kind);
ProviderKind parse_provider_kind(const std::string& name);

/// A point-promptable multi-mask segmenter. One handle is used by one thread
/// at a time; create one handle per worker.
class Segmenter {
 public:
  virtual ~Segmenter() = default;

  /// `source` is the file the image was loaded from, or empty.
  virtual CandidateSet segment(const Image& image, PixelPoint point, const std::filesystem::path& source) = 0;
};

std::unique_ptr<Segmenter> make_segmenter(const ProviderSpec& spec);

/// Asks the segmenter for candidates and enforces the result contract: 1..3
/// masks, each with the image's dimensions.
CandidateSet request_candidates(Segmenter& segmenter, const Image& image, PixelPoint point,
                                const std::filesystem::path& source = {});

/// One-shot convenience over a fresh handle.
CandidateSet request_candidates(const ProviderSpec& spec, const Image& image, PixelPoint point,
                                const std::filesystem::path& source = {});

}  // namespace specseg
