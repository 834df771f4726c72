#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specseg/candidates.hpp"
#include "specseg/image.hpp"

namespace specseg {

enum class ShapeKind { rectangle, ellipse, rounded_rect };

struct HighlightSpec {
  /// Disk center offset from the object center, as a fraction of the object
  /// half-width / half-height.
  double offset_x = 0.0;
  double offset_y = 0.0;
  int radius = 4;
  int peak = 255;
};

/// One procedurally rendered scene: a flat object on a (optionally ramped)
/// background with a flat circular highlight and Gaussian sensor noise.
struct SceneSpec {
  int width = 128;
  int height = 128;
  ShapeKind shape = ShapeKind::ellipse;
  int center_x = 64;
  int center_y = 64;
  int half_width = 32;
  int half_height = 24;
  /// Corner rounding for rounded_rect, in pixels.
  int corner_radius = 8;
  int object_intensity = 120;
  int background_intensity = 40;
  /// Left-to-right change of the background intensity (linear ramp centered on
  /// background_intensity).
  int background_gradient = 0;
  HighlightSpec highlight;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec unless the object keeps a 2-pixel margin and the
  /// highlight disk lies inside the object.
  void validate() const;
};

struct SceneSample {
  SceneSpec spec;
  Image image;
  BinaryMask gt_object;
  BinaryMask gt_specular;
};

enum class CandidateMode { faithful, noisy };

BinaryMask rasterize_object(const SceneSpec& spec);
BinaryMask rasterize_highlight(const SceneSpec& spec);

/// Deterministic in the spec (seed included).
SceneSample generate_scene(const SceneSpec& spec);

/// Three segmenter-like candidates: the highlight alone, the object (exact or
/// perturbed), and the object plus a background strip pushing its white
/// ratio above 0.6. Noisy perturbations are seeded from the scene seed.
CandidateSet generate_candidates(const SceneSample& sample, CandidateMode mode);

/// Parameter ranges for drawing many scenes. Each numeric entry is a closed
/// [lo, hi] interval; JSON accepts either a number or a two-element array.
struct DatasetSpec {
  int width = 128;
  int height = 128;
  std::vector<ShapeKind> shapes{ShapeKind::rectangle, ShapeKind::ellipse, ShapeKind::rounded_rect};
  /// Object half sizes as fractions of half the image extent.
  std::pair<double, double> half_size{0.3, 0.6};
  std::pair<int, int> object_intensity{60, 180};
  std::pair<int, int> background_intensity{30, 170};
  /// Scenes are redrawn until |object - background| reaches this contrast.
  int min_contrast = 30;
  std::pair<int, int> background_gradient{-30, 30};
  std::pair<double, double> highlight_offset{-0.4, 0.4};
  std::pair<int, int> highlight_radius{3, 4};
  std::pair<int, int> peak_intensity{245, 255};
  std::pair<double, double> noise_sigma{0.0, 5.0};
  std::uint64_t seed = 1;

  void validate() const;
};

/// The index-th scene of a dataset; a pure function of (dataset, index).
SceneSpec draw_scene_spec(const DatasetSpec& dataset, std::size_t index);

std::string to_string(ShapeKind shape);
std::string to_string(CandidateMode mode);
ShapeKind parse_shape(const std::string& name);
CandidateMode parse_candidate_mode(const std::string& name);

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& doc);

SceneSpec load_scene_spec(const std::filesystem::path& path);

/// Writes image.png, gt_object.png, gt_specular.png, candidates/mask_{0,1,2}.png
/// and spec.json into `dir`.
void write_scene_dir(const SceneSample& sample, const CandidateSet& candidates, const std::filesystem::path& dir);

}  // namespace specseg
