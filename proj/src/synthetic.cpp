#include "specseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "specseg/error.hpp"
#include "specseg/image_io.hpp"
#include "specseg/select.hpp"
#include "specseg/specular.hpp"

namespace specseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

bool inside_object(const SceneSpec& s, int x, int y) {
  const double dx = x - s.center_x;
  const double dy = y - s.center_y;
  switch (s.shape) {
    case ShapeKind::rectangle:
      return std::abs(dx) <= s.half_width && std::abs(dy) <= s.half_height;
    case ShapeKind::ellipse: {
      const double u = dx / s.half_width;
      const double v = dy / s.half_height;
      return u * u + v * v <= 1.0;
    }
    case ShapeKind::rounded_rect: {
      const double ax = std::abs(dx);
      const double ay = std::abs(dy);
      if (ax > s.half_width || ay > s.half_height) return false;
      const double cx = s.half_width - s.corner_radius;
      const double cy = s.half_height - s.corner_radius;
      if (ax <= cx || ay <= cy) return true;
      const double ex = ax - cx;
      const double ey = ay - cy;
      return ex * ex + ey * ey <= static_cast<double>(s.corner_radius) * s.corner_radius;
    }
  }
  return false;
}

PixelPoint highlight_center(const SceneSpec& s) {
  return {static_cast<int>(std::lround(s.center_x + s.highlight.offset_x * s.half_width)),
          static_cast<int>(std::lround(s.center_y + s.highlight.offset_y * s.half_height))};
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// splitmix64 step; decorrelates the per-purpose generator seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<PixelPoint> foreground_points(const BinaryMask& mask) {
  std::vector<PixelPoint> points;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) points.push_back({x, y});
    }
  }
  return points;
}

bool has_4_neighbor(const BinaryMask& mask, int x, int y, std::uint8_t value) {
  constexpr int dx[] = {1, -1, 0, 0};
  constexpr int dy[] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int nx = x + dx[k];
    const int ny = y + dy[k];
    if (mask.contains(nx, ny) && mask.at(nx, ny) == value) return true;
  }
  return false;
}

// Boundary jitter of at most one pixel, then up to two interior holes and up
// to five background speckles.
BinaryMask perturb_object(const BinaryMask& object, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed ^ 0x6e6f697379ULL));
  std::bernoulli_distribution flip(0.25);
  BinaryMask out = object;
  for (int y = 0; y < object.height(); ++y) {
    for (int x = 0; x < object.width(); ++x) {
      const auto v = object.at(x, y);
      if (has_4_neighbor(object, x, y, v ? 0 : 1) && flip(rng)) {
        out.at(x, y) = v ? 0 : 1;
      }
    }
  }

  const auto interior = foreground_points(erode(object, 4));
  if (!interior.empty()) {
    std::uniform_int_distribution<int> holes(1, 2);
    std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
    std::uniform_int_distribution<int> side(1, 3);
    for (int h = holes(rng); h > 0; --h) {
      const auto p = interior[pick(rng)];
      const int s = side(rng);
      for (int y = p.y; y < p.y + s; ++y) {
        for (int x = p.x; x < p.x + s; ++x) {
          if (out.contains(x, y)) out.at(x, y) = 0;
        }
      }
    }
  }

  const auto far_background = foreground_points(invert(dilate(object, 4)));
  if (!far_background.empty()) {
    std::uniform_int_distribution<int> speckles(1, 5);
    std::uniform_int_distribution<std::size_t> pick(0, far_background.size() - 1);
    std::uniform_int_distribution<int> side(1, 2);
    for (int k = speckles(rng); k > 0; --k) {
      const auto p = far_background[pick(rng)];
      const int sx = side(rng);
      const int sy = side(rng);
      for (int y = p.y; y < p.y + sy; ++y) {
        for (int x = p.x; x < p.x + sx; ++x) {
          if (out.contains(x, y)) out.at(x, y) = 1;
        }
      }
    }
  }
  return out;
}

BinaryMask with_background_strip(const BinaryMask& object) {
  BinaryMask out = object;
  const auto area = static_cast<double>(out.size());
  auto count = static_cast<double>(foreground_count(out));
  // Fill whole columns from the left edge until the ratio exceeds 0.6.
  for (int x = 0; x < out.width() && count / area <= 0.6; ++x) {
    for (int y = 0; y < out.height(); ++y) {
      if (!out.at(x, y)) {
        out.at(x, y) = 1;
        count += 1.0;
      }
    }
  }
  return out;
}

template <typename T>
std::pair<T, T> range_from_json(const json& v) {
  if (v.is_array()) {
    if (v.size() != 2) throw Error(ErrorCode::InvalidSpec, "range must have two entries");
    return {v[0].get<T>(), v[1].get<T>()};
  }
  const T x = v.get<T>();
  return {x, x};
}

template <typename T>
json range_to_json(const std::pair<T, T>& r) {
  return json::array({r.first, r.second});
}

template <typename T>
void check_range(const std::pair<T, T>& r, T lo, T hi, const std::string& name) {
  require(r.first <= r.second && r.first >= lo && r.second <= hi, name + " range out of bounds");
}

}  // namespace

void SceneSpec::validate() const {
  require(width >= 8 && height >= 8, "image must be at least 8x8");
  require(half_width >= 1 && half_height >= 1, "object half sizes must be positive");
  require(center_x - half_width >= 2 && center_x + half_width <= width - 3 && center_y - half_height >= 2 &&
              center_y + half_height <= height - 3,
          "object must keep a 2-pixel margin inside the image");
  require(shape != ShapeKind::rounded_rect ||
              (corner_radius >= 0 && corner_radius <= std::min(half_width, half_height)),
          "corner radius must lie in [0, min half size]");
  require(object_intensity >= 0 && object_intensity <= 255, "object intensity must be 8-bit");
  require(background_intensity >= 0 && background_intensity <= 255, "background intensity must be 8-bit");
  require(highlight.peak >= 240 && highlight.peak <= 255, "highlight peak must lie in [240, 255]");
  require(highlight.radius >= 1, "highlight radius must be positive");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise sigma must be non-negative");
  const auto c = highlight_center(*this);
  const int r = highlight.radius;
  for (int y = c.y - r; y <= c.y + r; ++y) {
    for (int x = c.x - r; x <= c.x + r; ++x) {
      const int dx = x - c.x;
      const int dy = y - c.y;
      if (dx * dx + dy * dy <= r * r) {
        require(inside_object(*this, x, y), "highlight disk must lie entirely inside the object");
      }
    }
  }
}

BinaryMask rasterize_object(const SceneSpec& spec) {
  BinaryMask mask(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      mask.at(x, y) = inside_object(spec, x, y) ? 1 : 0;
    }
  }
  return mask;
}

BinaryMask rasterize_highlight(const SceneSpec& spec) {
  BinaryMask mask(spec.width, spec.height);
  const auto c = highlight_center(spec);
  const int r2 = spec.highlight.radius * spec.highlight.radius;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const int dx = x - c.x;
      const int dy = y - c.y;
      mask.at(x, y) = dx * dx + dy * dy <= r2 ? 1 : 0;
    }
  }
  return mask;
}

SceneSample generate_scene(const SceneSpec& spec) {
  spec.validate();
  SceneSample sample{spec, Image(spec.width, spec.height), rasterize_object(spec), rasterize_highlight(spec)};

  std::mt19937_64 rng(mix(spec.seed));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double ramp_den = spec.width > 1 ? spec.width - 1 : 1;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = spec.background_intensity + std::round(spec.background_gradient * (x / ramp_den - 0.5));
      if (sample.gt_specular.at(x, y)) {
        v = spec.highlight.peak;
      } else if (sample.gt_object.at(x, y)) {
        v = spec.object_intensity;
      }
      if (spec.noise_sigma > 0.0) {
        v += spec.noise_sigma * noise(rng);
      }
      const auto g = clamp_u8(v);
      sample.image.at(x, y) = Rgb{g, g, g};
    }
  }
  return sample;
}

CandidateSet generate_candidates(const SceneSample& sample, CandidateMode mode) {
  CandidateSet set;
  set.candidates.push_back(sample.gt_specular);
  set.candidates.push_back(mode == CandidateMode::faithful ? sample.gt_object
                                                           : perturb_object(sample.gt_object, sample.spec.seed));
  set.candidates.push_back(with_background_strip(sample.gt_object));
  return set;
}

void DatasetSpec::validate() const {
  require(width >= 16 && height >= 16, "dataset images must be at least 16x16");
  require(!shapes.empty(), "at least one shape is required");
  check_range(half_size, 0.01, 0.95, "half_size");
  check_range(object_intensity, 0, 239, "object_intensity");
  check_range(background_intensity, 0, 239, "background_intensity");
  check_range(background_gradient, -255, 255, "background_gradient");
  check_range(highlight_offset, -0.95, 0.95, "highlight_offset");
  check_range(highlight_radius, 1, 64, "highlight_radius");
  check_range(peak_intensity, 240, 255, "peak_intensity");
  check_range(noise_sigma, 0.0, 64.0, "noise_sigma");
  require(min_contrast >= 0 && min_contrast <= 255, "min_contrast must be 8-bit");
}

SceneSpec draw_scene_spec(const DatasetSpec& dataset, std::size_t index) {
  dataset.validate();
  std::mt19937_64 rng(mix(dataset.seed * 0x100000001b3ULL + index));
  auto uniform_int = [&](std::pair<int, int> r) { return std::uniform_int_distribution<int>(r.first, r.second)(rng); };
  auto uniform_real = [&](std::pair<double, double> r) {
    return r.first == r.second ? r.first : std::uniform_real_distribution<double>(r.first, r.second)(rng);
  };

  constexpr int kAttempts = 1000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    SceneSpec s;
    s.width = dataset.width;
    s.height = dataset.height;
    s.shape = dataset.shapes[std::uniform_int_distribution<std::size_t>(0, dataset.shapes.size() - 1)(rng)];
    s.half_width = std::max(1, static_cast<int>(std::lround(uniform_real(dataset.half_size) * (s.width / 2))));
    s.half_height = std::max(1, static_cast<int>(std::lround(uniform_real(dataset.half_size) * (s.height / 2))));
    const int lo_x = 2 + s.half_width;
    const int hi_x = s.width - 3 - s.half_width;
    const int lo_y = 2 + s.half_height;
    const int hi_y = s.height - 3 - s.half_height;
    if (lo_x > hi_x || lo_y > hi_y) continue;
    s.center_x = uniform_int({lo_x, hi_x});
    s.center_y = uniform_int({lo_y, hi_y});
    s.corner_radius = std::min(s.half_width, s.half_height) / 3;
    s.object_intensity = uniform_int(dataset.object_intensity);
    s.background_intensity = uniform_int(dataset.background_intensity);
    s.background_gradient = uniform_int(dataset.background_gradient);
    s.highlight.offset_x = uniform_real(dataset.highlight_offset);
    s.highlight.offset_y = uniform_real(dataset.highlight_offset);
    s.highlight.radius = uniform_int(dataset.highlight_radius);
    s.highlight.peak = uniform_int(dataset.peak_intensity);
    s.noise_sigma = uniform_real(dataset.noise_sigma);
    s.seed = mix(dataset.seed + 0x5eed + index);
    if (std::abs(s.object_intensity - s.background_intensity) < dataset.min_contrast) continue;
    try {
      s.validate();
    } catch (const Error&) {
      continue;
    }
    return s;
  }
  throw Error(ErrorCode::InvalidSpec, "dataset ranges admit no valid scene (index " + std::to_string(index) + ")");
}

std::string to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::rounded_rect: return "rounded_rect";
  }
  return "?";
}

std::string to_string(CandidateMode mode) { return mode == CandidateMode::faithful ? "faithful" : "noisy"; }

ShapeKind parse_shape(const std::string& name) {
  if (name == "rectangle") return ShapeKind::rectangle;
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "rounded_rect") return ShapeKind::rounded_rect;
  throw Error(ErrorCode::InvalidSpec, "unknown shape '" + name + "'");
}

CandidateMode parse_candidate_mode(const std::string& name) {
  if (name == "faithful") return CandidateMode::faithful;
  if (name == "noisy") return CandidateMode::noisy;
  throw Error(ErrorCode::InvalidConfig, "unknown candidate mode '" + name + "'");
}

json to_json(const SceneSpec& s) {
  return {{"width", s.width},
          {"height", s.height},
          {"shape", to_string(s.shape)},
          {"center", {s.center_x, s.center_y}},
          {"half_size", {s.half_width, s.half_height}},
          {"corner_radius", s.corner_radius},
          {"object_intensity", s.object_intensity},
          {"background_intensity", s.background_intensity},
          {"background_gradient", s.background_gradient},
          {"highlight",
           {{"offset", {s.highlight.offset_x, s.highlight.offset_y}},
            {"radius", s.highlight.radius},
            {"peak", s.highlight.peak}}},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed}};
}

SceneSpec scene_spec_from_json(const json& doc) {
  try {
    SceneSpec s;
    s.width = doc.value("width", s.width);
    s.height = doc.value("height", s.height);
    if (doc.contains("shape")) s.shape = parse_shape(doc.at("shape").get<std::string>());
    if (doc.contains("center")) {
      s.center_x = doc.at("center").at(0).get<int>();
      s.center_y = doc.at("center").at(1).get<int>();
    }
    if (doc.contains("half_size")) {
      s.half_width = doc.at("half_size").at(0).get<int>();
      s.half_height = doc.at("half_size").at(1).get<int>();
    }
    s.corner_radius = doc.value("corner_radius", s.corner_radius);
    s.object_intensity = doc.value("object_intensity", s.object_intensity);
    s.background_intensity = doc.value("background_intensity", s.background_intensity);
    s.background_gradient = doc.value("background_gradient", s.background_gradient);
    if (doc.contains("highlight")) {
      const auto& h = doc.at("highlight");
      if (h.contains("offset")) {
        s.highlight.offset_x = h.at("offset").at(0).get<double>();
        s.highlight.offset_y = h.at("offset").at(1).get<double>();
      }
      s.highlight.radius = h.value("radius", s.highlight.radius);
      s.highlight.peak = h.value("peak", s.highlight.peak);
    }
    s.noise_sigma = doc.value("noise_sigma", s.noise_sigma);
    s.seed = doc.value("seed", s.seed);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed scene spec: ") + e.what());
  }
}

json to_json(const DatasetSpec& d) {
  json shapes = json::array();
  for (const auto s : d.shapes) shapes.push_back(to_string(s));
  return {{"width", d.width},
          {"height", d.height},
          {"shapes", shapes},
          {"half_size", range_to_json(d.half_size)},
          {"object_intensity", range_to_json(d.object_intensity)},
          {"background_intensity", range_to_json(d.background_intensity)},
          {"min_contrast", d.min_contrast},
          {"background_gradient", range_to_json(d.background_gradient)},
          {"highlight_offset", range_to_json(d.highlight_offset)},
          {"highlight_radius", range_to_json(d.highlight_radius)},
          {"peak_intensity", range_to_json(d.peak_intensity)},
          {"noise_sigma", range_to_json(d.noise_sigma)},
          {"seed", d.seed}};
}

DatasetSpec dataset_spec_from_json(const json& doc) {
  try {
    DatasetSpec d;
    d.width = doc.value("width", d.width);
    d.height = doc.value("height", d.height);
    if (doc.contains("shapes")) {
      d.shapes.clear();
      for (const auto& s : doc.at("shapes")) d.shapes.push_back(parse_shape(s.get<std::string>()));
    }
    auto read = [&](const char* key, auto& field) {
      using T = typename std::decay_t<decltype(field)>::first_type;
      if (doc.contains(key)) field = range_from_json<T>(doc.at(key));
    };
    read("half_size", d.half_size);
    read("object_intensity", d.object_intensity);
    read("background_intensity", d.background_intensity);
    read("background_gradient", d.background_gradient);
    read("highlight_offset", d.highlight_offset);
    read("highlight_radius", d.highlight_radius);
    read("peak_intensity", d.peak_intensity);
    read("noise_sigma", d.noise_sigma);
    d.min_contrast = doc.value("min_contrast", d.min_contrast);
    d.seed = doc.value("seed", d.seed);
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed dataset spec: ") + e.what());
  }
}

SceneSpec load_scene_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  try {
    return scene_spec_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
}

void write_scene_dir(const SceneSample& sample, const CandidateSet& candidates, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "candidates", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_image(sample.image, dir / "image.png");
  write_mask(sample.gt_object, dir / "gt_object.png");
  write_mask(sample.gt_specular, dir / "gt_specular.png");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    write_mask(candidates[i], dir / "candidates" / ("mask_" + std::to_string(i) + ".png"));
  }
  std::ofstream out(dir / "spec.json");
  out << to_json(sample.spec).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "spec.json").string());
}

}  // namespace specseg
