// specseg command-line front end: single-image and batch pipeline runs,
// evaluation, Otsu baseline, synthetic datasets and comparison reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "specseg/error.hpp"
#include "specseg/image_io.hpp"
#include "specseg/metrics.hpp"
#include "specseg/pipeline.hpp"
#include "specseg/report.hpp"
#include "specseg/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

// Usage/config problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineFlags {
  std::string config_path;
  std::optional<double> r_max;
  std::optional<std::string> detector;
  std::optional<std::string> provider;
  std::optional<std::string> provider_cmd;
  std::optional<std::string> candidates_dir;
  std::optional<std::string> synthetic_mode;
  std::optional<std::string> fallback;
  std::optional<std::string> out;
  bool emit_intermediates = false;
};

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f) {
  cmd.add_option("--config", f.config_path, "TOML pipeline configuration")->check(CLI::ExistingFile);
  cmd.add_option("--r-max", f.r_max, "Upper bound on the candidate white-pixel ratio")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--detector", f.detector, "Highlight threshold method")
      ->check(CLI::IsMember({"percentile", "adaptive"}));
  cmd.add_option("--provider", f.provider, "Candidate mask provider")
      ->check(CLI::IsMember({"files", "subprocess", "synthetic"}));
  cmd.add_option("--provider-cmd", f.provider_cmd, "Segmenter command line (subprocess provider)");
  cmd.add_option("--candidates-dir", f.candidates_dir, "Directory of mask_{0,1,2} files (files provider)");
  cmd.add_option("--synthetic-mode", f.synthetic_mode, "Candidate mode of the synthetic provider")
      ->check(CLI::IsMember({"faithful", "noisy"}));
  cmd.add_option("--fallback", f.fallback, "Behavior when every candidate exceeds r_max")
      ->check(CLI::IsMember({"strict", "smallest_ratio"}));
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_flag("--emit-intermediates", f.emit_intermediates, "Also write omega and all candidates");
}

// Config file first, then flags on top.
PipelineConfig resolve_config(const PipelineFlags& f) {
  PipelineConfig config;
  if (!f.config_path.empty()) config = load_pipeline_config(f.config_path);
  if (f.r_max) config.selector.r_max = *f.r_max;
  if (f.detector) {
    config.detector.method = *f.detector == "adaptive" ? DetectorMethod::adaptive : DetectorMethod::percentile;
  }
  if (f.fallback) {
    config.selector.fallback_policy =
        *f.fallback == "strict" ? FallbackPolicy::strict : FallbackPolicy::smallest_ratio;
  }

  ProviderKind kind = f.provider ? parse_provider_kind(*f.provider) : config.provider.kind;
  if (kind != config.provider.kind) {
    switch (kind) {
      case ProviderKind::files: config.provider = ProviderSpec::files(); break;
      case ProviderKind::subprocess:
        config.provider = ProviderSpec{ProviderKind::subprocess, SubprocessSettings{}};
        break;
      case ProviderKind::synthetic: config.provider = ProviderSpec::synthetic(CandidateMode::noisy); break;
    }
  }
  if (f.provider_cmd) {
    auto* sub = std::get_if<SubprocessSettings>(&config.provider.settings);
    if (sub == nullptr) throw UsageError("--provider-cmd requires the subprocess provider");
    sub->command = *f.provider_cmd;
  }
  if (f.candidates_dir) {
    auto* files = std::get_if<FilesSettings>(&config.provider.settings);
    if (files == nullptr) throw UsageError("--candidates-dir requires the files provider");
    files->directory = *f.candidates_dir;
  }
  if (f.synthetic_mode) {
    auto* syn = std::get_if<SyntheticSettings>(&config.provider.settings);
    if (syn == nullptr) throw UsageError("--synthetic-mode requires the synthetic provider");
    syn->mode = parse_candidate_mode(*f.synthetic_mode);
  }
  if (f.out) config.output_dir = *f.out;
  if (f.emit_intermediates) config.emit_intermediates = true;
  config.validate();
  return config;
}

void write_json(const json& doc, const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

bool is_raster(const fs::path& p) {
  auto ext = p.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

struct NamedImage {
  std::string name;
  fs::path path;
};

// Scene directories (<dir>/<name>/image.{png,pgm,ppm}) and loose raster files
// directly inside `dir`, sorted by name.
std::vector<NamedImage> discover_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("input directory not found: " + dir.string());
  std::vector<NamedImage> images;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) {
      for (const char* name : {"image.png", "image.pgm", "image.ppm"}) {
        if (fs::is_regular_file(entry.path() / name)) {
          images.push_back({entry.path().filename().string(), entry.path() / name});
          break;
        }
      }
    } else if (entry.is_regular_file() && is_raster(entry.path())) {
      images.push_back({entry.path().stem().string(), entry.path()});
    }
  }
  std::ranges::sort(images, {}, &NamedImage::name);
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (images[i].name == images[i - 1].name) throw UsageError("duplicate image name '" + images[i].name + "'");
  }
  return images;
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

unsigned pool_size(std::size_t n, unsigned workers) {
  return std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
}

// Runs body(i, worker) for i in [0, n) on pool_size(n, workers) threads;
// worker is the thread's slot in [0, pool_size). The first exception thrown
// by any body stops the remaining work and is rethrown after the join.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&](unsigned worker) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i, worker);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  {
    const auto count = pool_size(n, workers);
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(work, t);
    work(0);
  }
  if (failure) std::rethrow_exception(failure);
}

struct RunRecord {
  std::string name;
  fs::path image;
  bool ok = false;
  std::string stage;
  std::string error_code;
  std::string message;
  json summary;
};

json to_json(const RunRecord& r) {
  json doc = {{"name", r.name}, {"image", r.image.string()}, {"status", r.ok ? "ok" : "error"}};
  if (r.ok) {
    doc["summary"] = r.summary;
  } else {
    doc["stage"] = r.stage;
    doc["error"] = r.error_code;
    doc["message"] = r.message;
  }
  return doc;
}

RunRecord run_one(const NamedImage& item, const PipelineConfig& config, Segmenter& segmenter, const fs::path& out_dir) {
  RunRecord record;
  record.name = item.name;
  record.image = item.path;
  try {
    const auto image = read_image(item.path);
    const auto output = run_pipeline(image, config, segmenter, item.path);
    verify_output(output);
    write_pipeline_output(output, out_dir, config.emit_intermediates);
    record.ok = true;
    record.summary = summarize(output);
  } catch (const PipelineError& e) {
    record.stage = e.stage();
    record.error_code = std::string(to_string(e.code()));
    record.message = e.detail();
  } catch (const Error& e) {
    record.stage = e.code() == ErrorCode::IoError ? "output" : "input";
    record.error_code = std::string(to_string(e.code()));
    record.message = e.detail();
  } catch (const std::exception& e) {
    record.stage = "internal";
    record.error_code = "InternalError";
    record.message = e.what();
  }
  return record;
}

int cmd_run(const PipelineFlags& flags, const std::string& image_path) {
  const auto config = resolve_config(flags);
  auto segmenter = make_segmenter(config.provider);
  const auto record = run_one({fs::path(image_path).stem().string(), image_path}, config, *segmenter, config.output_dir);
  json manifest = {{"config", to_json(config)}, {"images", json::array({to_json(record)})}};
  write_json(manifest, config.output_dir / "manifest.json");
  if (!record.ok) {
    std::cerr << "error: " << record.stage << " stage: " << record.error_code << ": " << record.message << '\n';
    return kExitPipeline;
  }
  std::cout << "wrote " << (config.output_dir / "final_mask.png").string() << " (candidate "
            << record.summary["selected_index"].get<std::size_t>() << " of " << record.summary["candidate_count"]
            << ")\n";
  return kExitOk;
}

int cmd_batch(const PipelineFlags& flags, const std::string& input, unsigned workers) {
  const auto config = resolve_config(flags);
  const auto images = discover_images(input);
  std::vector<RunRecord> records(images.size());

  // A files provider without an explicit directory looks next to each image;
  // with one, it looks in <dir>/<name>.
  const auto* files = std::get_if<FilesSettings>(&config.provider.settings);
  const fs::path shared_candidates = files ? files->directory : fs::path{};

  std::atomic<std::size_t> failed{0};
  std::mutex log_mutex;
  // Each worker owns its segmenter handle (one child process per worker for
  // the subprocess provider).
  std::vector<std::unique_ptr<Segmenter>> segmenters(pool_size(images.size(), workers));
  parallel_for(images.size(), workers, [&](std::size_t i, unsigned worker) {
    const auto& item = images[i];
    std::unique_ptr<Segmenter> per_image;
    Segmenter* active = nullptr;
    if (files != nullptr) {
      per_image = make_segmenter(
          ProviderSpec::files(shared_candidates.empty() ? fs::path{} : shared_candidates / item.name));
      active = per_image.get();
    } else {
      auto& owned = segmenters[worker];
      if (!owned) owned = make_segmenter(config.provider);
      active = owned.get();
    }
    records[i] = run_one(item, config, *active, config.output_dir / item.name);
    if (!records[i].ok) {
      ++failed;
      std::lock_guard lock(log_mutex);
      std::cerr << item.name << ": " << records[i].stage << " stage: " << records[i].error_code << ": "
                << records[i].message << '\n';
    }
  });

  json list = json::array();
  for (const auto& r : records) list.push_back(to_json(r));
  json manifest = {{"config", to_json(config)},
                   {"workers", workers},
                   {"count", records.size()},
                   {"succeeded", records.size() - failed},
                   {"failed", failed.load()},
                   {"images", list}};
  write_json(manifest, config.output_dir / "manifest.json");

  std::ofstream csv(config.output_dir / "batch.csv");
  csv << "name,status,stage,error,selected_index,prompt_x,prompt_y\n";
  for (const auto& r : records) {
    csv << r.name << ',' << (r.ok ? "ok" : "error") << ',' << r.stage << ',' << r.error_code << ',';
    if (r.ok) {
      csv << r.summary["selected_index"] << ',' << r.summary["prompt"]["x"] << ',' << r.summary["prompt"]["y"];
    } else {
      csv << ",,";
    }
    csv << '\n';
  }
  std::cout << "processed " << records.size() << " images, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitPipeline;
}

std::vector<MaskPair> pairs_from_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open pairs file " + path.string());
  std::vector<MaskPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() < 2) throw UsageError("pairs file line needs pred,gt[,name]: " + line);
    if (fields[0] == "pred" && fields[1] == "gt") continue;
    const std::string name = fields.size() > 2 ? fields[2] : fs::path(fields[0]).stem().string();
    pairs.push_back({name, fields[0], fields[1]});
  }
  return pairs;
}

std::vector<MaskPair> pairs_from_dirs(const fs::path& pred_dir, const fs::path& gt_dir, const std::string& pred_name,
                                      const std::string& gt_name) {
  if (!fs::is_directory(pred_dir)) throw UsageError("prediction directory not found: " + pred_dir.string());
  std::vector<MaskPair> pairs;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.is_directory()) {
      const auto name = entry.path().filename().string();
      pairs.push_back({name, entry.path() / pred_name, gt_dir / name / gt_name});
    } else if (entry.is_regular_file() && is_raster(entry.path())) {
      pairs.push_back({entry.path().stem().string(), entry.path(), gt_dir / entry.path().filename()});
    }
  }
  std::ranges::sort(pairs, {}, &MaskPair::name);
  return pairs;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& pairs_csv,
             const std::string& pred_name, const std::string& gt_name, const std::string& method,
             const std::string& out_dir, unsigned workers, bool missing_as_empty, bool print_table) {
  std::vector<MaskPair> pairs;
  if (!pairs_csv.empty()) {
    pairs = pairs_from_csv(pairs_csv);
  } else {
    if (pred_dir.empty() || gt_dir.empty()) throw UsageError("eval needs --pairs or both --pred and --gt");
    pairs = pairs_from_dirs(pred_dir, gt_dir, pred_name, gt_name);
  }
  if (pairs.empty()) throw UsageError("no prediction/ground-truth pairs found");

  fs::path scratch;
  if (missing_as_empty) {
    // Missing predictions are scored as empty masks of the ground-truth size.
    for (auto& p : pairs) {
      if (fs::exists(p.pred)) continue;
      if (scratch.empty()) {
        scratch = fs::path(out_dir) / "missing_predictions";
        fs::create_directories(scratch);
      }
      const auto gt = read_mask(p.gt);
      p.pred = scratch / (p.name + ".png");
      write_mask(BinaryMask(gt.width(), gt.height()), p.pred);
    }
  }

  auto report = evaluate_dataset(pairs, workers);
  report.method = method;
  save_report(report, out_dir);
  std::cout << std::fixed;
  std::cout.precision(4);
  std::cout << method << ": " << report.images.size() << " images, mean IoU " << report.mean_iou << ", DSC "
            << report.mean_dsc << ", pixel accuracy " << report.mean_pixel_accuracy << '\n';
  if (print_table) std::cout << format_comparison_table({report});
  return kExitOk;
}

int cmd_otsu(const std::string& input, const std::string& out_dir, bool invert_mask, unsigned workers) {
  std::vector<NamedImage> images;
  if (fs::is_regular_file(input)) {
    images.push_back({fs::path(input).stem().string(), input});
  } else {
    images = discover_images(input);
  }
  std::vector<json> records(images.size());
  std::atomic<std::size_t> failed{0};
  parallel_for(images.size(), workers, [&](std::size_t i, unsigned) {
    const auto& item = images[i];
    try {
      const auto result = otsu(read_gray(item.path));
      const auto mask = invert_mask ? invert(result.mask) : result.mask;
      const auto dir = fs::path(out_dir) / item.name;
      fs::create_directories(dir);
      write_mask(mask, dir / "final_mask.png");
      records[i] = {{"name", item.name}, {"status", "ok"}, {"threshold", result.threshold}};
    } catch (const Error& e) {
      ++failed;
      records[i] = {{"name", item.name}, {"status", "error"}, {"error", to_string(e.code())}, {"message", e.detail()}};
    }
  });
  write_json({{"method", "otsu"}, {"inverted", invert_mask}, {"images", records}}, fs::path(out_dir) / "manifest.json");
  std::cout << "otsu: " << images.size() << " images, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitPipeline;
}

int cmd_synth(const std::string& spec_path, std::size_t count, const std::string& out_dir,
              std::optional<std::uint64_t> seed, const std::string& mode_name, unsigned workers) {
  std::ifstream in(spec_path);
  if (!in) throw UsageError("cannot open " + spec_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, spec_path + ": " + e.what());
  }
  auto dataset = dataset_spec_from_json(doc);
  if (seed) dataset.seed = *seed;
  const auto mode = parse_candidate_mode(mode_name);

  std::vector<std::string> names(count);
  parallel_for(count, workers, [&](std::size_t i, unsigned) {
    std::ostringstream name;
    name << "scene_" << std::setw(4) << std::setfill('0') << i;
    names[i] = name.str();
    const auto sample = generate_scene(draw_scene_spec(dataset, i));
    write_scene_dir(sample, generate_candidates(sample, mode), fs::path(out_dir) / names[i]);
  });
  write_json({{"dataset", to_json(dataset)}, {"count", count}, {"candidate_mode", mode_name}, {"scenes", names}},
             fs::path(out_dir) / "dataset.json");
  std::cout << "wrote " << count << " scenes to " << out_dir << '\n';
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& reference, const std::string& out_path) {
  std::vector<MetricsReport> reports;
  for (const auto& spec : inputs) {
    const auto eq = spec.find('=');
    const fs::path path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    auto report = load_report(fs::is_directory(path) ? path / "report.json" : path);
    if (eq != std::string::npos) report.method = spec.substr(0, eq);
    if (report.method.empty()) report.method = path.stem().string();
    reports.push_back(std::move(report));
  }
  const auto table = format_comparison_table(reports, reference);
  std::cout << table;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << table;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Highlight-prompted mask selection and cleanup for reflective objects"};
  app.require_subcommand(1);

  PipelineFlags run_flags;
  std::string run_image;
  auto* run = app.add_subcommand("run", "Run the pipeline on one image");
  run->add_option("image,--image", run_image, "Input image")->required()->check(CLI::ExistingFile);
  add_pipeline_flags(*run, run_flags);

  PipelineFlags batch_flags;
  std::string batch_input;
  unsigned batch_workers = default_workers();
  auto* batch = app.add_subcommand("batch", "Run the pipeline on every image of a directory");
  batch->add_option("input,--input", batch_input, "Directory of images or scene directories")->required();
  batch->add_option("--workers", batch_workers, "Worker threads")->check(CLI::PositiveNumber);
  add_pipeline_flags(*batch, batch_flags);

  std::string eval_pred, eval_gt, eval_pairs, eval_out = "eval", eval_method = "pipeline";
  std::string eval_pred_name = "final_mask.png", eval_gt_name = "gt_object.png";
  unsigned eval_workers = default_workers();
  bool eval_missing_empty = false;
  bool eval_table = false;
  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--pred", eval_pred, "Prediction directory");
  eval->add_option("--gt", eval_gt, "Ground-truth directory");
  eval->add_option("--pairs", eval_pairs, "CSV of pred,gt[,name] lines")->check(CLI::ExistingFile);
  eval->add_option("--pred-name", eval_pred_name, "Mask file inside each prediction subdirectory");
  eval->add_option("--gt-name", eval_gt_name, "Mask file inside each ground-truth subdirectory");
  eval->add_option("--method", eval_method, "Method label stored in the report");
  eval->add_option("--out", eval_out, "Report directory");
  eval->add_option("--workers", eval_workers, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_flag("--missing-as-empty", eval_missing_empty, "Score missing predictions as empty masks");
  eval->add_flag("--table", eval_table, "Print a comparison table");

  std::string otsu_input, otsu_out = "otsu";
  bool invert_otsu = false;
  unsigned otsu_workers = default_workers();
  auto* otsu_cmd = app.add_subcommand("otsu", "Otsu threshold baseline masks");
  otsu_cmd->add_option("input,--input", otsu_input, "Image file or directory")->required();
  otsu_cmd->add_option("--out", otsu_out, "Output directory");
  otsu_cmd->add_flag("--invert-otsu", invert_otsu, "Take the darker class as foreground");
  otsu_cmd->add_option("--workers", otsu_workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string synth_spec, synth_out = "data", synth_mode = "noisy";
  std::size_t synth_count = 100;
  std::optional<std::uint64_t> synth_seed;
  unsigned synth_workers = default_workers();
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", synth_spec, "Dataset spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--count", synth_count, "Number of scenes");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", synth_seed, "Override the dataset seed");
  synth->add_option("--mode", synth_mode, "Candidate mode")->check(CLI::IsMember({"faithful", "noisy"}));
  synth->add_option("--workers", synth_workers, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> report_inputs;
  std::string report_reference, report_out;
  auto* report = app.add_subcommand("report", "Merge eval reports into a comparison table");
  report->add_option("--eval,inputs", report_inputs, "[NAME=]path/to/report.json (or its directory)")->required();
  report->add_option("--reference", report_reference, "Method whose relative improvements are listed");
  report->add_option("--out", report_out, "Also write the table to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, run_image);
    if (*batch) return cmd_batch(batch_flags, batch_input, batch_workers);
    if (*eval) {
      return cmd_eval(eval_pred, eval_gt, eval_pairs, eval_pred_name, eval_gt_name, eval_method, eval_out,
                      eval_workers, eval_missing_empty, eval_table);
    }
    if (*otsu_cmd) return cmd_otsu(otsu_input, otsu_out, invert_otsu, otsu_workers);
    if (*synth) return cmd_synth(synth_spec, synth_count, synth_out, synth_seed, synth_mode, synth_workers);
    if (*report) return cmd_report(report_inputs, report_reference, report_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    const bool config_problem = e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::InvalidSpec;
    std::cerr << "error: " << e.what() << '\n';
    return config_problem ? kExitUsage : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitUsage;
}
