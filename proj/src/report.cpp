#include "specseg/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "specseg/error.hpp"

namespace specseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (const char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

struct MetricRow {
  const char* label;
  double MetricsReport::*mean;
};

constexpr MetricRow kRows[] = {
    {"IoU", &MetricsReport::mean_iou},
    {"DSC", &MetricsReport::mean_dsc},
    {"Pixel Acc.", &MetricsReport::mean_pixel_accuracy},
};

}  // namespace

void write_report_csv(const MetricsReport& report, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "name,pred,gt,iou,dsc,pixel_accuracy\n";
  for (const auto& s : report.images) {
    out << csv_field(s.name) << ',' << csv_field(s.pred.string()) << ',' << csv_field(s.gt.string()) << ','
        << s.iou << ',' << s.dsc << ',' << s.pixel_accuracy << '\n';
  }
  out << "mean,,," << report.mean_iou << ',' << report.mean_dsc << ',' << report.mean_pixel_accuracy << '\n';
  out.precision(old_precision);
}

json report_to_json(const MetricsReport& report) {
  json images = json::array();
  for (const auto& s : report.images) {
    images.push_back({{"name", s.name},
                      {"pred", s.pred.string()},
                      {"gt", s.gt.string()},
                      {"iou", s.iou},
                      {"dsc", s.dsc},
                      {"pixel_accuracy", s.pixel_accuracy}});
  }
  return {{"method", report.method},
          {"count", report.images.size()},
          {"mean", {{"iou", report.mean_iou}, {"dsc", report.mean_dsc}, {"pixel_accuracy", report.mean_pixel_accuracy}}},
          {"images", std::move(images)}};
}

MetricsReport report_from_json(const json& doc) {
  try {
    MetricsReport report;
    report.method = doc.value("method", std::string{});
    for (const auto& item : doc.at("images")) {
      PairScores s;
      s.name = item.at("name").get<std::string>();
      s.pred = item.value("pred", std::string{});
      s.gt = item.value("gt", std::string{});
      s.iou = item.at("iou").get<double>();
      s.dsc = item.at("dsc").get<double>();
      s.pixel_accuracy = item.at("pixel_accuracy").get<double>();
      report.images.push_back(std::move(s));
    }
    const auto& mean = doc.at("mean");
    report.mean_iou = mean.at("iou").get<double>();
    report.mean_dsc = mean.at("dsc").get<double>();
    report.mean_pixel_accuracy = mean.at("pixel_accuracy").get<double>();
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("malformed report: ") + e.what());
  }
}

MetricsReport load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
}

void save_report(const MetricsReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream csv(dir / "report.csv");
  std::ofstream js(dir / "report.json");
  if (!csv || !js) {
    throw Error(ErrorCode::IoError, "cannot write report into " + dir.string());
  }
  write_report_csv(report, csv);
  js << report_to_json(report).dump(2) << '\n';
  if (!csv || !js) {
    throw Error(ErrorCode::IoError, "write failed in " + dir.string());
  }
}

std::string format_comparison_table(const std::vector<MetricsReport>& reports, const std::string& reference) {
  std::size_t label_width = 6;
  for (const auto& r : reports) {
    label_width = std::max(label_width, std::string("Pixel Acc. ()").size() + r.method.size());
  }
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(static_cast<int>(label_width)) << "Metric" << " | Value [%]\n";
  out << std::string(label_width, '-') << "-+----------\n";
  for (std::size_t row = 0; row < std::size(kRows); ++row) {
    if (row > 0) out << std::string(label_width, '-') << "-+----------\n";
    for (const auto& r : reports) {
      const std::string label = std::string(kRows[row].label) + " (" + r.method + ")";
      out << std::setw(static_cast<int>(label_width)) << label << " | " << std::right << std::setw(9)
          << 100.0 * (r.*kRows[row].mean) << std::left << '\n';
    }
  }

  const MetricsReport* ref = nullptr;
  for (const auto& r : reports) {
    if (r.method == reference) ref = &r;
  }
  if (ref == nullptr) {
    if (!reference.empty()) {
      throw Error(ErrorCode::InvalidConfig, "reference method '" + reference + "' not among the reports");
    }
    return out.str();
  }
  out << "\nRelative improvement of " << ref->method << " [%]\n";
  for (const auto& r : reports) {
    if (&r == ref) continue;
    out << "  vs " << r.method << ':';
    for (const auto& row : kRows) {
      out << ' ' << row.label << ' ';
      const double base = 100.0 * (r.*row.mean);
      if (base > 0.0) {
        out << std::showpos << std::setprecision(1) << relative_improvement(100.0 * (ref->*row.mean), base)
            << std::noshowpos << std::setprecision(2);
      } else {
        out << "n/a";
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace specseg
