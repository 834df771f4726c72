#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "specseg/metrics.hpp"

namespace specseg {

/// One row per image (name,pred,gt,iou,dsc,pixel_accuracy) and a final
/// "mean" row.
void write_report_csv(const MetricsReport& report, std::ostream& out);

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);

MetricsReport load_report(const std::filesystem::path& path);
/// Writes <dir>/report.csv and <dir>/report.json.
void save_report(const MetricsReport& report, const std::filesystem::path& dir);

/// Plain-text comparison: one row per (metric, method) holding the mean in
/// percent, grouped by metric. When `reference` names one of the methods, a
/// second block lists its relative improvement over every other method.
std::string format_comparison_table(const std::vector<MetricsReport>& reports, const std::string& reference = {});

}  // namespace specseg
