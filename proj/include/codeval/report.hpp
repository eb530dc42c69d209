// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Table rendering. Markdown shows percentages rounded half-up to two
 * decimals; CSV carries full precision.
 */

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codeval/datamodel.hpp"
#include "codeval/metrics.hpp"

namespace codeval {

enum class ReportFormat { md, csv, both };
ReportFormat report_format_from_string(const std::string& s);

struct ReportMetadata {
    std::vector<std::string> run_ids;
    std::string model_id;
    std::string judge_model_id;
    std::string token_mode;
};

struct ReportBundle {
    std::map<StrategyKind, std::vector<CategoryReport>> category_reports;
    std::map<StrategyKind, AccuracyReport> accuracy_reports;
    std::vector<DensityReport> density_reports;
    std::map<std::string, double> delta_r_by_category;  // percentage points
    ReportMetadata metadata;
};

/// Round-half-up percent with two decimals, e.g. 0.950154 -> "95.02".
std::string format_percent(double fraction);
/// Plain number with two decimals, round-half-up.
std::string format_2dp(double value);

std::string render_category_markdown(const ReportBundle& bundle);
std::string render_category_csv(const ReportBundle& bundle);
std::string render_accuracy_markdown(const ReportBundle& bundle);
std::string render_accuracy_csv(const ReportBundle& bundle);
std::string render_density_markdown(const ReportBundle& bundle, bool verbose = false);
std::string render_density_csv(const ReportBundle& bundle);

/// Writes the bundle's tables under out_dir in the requested format(s).
/// Returns the list of files written.
std::vector<std::filesystem::path> write_reports(const ReportBundle& bundle,
                                                 const std::filesystem::path& out_dir,
                                                 ReportFormat format, bool verbose = false);

}  // namespace codeval
