// SPDX-License-Identifier: Apache-2.0
#include "codeval/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "codeval/errors.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

std::string strategy_label(StrategyKind k) {
    switch (k) {
        case StrategyKind::standard: return "Standard";
        case StrategyKind::cod: return "CoD";
        case StrategyKind::cod_transfer: return "CoD*";
    }
    return "?";
}

std::string full_precision(double v) {
    std::ostringstream oss;
    oss << std::setprecision(17) << v;
    return oss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StateError("cannot write report file: " + path.string());
    out << content;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "md") return ReportFormat::md;
    if (s == "csv") return ReportFormat::csv;
    if (s == "both") return ReportFormat::both;
    throw ConfigError("unknown report format: " + s);
}

std::string format_2dp(double value) {
    // Round half away from zero at the second decimal.
    double scaled = value * 100.0;
    double rounded = std::floor(std::abs(scaled) + 0.5) / 100.0;
    if (value < 0) rounded = -rounded;
    std::ostringstream oss;
    oss << std::fixed << std::setprecision(2) << rounded;
    return oss.str();
}

std::string format_percent(double fraction) { return format_2dp(fraction * 100.0) + "%"; }

std::string render_category_markdown(const ReportBundle& bundle) {
    std::ostringstream md;
    md << "# Judged category scores\n\n";
    md << "Runs: ";
    for (std::size_t i = 0; i < bundle.metadata.run_ids.size(); ++i) {
        md << (i ? ", " : "") << bundle.metadata.run_ids[i];
    }
    md << "\n\n";
    for (const auto& [strategy, reports] : bundle.category_reports) {
        md << "## " << strategy_label(strategy) << " Prompting\n\n";
        md << "| Category | s_gt | s_p | r | No-S r | Swap r | n_valid | n_invalid |\n";
        md << "|---|---|---|---|---|---|---|---|\n";
        for (const auto& rep : reports) {
            md << "| " << rep.category << " | " << format_2dp(rep.s_gt) << " | "
               << format_2dp(rep.s_p) << " | " << (rep.r ? format_percent(*rep.r) : "-");
            for (Orientation o : {Orientation::no_swap, Orientation::swap}) {
                auto it = rep.per_orientation.find(o);
                md << " | "
                   << (it != rep.per_orientation.end() && it->second.r
                           ? format_percent(*it->second.r)
                           : "-");
            }
            md << " | " << rep.n_valid << " | " << rep.n_invalid << " |\n";
        }
        md << "\n";
    }
    if (!bundle.delta_r_by_category.empty()) {
        md << "## CoD vs Standard\n\n| Category | delta_r (pp) |\n|---|---|\n";
        for (const auto& [category, dr] : bundle.delta_r_by_category) {
            md << "| " << category << " | " << format_2dp(dr * 100.0) << " |\n";
        }
        md << "\n";
    }
    return md.str();
}

std::string render_category_csv(const ReportBundle& bundle) {
    std::ostringstream csv;
    csv << "strategy,category,s_gt,s_p,r,no_swap_r,swap_r,n_valid,n_invalid\n";
    for (const auto& [strategy, reports] : bundle.category_reports) {
        for (const auto& rep : reports) {
            csv << to_string(strategy) << "," << rep.category << "," << full_precision(rep.s_gt)
                << "," << full_precision(rep.s_p) << ","
                << (rep.r ? full_precision(*rep.r) : "");
            for (Orientation o : {Orientation::no_swap, Orientation::swap}) {
                auto it = rep.per_orientation.find(o);
                csv << ","
                    << (it != rep.per_orientation.end() && it->second.r
                            ? full_precision(*it->second.r)
                            : "");
            }
            csv << "," << rep.n_valid << "," << rep.n_invalid << "\n";
        }
    }
    return csv.str();
}

std::string render_accuracy_markdown(const ReportBundle& bundle) {
    std::ostringstream md;
    md << "# Multiple-choice accuracy\n\n";
    md << "| Strategy | Easy | Medium | Hard | Unparsable |\n|---|---|---|---|---|\n";
    for (const auto& [strategy, rep] : bundle.accuracy_reports) {
        md << "| " << strategy_label(strategy);
        for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
            auto it = rep.per_bucket.find(d);
            md << " | "
               << (it != rep.per_bucket.end() ? format_percent(it->second.accuracy) : "-");
        }
        md << " | " << rep.n_unparsable << " |\n";
    }
    md << "\n";
    return md.str();
}

std::string render_accuracy_csv(const ReportBundle& bundle) {
    std::ostringstream csv;
    csv << "strategy,difficulty,n_correct,n_total,accuracy,n_unparsable\n";
    for (const auto& [strategy, rep] : bundle.accuracy_reports) {
        for (const auto& [difficulty, bucket] : rep.per_bucket) {
            csv << to_string(strategy) << "," << to_string(difficulty) << "," << bucket.n_correct
                << "," << bucket.n_total << "," << full_precision(bucket.accuracy) << ","
                << rep.n_unparsable << "\n";
        }
    }
    return csv.str();
}

std::string render_density_markdown(const ReportBundle& bundle, bool verbose) {
    std::ostringstream md;
    md << "# Information density (token mode: " << bundle.metadata.token_mode << ")\n\n";
    md << "| Category | id (tokens/s)";
    if (verbose) md << " | id (per-sample mean)";
    md << " | delta_r (pp) | n |\n|---|---";
    if (verbose) md << "|---";
    md << "|---|---|\n";
    for (const auto& rep : bundle.density_reports) {
        md << "| " << rep.category << " | " << format_2dp(rep.id);
        if (verbose) md << " | " << format_2dp(rep.id_mean);
        md << " | " << (rep.delta_r ? format_2dp(*rep.delta_r * 100.0) : "-") << " | "
           << rep.n_samples << " |\n";
    }
    md << "\n";
    return md.str();
}

std::string render_density_csv(const ReportBundle& bundle) {
    std::ostringstream csv;
    csv << "category,id_pooled,id_mean,delta_r,n_samples\n";
    for (const auto& rep : bundle.density_reports) {
        csv << rep.category << "," << full_precision(rep.id) << "," << full_precision(rep.id_mean)
            << "," << (rep.delta_r ? full_precision(*rep.delta_r) : "") << "," << rep.n_samples
            << "\n";
    }
    return csv.str();
}

std::vector<fs::path> write_reports(const ReportBundle& bundle, const fs::path& out_dir,
                                    ReportFormat format, bool verbose) {
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    bool want_md = format != ReportFormat::csv;
    bool want_csv = format != ReportFormat::md;

    auto emit = [&](const std::string& stem, const std::string& md, const std::string& csv) {
        if (want_md) {
            fs::path p = out_dir / (stem + ".md");
            write_file(p, md);
            written.push_back(p);
        }
        if (want_csv) {
            fs::path p = out_dir / (stem + ".csv");
            write_file(p, csv);
            written.push_back(p);
        }
    };

    if (!bundle.category_reports.empty()) {
        emit("category_report", render_category_markdown(bundle), render_category_csv(bundle));
    }
    if (!bundle.accuracy_reports.empty()) {
        emit("accuracy_report", render_accuracy_markdown(bundle), render_accuracy_csv(bundle));
    }
    if (!bundle.density_reports.empty()) {
        emit("density_report", render_density_markdown(bundle, verbose),
             render_density_csv(bundle));
    }
    return written;
}

}  // namespace codeval
