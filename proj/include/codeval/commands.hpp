// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Pipeline stages behind the CLI. Each command is independently
 * rerunnable; generation and judging resume from the run logs.
 * Exit codes: 0 ok, 1 partial failures, 2 configuration error.
 */

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codeval/report.hpp"
#include "codeval/runstore.hpp"

namespace codeval {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitConfigError = 2;

struct GenerateOptions {
    std::filesystem::path manifest_path;
    std::optional<std::filesystem::path> media_root;  // overrides the manifest header
    std::filesystem::path endpoint_config_path;
    std::optional<std::filesystem::path> template_config_path;
    StrategyKind strategy = StrategyKind::standard;
    std::optional<std::string> source_run;  // required for cod_transfer
    std::string run_id;
    std::filesystem::path runs_dir;
    int progress_every = 25;
};

int cmd_generate(const GenerateOptions& options);

struct JudgeOptions {
    std::string run_id;
    std::filesystem::path manifest_path;
    std::filesystem::path judge_config_path;
    std::filesystem::path runs_dir;
};

int cmd_judge(const JudgeOptions& options);

struct ReportOptions {
    std::vector<std::string> run_ids;
    std::filesystem::path manifest_path;
    std::filesystem::path runs_dir;
    std::filesystem::path out_dir;
    ReportFormat format = ReportFormat::both;
    TokenCountMode token_mode = TokenCountMode::usage_reported;
    bool verbose = false;
};

/// Judged category tables (and the CoD-vs-Standard comparison when both
/// strategies are present), or MCQ accuracy tables. Mixing the two
/// scoring paths in one invocation is an error.
int cmd_report(const ReportOptions& options);

/// MCQ accuracy only.
int cmd_score(const ReportOptions& options);

struct DensityOptions {
    std::string run_id;                        // cod generation run (judged for delta_r)
    std::optional<std::string> baseline_run;   // judged standard run for delta_r
    std::filesystem::path manifest_path;
    std::filesystem::path runs_dir;
    std::filesystem::path out_dir;
    ReportFormat format = ReportFormat::both;
    TokenCountMode token_mode = TokenCountMode::usage_reported;
    bool verbose = false;
};

int cmd_density(const DensityOptions& options);

int cmd_validate(const std::filesystem::path& manifest_path);

/// Everything cmd_report computes, exposed so tests can recompute any
/// published number straight from the run logs.
ReportBundle build_report(const RunStore& store, const std::vector<std::string>& run_ids,
                          const Manifest& manifest, TokenCountMode token_mode);

ReportBundle build_density_report(const RunStore& store, const std::string& run_id,
                                  const std::optional<std::string>& baseline_run,
                                  const Manifest& manifest, TokenCountMode token_mode);

}  // namespace codeval
