// SPDX-License-Identifier: Apache-2.0
//
// codeval — evaluation harness for Standard / CoD / CoD* prompting
// against OpenAI-compatible multi-modal chat endpoints.
//
// Pipeline: validate -> generate -> judge (open QA) or score (MCQ)
//           -> density / report.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "codeval/commands.hpp"
#include "codeval/errors.hpp"

using namespace codeval;

namespace {

std::filesystem::path default_runs_dir() {
    if (const char* env = std::getenv("CODEVAL_RUNS_DIR")) return env;
    return "runs";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"codeval: multi-modal prompting strategy evaluation harness"};
    app.require_subcommand(1);

    GenerateOptions gen;
    gen.runs_dir = default_runs_dir();
    std::string gen_strategy = "standard";
    std::string gen_media_root;
    std::string gen_templates;
    auto* generate = app.add_subcommand("generate", "Run a prompting strategy over a manifest");
    generate->add_option("--manifest", gen.manifest_path, "Benchmark manifest (JSONL)")->required();
    generate->add_option("--media-root", gen_media_root, "Override the manifest's media root");
    generate->add_option("--endpoint-config", gen.endpoint_config_path, "Endpoint config (JSON)")
        ->required();
    generate->add_option("--strategy", gen_strategy, "standard | cod | cod-transfer");
    generate->add_option("--source-run", gen.source_run,
                         "Run providing descriptions (cod-transfer only)");
    generate->add_option("--run-id", gen.run_id, "Run identifier")->required();
    generate->add_option("--runs-dir", gen.runs_dir, "Runs directory");
    generate->add_option("--templates", gen_templates, "Prompt template overrides (JSON)");
    generate->add_option("--progress-every", gen.progress_every, "Progress line interval");

    JudgeOptions judge;
    judge.runs_dir = default_runs_dir();
    auto* judge_cmd = app.add_subcommand("judge", "Judge a finished generation run");
    judge_cmd->add_option("--run-id", judge.run_id, "Generation run to judge")->required();
    judge_cmd->add_option("--manifest", judge.manifest_path, "Benchmark manifest")->required();
    judge_cmd->add_option("--judge-config", judge.judge_config_path, "Judge endpoint config")
        ->required();
    judge_cmd->add_option("--runs-dir", judge.runs_dir, "Runs directory");

    ReportOptions score;
    score.runs_dir = default_runs_dir();
    score.out_dir = "reports";
    std::string score_format = "both";
    auto* score_cmd = app.add_subcommand("score", "Multiple-choice accuracy for runs");
    score_cmd->add_option("--runs", score.run_ids, "Run ids")->required();
    score_cmd->add_option("--manifest", score.manifest_path, "Benchmark manifest")->required();
    score_cmd->add_option("--runs-dir", score.runs_dir, "Runs directory");
    score_cmd->add_option("--out-dir", score.out_dir, "Report output directory");
    score_cmd->add_option("--format", score_format, "md | csv | both");

    DensityOptions density;
    density.runs_dir = default_runs_dir();
    density.out_dir = "reports";
    std::string density_format = "both";
    std::string density_token_mode = "usage";
    auto* density_cmd =
        app.add_subcommand("density", "Information density of descriptions (audio)");
    density_cmd->add_option("--run-id", density.run_id, "CoD generation run")->required();
    density_cmd->add_option("--baseline-run", density.baseline_run,
                            "Judged standard run for delta_r");
    density_cmd->add_option("--manifest", density.manifest_path, "Benchmark manifest")->required();
    density_cmd->add_option("--runs-dir", density.runs_dir, "Runs directory");
    density_cmd->add_option("--out-dir", density.out_dir, "Report output directory");
    density_cmd->add_option("--format", density_format, "md | csv | both");
    density_cmd->add_option("--token-mode", density_token_mode, "usage | whitespace");
    density_cmd->add_flag("--verbose", density.verbose, "Also print per-sample-mean id");

    ReportOptions report;
    report.runs_dir = default_runs_dir();
    report.out_dir = "reports";
    std::string report_format = "both";
    std::string report_token_mode = "usage";
    auto* report_cmd = app.add_subcommand("report", "Render score tables for runs");
    report_cmd->add_option("--runs", report.run_ids, "Run ids")->required();
    report_cmd->add_option("--manifest", report.manifest_path, "Benchmark manifest")->required();
    report_cmd->add_option("--runs-dir", report.runs_dir, "Runs directory");
    report_cmd->add_option("--out-dir", report.out_dir, "Report output directory");
    report_cmd->add_option("--format", report_format, "md | csv | both");
    report_cmd->add_option("--token-mode", report_token_mode, "usage | whitespace");
    report_cmd->add_flag("--verbose", report.verbose, "Verbose tables");

    std::filesystem::path validate_manifest;
    auto* validate_cmd = app.add_subcommand("validate", "Lint a benchmark manifest");
    validate_cmd->add_option("--manifest", validate_manifest, "Benchmark manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) {
            std::string s = gen_strategy;
            for (auto& c : s) {
                if (c == '-') c = '_';
            }
            gen.strategy = strategy_kind_from_string(s);
            if (!gen_media_root.empty()) gen.media_root = gen_media_root;
            if (!gen_templates.empty()) gen.template_config_path = gen_templates;
            return cmd_generate(gen);
        }
        if (*judge_cmd) return cmd_judge(judge);
        if (*score_cmd) {
            score.format = report_format_from_string(score_format);
            return cmd_score(score);
        }
        if (*density_cmd) {
            density.format = report_format_from_string(density_format);
            density.token_mode = token_count_mode_from_string(density_token_mode);
            return cmd_density(density);
        }
        if (*report_cmd) {
            report.format = report_format_from_string(report_format);
            report.token_mode = token_count_mode_from_string(report_token_mode);
            return cmd_report(report);
        }
        if (*validate_cmd) return cmd_validate(validate_manifest);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}
