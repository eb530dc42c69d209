// SPDX-License-Identifier: Apache-2.0
#include "codeval/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "codeval/errors.hpp"
#include "codeval/judge.hpp"
#include "codeval/metrics.hpp"
#include "codeval/serde.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

PromptTemplates templates_from(const std::optional<fs::path>& path) {
    return path ? load_templates(*path) : PromptTemplates{};
}

DescriptionLookup make_lookup(const RunStore& store, const std::string& source_run) {
    auto records = store.load_generations(source_run);
    auto by_id = std::make_shared<std::unordered_map<std::string, std::string>>();
    for (const auto& r : records) {
        if (r.description) (*by_id)[r.sample_id] = *r.description;
    }
    return [by_id](const std::string& sample_id) -> std::optional<std::string> {
        auto it = by_id->find(sample_id);
        if (it == by_id->end()) return std::nullopt;
        return it->second;
    };
}

// True when the runs share no scoring path: verdicts mean judged QA, MCQ
// samples mean accuracy.
bool run_is_judged(const RunStore::LoadedRun& run) { return !run.verdicts.empty(); }

}  // namespace

int cmd_generate(const GenerateOptions& options) {
    EndpointConfig endpoint = load_endpoint_config(options.endpoint_config_path);
    PromptTemplates templates = templates_from(options.template_config_path);
    Manifest manifest = load_manifest(options.manifest_path);
    if (options.media_root) manifest.media_root = *options.media_root;

    if (options.strategy == StrategyKind::cod_transfer && !options.source_run) {
        throw ConfigError("strategy cod_transfer requires --source-run");
    }
    // Fail on a missing API key before any network activity.
    if (!endpoint.api_key_env_name.empty() && !std::getenv(endpoint.api_key_env_name.c_str())) {
        throw ConfigError("API key environment variable not set: " + endpoint.api_key_env_name);
    }

    Strategy strategy;
    strategy.kind = options.strategy;
    strategy.description_source_run = options.source_run;

    RunStore store(options.runs_dir);
    const std::string manifest_digest = file_digest(options.manifest_path);
    const std::string digest = compute_config_digest(endpoint, templates, strategy, manifest_digest);

    if (!store.run_exists(options.run_id)) {
        RunManifest rm;
        rm.run_id = options.run_id;
        rm.created_at = now_iso8601();
        rm.config_digest = digest;
        rm.strategy = strategy;
        rm.model_id = endpoint.model_id;
        rm.dataset_name = manifest.dataset_name;
        store.create_run(rm);
    } else {
        RunManifest existing = store.open_run(options.run_id);
        if (existing.status == RunStatus::complete) {
            auto pending = store.resume_plan(options.run_id, manifest, digest);
            std::cout << pending.size() << " pending\n";
            return pending.empty() ? kExitOk : kExitPartialFailure;
        }
        if (existing.status == RunStatus::failed) {
            store.set_status(options.run_id, RunStatus::in_progress);
        }
    }

    auto pending = store.resume_plan(options.run_id, manifest, digest);
    std::cout << pending.size() << " pending\n";
    if (pending.empty()) {
        store.set_status(options.run_id, RunStatus::complete);
        return kExitOk;
    }

    ChatClient client(endpoint, &store.cache());
    ChainRunner runner(client, templates, manifest.dataset_name, manifest.media_root);
    DescriptionLookup lookup;
    if (options.source_run) lookup = make_lookup(store, *options.source_run);

    auto index = manifest.index();
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex failure_mu;
    std::vector<std::pair<std::string, std::string>> failures;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const MediaSample& sample = *index.at(pending[i]);
            try {
                GenerationRecord rec = runner.run(sample, strategy, lookup);
                store.append_generation(options.run_id, rec);
            } catch (const std::exception& e) {
                std::lock_guard lk(failure_mu);
                failures.emplace_back(sample.id, e.what());
            }
            std::size_t d = done.fetch_add(1) + 1;
            if (options.progress_every > 0 &&
                d % static_cast<std::size_t>(options.progress_every) == 0) {
                std::cerr << "progress: " << d << "/" << pending.size() << " samples\n";
            }
        }
    };

    unsigned n_workers = std::min<std::size_t>(pending.size(),
                                               static_cast<std::size_t>(endpoint.max_in_flight));
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (!failures.empty()) {
        std::cerr << failures.size() << " samples failed:\n";
        for (const auto& [id, what] : failures) std::cerr << "  " << id << ": " << what << "\n";
        return kExitPartialFailure;
    }
    store.set_status(options.run_id, RunStatus::complete);
    std::cout << "run " << options.run_id << " complete (" << pending.size() << " samples)\n";
    return kExitOk;
}

int cmd_judge(const JudgeOptions& options) {
    EndpointConfig judge_endpoint = load_endpoint_config(options.judge_config_path);
    Manifest manifest = load_manifest(options.manifest_path);
    if (!judge_endpoint.api_key_env_name.empty() &&
        !std::getenv(judge_endpoint.api_key_env_name.c_str())) {
        throw ConfigError("API key environment variable not set: " +
                          judge_endpoint.api_key_env_name);
    }

    RunStore store(options.runs_dir);
    RunManifest rm = store.open_run(options.run_id);
    if (rm.status != RunStatus::complete) {
        auto done = store.completed_sample_ids(options.run_id);
        std::string pending_list;
        for (const auto& s : manifest.samples) {
            if (!done.count(s.id)) pending_list += " " + s.id;
        }
        throw StateError("generation run " + options.run_id +
                         " is not complete; pending samples:" + pending_list);
    }

    auto records = store.load_generations(options.run_id);
    auto index = manifest.index();
    for (const auto& rec : records) {
        if (!index.count(rec.sample_id)) {
            throw StateError("record references unknown sample " + rec.sample_id);
        }
    }

    // Resume: only (sample, orientation) pairs without a stored verdict.
    std::set<std::pair<std::string, std::string>> existing;
    for (const auto& v : store.load_verdicts(options.run_id)) {
        existing.emplace(v.sample_id, to_string(v.orientation));
    }

    // Verdict appends require an in_progress run.
    store.set_status(options.run_id, RunStatus::in_progress);
    ChatClient judge_client(judge_endpoint, &store.cache());

    std::int64_t n_valid = 0;
    std::int64_t n_invalid = 0;
    int exit_code = kExitOk;
    try {
        for (const auto& rec : records) {
            const MediaSample& sample = *index.at(rec.sample_id);
            for (Orientation o : {Orientation::no_swap, Orientation::swap}) {
                if (existing.count({rec.sample_id, to_string(o)})) continue;
                JudgeVerdict v =
                    judge_pair(sample, sample.ground_truth_answer, rec.answer, o, judge_client);
                store.append_verdict(options.run_id, v);
                v.valid ? ++n_valid : ++n_invalid;
            }
        }
    } catch (const std::exception& e) {
        // Already-persisted verdicts are retained; a rerun judges the rest.
        std::cerr << "judging aborted: " << e.what() << "\n";
        exit_code = kExitPartialFailure;
    }
    store.set_status(options.run_id, RunStatus::complete);
    std::cout << "verdicts: " << n_valid << " valid, " << n_invalid << " invalid\n";
    return exit_code;
}

ReportBundle build_report(const RunStore& store, const std::vector<std::string>& run_ids,
                          const Manifest& manifest, TokenCountMode token_mode) {
    auto index = manifest.index();
    ReportBundle bundle;
    bundle.metadata.run_ids = run_ids;
    bundle.metadata.token_mode = to_string(token_mode);

    bool saw_judged = false;
    bool saw_mcq = false;
    for (const auto& run_id : run_ids) {
        auto run = store.load_run(run_id);
        bundle.metadata.model_id = run.manifest.model_id;
        if (run_is_judged(run)) {
            saw_judged = true;
            bundle.category_reports[run.manifest.strategy.kind] =
                aggregate_category(run.verdicts, index, run.manifest.strategy.kind);
        } else {
            saw_mcq = true;
            bundle.accuracy_reports[run.manifest.strategy.kind] =
                accuracy(run.records, index, run.manifest.strategy.kind);
        }
    }
    if (saw_judged && saw_mcq) {
        throw ConfigError(
            "cannot mix judged and multiple-choice runs in one report: open QA is scored by "
            "LLM-as-judge ratios, MCQ by extracted-letter accuracy");
    }

    // Comparison when both a standard and a cod judged run are given.
    auto std_it = bundle.category_reports.find(StrategyKind::standard);
    auto cod_it = bundle.category_reports.find(StrategyKind::cod);
    if (std_it != bundle.category_reports.end() && cod_it != bundle.category_reports.end()) {
        std::map<std::string, double> standard_r;
        for (const auto& rep : std_it->second) {
            if (rep.r) standard_r[rep.category] = *rep.r;
        }
        for (const auto& rep : cod_it->second) {
            if (rep.r && standard_r.count(rep.category)) {
                bundle.delta_r_by_category[rep.category] =
                    delta_r(*rep.r, standard_r[rep.category]);
            }
        }
    }
    return bundle;
}

ReportBundle build_density_report(const RunStore& store, const std::string& run_id,
                                  const std::optional<std::string>& baseline_run,
                                  const Manifest& manifest, TokenCountMode token_mode) {
    auto index = manifest.index();
    auto run = store.load_run(run_id);
    ReportBundle bundle;
    bundle.metadata.run_ids = {run_id};
    if (baseline_run) bundle.metadata.run_ids.push_back(*baseline_run);
    bundle.metadata.model_id = run.manifest.model_id;
    bundle.metadata.token_mode = to_string(token_mode);

    bundle.density_reports = info_density(run.records, index, token_mode);

    if (baseline_run) {
        auto baseline = store.load_run(*baseline_run);
        auto cod_reports = aggregate_category(run.verdicts, index, run.manifest.strategy.kind);
        auto std_reports =
            aggregate_category(baseline.verdicts, index, baseline.manifest.strategy.kind);
        std::map<std::string, double> standard_r;
        for (const auto& rep : std_reports) {
            if (rep.r) standard_r[rep.category] = *rep.r;
        }
        for (const auto& rep : cod_reports) {
            if (rep.r && standard_r.count(rep.category)) {
                bundle.delta_r_by_category[rep.category] =
                    delta_r(*rep.r, standard_r[rep.category]);
            }
        }
        for (auto& density : bundle.density_reports) {
            auto it = bundle.delta_r_by_category.find(density.category);
            if (it != bundle.delta_r_by_category.end()) density.delta_r = it->second;
        }
    }
    return bundle;
}

int cmd_report(const ReportOptions& options) {
    RunStore store(options.runs_dir);
    Manifest manifest = load_manifest(options.manifest_path);
    ReportBundle bundle = build_report(store, options.run_ids, manifest, options.token_mode);
    auto written = write_reports(bundle, options.out_dir, options.format, options.verbose);
    if (!bundle.category_reports.empty()) std::cout << render_category_markdown(bundle);
    if (!bundle.accuracy_reports.empty()) std::cout << render_accuracy_markdown(bundle);
    for (const auto& p : written) std::cerr << "wrote " << p.string() << "\n";
    return kExitOk;
}

int cmd_score(const ReportOptions& options) {
    RunStore store(options.runs_dir);
    Manifest manifest = load_manifest(options.manifest_path);
    auto index = manifest.index();
    ReportBundle bundle;
    bundle.metadata.run_ids = options.run_ids;
    bundle.metadata.token_mode = to_string(options.token_mode);
    for (const auto& run_id : options.run_ids) {
        auto run = store.load_run(run_id);
        bundle.metadata.model_id = run.manifest.model_id;
        bundle.accuracy_reports[run.manifest.strategy.kind] =
            accuracy(run.records, index, run.manifest.strategy.kind);
    }
    auto written = write_reports(bundle, options.out_dir, options.format, options.verbose);
    std::cout << render_accuracy_markdown(bundle);
    for (const auto& p : written) std::cerr << "wrote " << p.string() << "\n";
    return kExitOk;
}

int cmd_density(const DensityOptions& options) {
    RunStore store(options.runs_dir);
    Manifest manifest = load_manifest(options.manifest_path);
    ReportBundle bundle = build_density_report(store, options.run_id, options.baseline_run,
                                               manifest, options.token_mode);
    auto written = write_reports(bundle, options.out_dir, options.format, options.verbose);
    std::cout << render_density_markdown(bundle, options.verbose);
    for (const auto& p : written) std::cerr << "wrote " << p.string() << "\n";
    return kExitOk;
}

int cmd_validate(const fs::path& manifest_path) {
    Manifest manifest = load_manifest(manifest_path);
    std::cout << "ok: " << manifest.dataset_name << ", " << manifest.samples.size()
              << " samples\n";
    return kExitOk;
}

}  // namespace codeval
