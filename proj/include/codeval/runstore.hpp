// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Append-only persistence for runs. Layout under the runs directory:
 *
 *   cache/               response cache, shared across runs
 *   <run_id>/run.json    run manifest
 *   <run_id>/generations.jsonl
 *   <run_id>/verdicts.jsonl
 *
 * Logs are JSONL, recovered after a crash by discarding the truncated
 * tail. One writer per run; readers are unrestricted.
 */

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "codeval/chains.hpp"
#include "codeval/datamodel.hpp"
#include "codeval/ingest.hpp"
#include "codeval/modelclient.hpp"

namespace codeval {

inline constexpr int kRunSchemaVersion = 2;

enum class RunStatus { in_progress, complete, failed };

std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct RunManifest {
    int schema_version = kRunSchemaVersion;
    std::string run_id;
    std::string created_at;
    std::string config_digest;
    Strategy strategy;
    std::string model_id;
    std::string dataset_name;
    RunStatus status = RunStatus::in_progress;
};

/// Digest identifying a run's full configuration: endpoint settings that
/// shape generation, prompt templates, strategy, and the manifest content.
std::string compute_config_digest(const EndpointConfig& endpoint, const PromptTemplates& templates,
                                  const Strategy& strategy, const std::string& manifest_digest);

/// SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

class RunStore {
public:
    explicit RunStore(std::filesystem::path runs_dir);

    const std::filesystem::path& runs_dir() const { return runs_dir_; }
    const ResponseCache& cache() const { return cache_; }

    bool run_exists(const std::string& run_id) const;
    RunManifest create_run(const RunManifest& manifest);
    RunManifest open_run(const std::string& run_id) const;
    void set_status(const std::string& run_id, RunStatus status);

    /// Durable, atomic append. Rejects appends to complete/failed runs and
    /// duplicate (sample_id, strategy) generations.
    void append_generation(const std::string& run_id, const GenerationRecord& record);
    /// Same guarantees, keyed by (sample_id, orientation).
    void append_verdict(const std::string& run_id, const JudgeVerdict& verdict);

    std::vector<GenerationRecord> load_generations(const std::string& run_id) const;
    std::vector<JudgeVerdict> load_verdicts(const std::string& run_id) const;

    struct LoadedRun {
        RunManifest manifest;
        std::vector<GenerationRecord> records;
        std::vector<JudgeVerdict> verdicts;
    };
    LoadedRun load_run(const std::string& run_id) const;

    /// Sample ids with a generation record, recomputed from the log so a
    /// crash can never leave the completed set ahead of the records.
    std::unordered_set<std::string> completed_sample_ids(const std::string& run_id) const;

    /// Pending = manifest order minus completed. Refuses when the stored
    /// config digest differs from current_config_digest.
    std::vector<std::string> resume_plan(const std::string& run_id, const Manifest& manifest,
                                         const std::string& current_config_digest) const;

private:
    std::filesystem::path run_dir(const std::string& run_id) const;
    void append_line(const std::filesystem::path& path, const std::string& line);
    void require_in_progress(const std::string& run_id) const;

    std::filesystem::path runs_dir_;
    ResponseCache cache_;
    // Duplicate-append guards, lazily seeded from the logs.
    std::mutex mu_;
    std::map<std::string, std::set<std::pair<std::string, std::string>>> seen_generations_;
    std::map<std::string, std::set<std::pair<std::string, std::string>>> seen_verdicts_;
};

}  // namespace codeval
