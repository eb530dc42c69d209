// SPDX-License-Identifier: Apache-2.0
#include "codeval/runstore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "codeval/errors.hpp"
#include "codeval/serde.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

constexpr const char* kRunManifestFile = "run.json";
constexpr const char* kGenerationsFile = "generations.jsonl";
constexpr const char* kVerdictsFile = "verdicts.jsonl";

json manifest_to_json(const RunManifest& m) {
    return json{{"schema_version", m.schema_version},
                {"run_id", m.run_id},
                {"created_at", m.created_at},
                {"config_digest", m.config_digest},
                {"strategy", m.strategy},
                {"model_id", m.model_id},
                {"dataset_name", m.dataset_name},
                {"status", to_string(m.status)}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version > kRunSchemaVersion || m.schema_version < 1) {
        throw ParseError("unsupported run schema_version " + std::to_string(m.schema_version) +
                         ", this build supports up to " + std::to_string(kRunSchemaVersion));
    }
    m.run_id = j.at("run_id").get<std::string>();
    m.created_at = j.value("created_at", std::string{});
    m.config_digest = j.at("config_digest").get<std::string>();
    m.strategy = j.at("strategy").get<Strategy>();
    m.model_id = j.value("model_id", j.value("model", std::string{}));
    m.dataset_name = j.value("dataset_name", std::string{});
    // Migration from schema 1: no status field; those runs were only ever
    // written to completion, so they load as complete.
    if (m.schema_version == 1) {
        m.status = RunStatus::complete;
    } else {
        m.status = run_status_from_string(j.at("status").get<std::string>());
    }
    return m;
}

// Reads a JSONL log, dropping the truncated tail a crash may have left.
template <typename T>
std::vector<T> load_log(const fs::path& path) {
    std::vector<T> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        ++line_no;
        auto nl = content.find('\n', pos);
        if (nl == std::string::npos) {
            std::cerr << "warning: " << path.string() << " line " << line_no
                      << " has no terminating newline; discarding truncated tail\n";
            break;
        }
        std::string line = content.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line).get<T>());
        } catch (const json::exception&) {
            std::cerr << "warning: " << path.string() << " line " << line_no
                      << " is unreadable; discarding it and the rest of the log\n";
            break;
        }
    }
    return out;
}

}  // namespace

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::in_progress: return "in_progress";
        case RunStatus::complete: return "complete";
        case RunStatus::failed: return "failed";
    }
    return "in_progress";
}

RunStatus run_status_from_string(const std::string& s) {
    if (s == "in_progress") return RunStatus::in_progress;
    if (s == "complete") return RunStatus::complete;
    if (s == "failed") return RunStatus::failed;
    throw ParseError("unknown run status: " + s);
}

std::string compute_config_digest(const EndpointConfig& endpoint, const PromptTemplates& templates,
                                  const Strategy& strategy, const std::string& manifest_digest) {
    json canon;
    canon["base_url"] = endpoint.base_url;
    canon["model_id"] = endpoint.model_id;
    canon["temperature"] = endpoint.temperature;
    canon["max_output_tokens"] = endpoint.max_output_tokens;
    canon["describe_audio"] = templates.describe_audio;
    canon["describe_image"] = templates.describe_image;
    canon["answer_preamble"] = templates.answer_preamble ? json(*templates.answer_preamble) : json();
    json overrides = json::object();
    for (const auto& [key, tmpl] : templates.overrides) {
        overrides[key.first + "/" + key.second] = tmpl;
    }
    canon["template_overrides"] = overrides;
    canon["strategy"] = strategy;
    canon["manifest_digest"] = manifest_digest;
    return sha256_hex(canon.dump());
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file for digest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

RunStore::RunStore(fs::path runs_dir)
    : runs_dir_(std::move(runs_dir)), cache_(runs_dir_ / "cache") {
    fs::create_directories(runs_dir_);
}

fs::path RunStore::run_dir(const std::string& run_id) const { return runs_dir_ / run_id; }

bool RunStore::run_exists(const std::string& run_id) const {
    return fs::exists(run_dir(run_id) / kRunManifestFile);
}

RunManifest RunStore::create_run(const RunManifest& manifest) {
    if (run_exists(manifest.run_id)) {
        throw StateError("run already exists: " + manifest.run_id);
    }
    fs::create_directories(run_dir(manifest.run_id));
    std::ofstream out(run_dir(manifest.run_id) / kRunManifestFile, std::ios::trunc);
    out << manifest_to_json(manifest).dump(2) << "\n";
    return manifest;
}

RunManifest RunStore::open_run(const std::string& run_id) const {
    std::ifstream in(run_dir(run_id) / kRunManifestFile);
    if (!in) throw StateError("run not found: " + run_id);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("corrupt run manifest for " + run_id + ": " + e.what());
    }
    return manifest_from_json(j);
}

void RunStore::set_status(const std::string& run_id, RunStatus status) {
    RunManifest m = open_run(run_id);
    m.status = status;
    m.schema_version = kRunSchemaVersion;
    std::ofstream out(run_dir(run_id) / kRunManifestFile, std::ios::trunc);
    out << manifest_to_json(m).dump(2) << "\n";
}

void RunStore::append_line(const fs::path& path, const std::string& line) {
    // One write() of the whole line; a crash leaves either the full record
    // or a newline-less tail that reload discards.
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw StateError("cannot open log for append: " + path.string());
    // A crash mid-write can leave a torn tail with no newline. Appending
    // onto it would glue two records into one unreadable line, so cut the
    // file back to its last complete record first.
    off_t size = ::lseek(fd, 0, SEEK_END);
    char last = '\n';
    if (size > 0 && ::pread(fd, &last, 1, size - 1) == 1 && last != '\n') {
        off_t keep = 0;
        constexpr off_t kChunk = 4096;
        for (off_t end = size; end > 0 && keep == 0; ) {
            off_t begin = end > kChunk ? end - kChunk : 0;
            std::string buf(static_cast<std::size_t>(end - begin), '\0');
            if (::pread(fd, buf.data(), buf.size(), begin) !=
                static_cast<ssize_t>(buf.size())) {
                break;
            }
            auto nl = buf.rfind('\n');
            if (nl != std::string::npos) keep = begin + static_cast<off_t>(nl) + 1;
            end = begin;
        }
        if (::ftruncate(fd, keep) != 0) {
            ::close(fd);
            throw StateError("cannot repair torn log tail: " + path.string());
        }
    }
    std::string buf = line + "\n";
    ssize_t written = ::write(fd, buf.data(), buf.size());
    bool ok = written == static_cast<ssize_t>(buf.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw StateError("append failed: " + path.string());
}

void RunStore::require_in_progress(const std::string& run_id) const {
    RunManifest m = open_run(run_id);
    if (m.status != RunStatus::in_progress) {
        throw StateError("run " + run_id + " is " + to_string(m.status) + "; appends refused");
    }
}

void RunStore::append_generation(const std::string& run_id, const GenerationRecord& record) {
    require_in_progress(run_id);
    const auto key = std::make_pair(record.sample_id, to_string(record.strategy.kind));
    {
        std::lock_guard lk(mu_);
        auto& seen = seen_generations_[run_id];
        if (seen.empty()) {
            for (const auto& r : load_generations(run_id)) {
                seen.emplace(r.sample_id, to_string(r.strategy.kind));
            }
        }
        if (!seen.insert(key).second) {
            throw StateError("duplicate generation for sample " + record.sample_id +
                             " with strategy " + to_string(record.strategy.kind));
        }
    }
    append_line(run_dir(run_id) / kGenerationsFile, json(record).dump());
}

void RunStore::append_verdict(const std::string& run_id, const JudgeVerdict& verdict) {
    require_in_progress(run_id);
    const auto key = std::make_pair(verdict.sample_id, to_string(verdict.orientation));
    {
        std::lock_guard lk(mu_);
        auto& seen = seen_verdicts_[run_id];
        if (seen.empty()) {
            for (const auto& v : load_verdicts(run_id)) {
                seen.emplace(v.sample_id, to_string(v.orientation));
            }
        }
        if (!seen.insert(key).second) {
            throw StateError("duplicate verdict for sample " + verdict.sample_id + " orientation " +
                             to_string(verdict.orientation));
        }
    }
    append_line(run_dir(run_id) / kVerdictsFile, json(verdict).dump());
}

std::vector<GenerationRecord> RunStore::load_generations(const std::string& run_id) const {
    return load_log<GenerationRecord>(run_dir(run_id) / kGenerationsFile);
}

std::vector<JudgeVerdict> RunStore::load_verdicts(const std::string& run_id) const {
    return load_log<JudgeVerdict>(run_dir(run_id) / kVerdictsFile);
}

RunStore::LoadedRun RunStore::load_run(const std::string& run_id) const {
    LoadedRun out;
    out.manifest = open_run(run_id);
    out.records = load_generations(run_id);
    out.verdicts = load_verdicts(run_id);
    return out;
}

std::unordered_set<std::string> RunStore::completed_sample_ids(const std::string& run_id) const {
    std::unordered_set<std::string> done;
    for (const auto& r : load_generations(run_id)) done.insert(r.sample_id);
    return done;
}

std::vector<std::string> RunStore::resume_plan(const std::string& run_id, const Manifest& manifest,
                                               const std::string& current_config_digest) const {
    RunManifest m = open_run(run_id);
    if (m.config_digest != current_config_digest) {
        throw StateError("config digest mismatch for run " + run_id + ": stored " +
                         m.config_digest + ", current " + current_config_digest +
                         "; a changed prompt or config must start a new run");
    }
    auto done = completed_sample_ids(run_id);
    std::vector<std::string> pending;
    for (const auto& s : manifest.samples) {
        if (!done.count(s.id)) pending.push_back(s.id);
    }
    return pending;
}

}  // namespace codeval
