// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Shared domain types for the evaluation harness.
 *
 * Everything here is an immutable value after construction and safe to
 * share across worker threads. JSON encodings live in serde.hpp.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace codeval {

enum class Modality { audio, image };
enum class Difficulty { easy, medium, hard };
enum class StrategyKind { standard, cod, cod_transfer };
enum class Orientation { no_swap, swap };
enum class Role { system, user, assistant };

std::string to_string(Modality m);
std::string to_string(Difficulty d);
std::string to_string(StrategyKind k);
std::string to_string(Orientation o);
std::string to_string(Role r);

Modality modality_from_string(const std::string& s);
Difficulty difficulty_from_string(const std::string& s);
StrategyKind strategy_kind_from_string(const std::string& s);
Orientation orientation_from_string(const std::string& s);
Role role_from_string(const std::string& s);

/// One benchmark item: a media reference plus its question and answer key.
struct MediaSample {
    std::string id;
    Modality modality = Modality::audio;
    std::string media_path;   // relative to the manifest's media root
    std::string mime;
    std::string category;     // e.g. speech / sound / music / mixed
    std::optional<Difficulty> difficulty;
    std::optional<double> duration_seconds;  // audio only
    std::string question;
    // MCQ options as (letter, text), consecutive letters from 'A'.
    std::optional<std::vector<std::pair<char, std::string>>> options;
    std::string ground_truth_answer;  // free text (open QA) or a letter (MCQ)
    std::optional<std::string> judge_context;  // dataset-provided reference description

    bool is_mcq() const { return options.has_value(); }
};

/// Returns every violated invariant, not just the first. Empty means ok.
std::vector<std::string> validate_sample(const MediaSample& sample);

struct ContentPart {
    enum class Kind { text, image, audio };
    Kind kind = Kind::text;
    std::string text;        // kind == text
    std::string data;        // raw media bytes, kind == image/audio
    std::string mime;        // kind == image/audio

    static ContentPart make_text(std::string t);
    static ContentPart make_media(Kind k, std::string bytes, std::string mime);
};

struct ChatMessage {
    Role role = Role::user;
    std::vector<ContentPart> parts;

    static ChatMessage text(Role role, std::string content);
};

struct Strategy {
    StrategyKind kind = StrategyKind::standard;
    // Required iff kind == cod_transfer: the run the description came from.
    std::optional<std::string> description_source_run;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

/// One chain execution against a sample.
struct GenerationRecord {
    std::string sample_id;
    Strategy strategy;
    std::optional<std::string> description;  // present iff cod / cod_transfer
    std::string answer;
    std::string model_id;
    std::vector<TokenUsage> usage;           // one entry per endpoint call, may be empty
    std::string created_at;                  // ISO-8601 UTC
    std::vector<std::string> request_digests;
};

/// One judge call, both parsed scores plus validity metadata.
struct JudgeVerdict {
    std::string sample_id;
    Orientation orientation = Orientation::no_swap;
    // Always mapped back so score_gt refers to the ground truth
    // regardless of orientation. Unset when !valid.
    std::optional<double> score_gt;
    std::optional<double> score_pred;
    std::string raw_text;
    bool valid = false;
    int attempts = 0;
};

struct OrientationScores {
    double s_gt = 0.0;
    double s_p = 0.0;
    std::optional<double> r;
};

/// Per-category judged scores for one strategy (one Table-1-style row group).
struct CategoryReport {
    StrategyKind strategy = StrategyKind::standard;
    std::string category;
    double s_gt = 0.0;  // mean over all valid verdicts, both orientations
    double s_p = 0.0;
    std::optional<double> r;  // s_p / s_gt; unset when no valid verdicts
    std::map<Orientation, OrientationScores> per_orientation;
    std::int64_t n_valid = 0;
    std::int64_t n_invalid = 0;
};

/// Tokens-per-second of generated description for one category.
struct DensityReport {
    std::string category;
    double id = 0.0;        // pooled: total tokens / total seconds
    double id_mean = 0.0;   // mean of per-sample rates (verbose alternative)
    std::optional<double> delta_r;  // percentage points, set by comparisons
    std::int64_t n_samples = 0;
};

struct BucketAccuracy {
    std::int64_t n_correct = 0;
    std::int64_t n_total = 0;
    double accuracy = 0.0;
};

struct AccuracyReport {
    StrategyKind strategy = StrategyKind::standard;
    std::map<Difficulty, BucketAccuracy> per_bucket;
    std::int64_t n_unparsable = 0;
};

}  // namespace codeval
