// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Every reported number: alignment ratios and per-orientation breakdowns,
 * MCQ letter extraction and accuracy, token counting, information
 * density, and the CoD-vs-Standard delta. All pure functions.
 */

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "codeval/datamodel.hpp"

namespace codeval {

enum class TokenCountMode { usage_reported, whitespace };

std::string to_string(TokenCountMode m);
TokenCountMode token_count_mode_from_string(const std::string& s);

/// r = s_p / s_gt. Requires s_gt > 0.
double alignment_ratio(double s_p, double s_gt);

/// Groups valid verdicts by sample category. Per orientation: mean
/// score_gt, mean score_pred, their ratio. Overall means pool the valid
/// verdicts of both orientations; overall r is the ratio of those means.
/// Invalid verdicts only count toward n_invalid. Categories with zero
/// valid verdicts are reported with r unset, not dropped.
std::vector<CategoryReport> aggregate_category(
    const std::vector<JudgeVerdict>& verdicts,
    const std::unordered_map<std::string, const MediaSample*>& samples, StrategyKind strategy);

/// First matching rule wins:
///   1. stripped answer is a letter, optionally followed by '.', ')' or ':'
///   2. "answer is <L>" / "Answer: <L>", case-insensitive, parens allowed
///   3. a standalone "<L>." token, or a bare "<L>" token at end of line
///   4. answer equals one option's full text, case-insensitively
/// Returns nullopt (unparsable) when nothing matches. Rule order is part
/// of the report contract; changing it changes accuracy numbers.
std::optional<char> extract_choice(const std::string& answer,
                                   const std::vector<std::pair<char, std::string>>& options);

/// MCQ accuracy bucketed by difficulty; unparsable answers count in
/// n_total as incorrect.
AccuracyReport accuracy(const std::vector<GenerationRecord>& records,
                        const std::unordered_map<std::string, const MediaSample*>& samples,
                        StrategyKind strategy);

/// usage_reported: completion_tokens of the description turn.
/// whitespace: count of maximal non-whitespace runs in `text`.
std::int64_t token_count(const std::string& text, TokenCountMode mode,
                         const std::optional<TokenUsage>& usage);

/// Per category except Mixed: pooled id = total description tokens /
/// total audio seconds. id_mean carries the per-sample-rate mean as the
/// verbose alternative. Mixed records are silently excluded.
std::vector<DensityReport> info_density(
    const std::vector<GenerationRecord>& records,
    const std::unordered_map<std::string, const MediaSample*>& samples, TokenCountMode mode);

inline constexpr const char* kMixedCategory = "mixed";

/// r improvement of CoD over Standard, as a plain difference (rendered
/// in percentage points by reports).
double delta_r(double r_cod, double r_standard);

}  // namespace codeval
