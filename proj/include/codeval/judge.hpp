// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * LLM-as-judge scoring with position-bias debiasing: each (ground truth,
 * prediction) pair is judged twice, once in each Assistant-1/Assistant-2
 * orientation, and parsed scores are mapped back so score_gt always
 * refers to the ground truth.
 */

#include <string>
#include <unordered_map>
#include <vector>

#include "codeval/datamodel.hpp"
#include "codeval/modelclient.hpp"

namespace codeval {

struct JudgePromptInputs {
    std::string context_description;  // dataset-provided judge context
    std::string question;
    std::string assistant1;
    std::string assistant2;
};

/// The judge prompt template; XAudioX / XQuestionX / XAssistant1X /
/// XAssistant2X are the substitution placeholders.
const std::string& judge_prompt_template();

/// Substitutes the four placeholders into the template; nothing else is
/// altered.
std::string render_judge_prompt(const JudgePromptInputs& inputs);

/// Scans lines top-down for the first line whose whitespace-separated
/// tokens are exactly two numeric literals; both must be in [0, 10].
/// Throws ParseError when no line qualifies and std::out_of_range is
/// never used: range violations throw ParseError too, carrying the value.
std::pair<double, double> parse_scores(const std::string& raw);

/// One judge call for one orientation. Unparsable outputs are retried up
/// to 3 extra times with a cache-bypass nonce; after that the verdict is
/// returned with valid=false. Transport errors propagate.
JudgeVerdict judge_pair(const MediaSample& sample, const std::string& gt, const std::string& pred,
                        Orientation orientation, ChatClient& judge_client);

/// Both orientations for every record, ordered by (sample_id, orientation).
std::vector<JudgeVerdict> judge_run(
    const std::vector<GenerationRecord>& records,
    const std::unordered_map<std::string, const MediaSample*>& samples, ChatClient& judge_client);

}  // namespace codeval
