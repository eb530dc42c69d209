// SPDX-License-Identifier: Apache-2.0
#include "codeval/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "codeval/errors.hpp"

namespace codeval {

namespace {

const char kTemplate[] =
    "You are a helpful and precise assistant for checking the quality of the answer.\n"
    "[Detailed Audio Description]\n"
    "XAudioX\n"
    "[Question]\n"
    "XQuestionX\n"
    "[The Start of Assistant 1s Answer]\n"
    "XAssistant1X\n"
    "[The End of Assistant 1s Answer]\n"
    "[The Start of Assistant 2s Answer]\n"
    "XAssistant2X\n"
    "[The End of Assistant 2s Answer]\n"
    "[System]\n"
    "We would like to request your feedback on the performance of two AI assistants in "
    "response to the user question and audio description displayed above. AI assistants "
    "are provided with detailed audio descriptions and questions.\n"
    "Please rate the helpfulness, relevance, accuracy, and comprehensiveness of their "
    "responses. Each assistant receives an overall score on a scale of 1 to 10, where a "
    "higher score indicates better overall performance. Please output a single line "
    "containing only two values indicating the scores for Assistant 1 and 2, "
    "respectively. The two scores are separated by a space.";

// Replaces the single occurrence of `placeholder` in `text`.
void substitute(std::string& text, const std::string& placeholder, const std::string& value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos) {
        throw StateError("judge template missing placeholder " + placeholder);
    }
    text.replace(pos, placeholder.size(), value);
}

// Optional sign, digits, optional fractional part. Nothing else.
bool is_numeric_literal(const std::string& tok) {
    std::size_t i = 0;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
        ++i;
        ++digits;
    }
    if (digits == 0) return false;
    if (i == tok.size()) return true;
    if (tok[i] != '.') return false;
    ++i;
    std::size_t frac = 0;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
        ++i;
        ++frac;
    }
    return i == tok.size() && frac > 0;
}

}  // namespace

const std::string& judge_prompt_template() {
    static const std::string t = kTemplate;
    return t;
}

std::string render_judge_prompt(const JudgePromptInputs& inputs) {
    std::string out = judge_prompt_template();
    substitute(out, "XAudioX", inputs.context_description);
    substitute(out, "XQuestionX", inputs.question);
    substitute(out, "XAssistant1X", inputs.assistant1);
    substitute(out, "XAssistant2X", inputs.assistant2);
    return out;
}

std::pair<double, double> parse_scores(const std::string& raw) {
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream toks(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (toks >> tok) tokens.push_back(tok);
        if (tokens.size() != 2) continue;
        if (!is_numeric_literal(tokens[0]) || !is_numeric_literal(tokens[1])) continue;
        double a = std::strtod(tokens[0].c_str(), nullptr);
        double b = std::strtod(tokens[1].c_str(), nullptr);
        for (double v : {a, b}) {
            if (v < 0.0 || v > 10.0) {
                throw ParseError("judge score out of range [0,10]: " + std::to_string(v));
            }
        }
        return {a, b};
    }
    throw ParseError("no score line found in judge output: " + raw);
}

JudgeVerdict judge_pair(const MediaSample& sample, const std::string& gt, const std::string& pred,
                        Orientation orientation, ChatClient& judge_client) {
    if (!sample.judge_context) {
        throw StateError("sample " + sample.id + " has no judge_context; cannot judge");
    }
    JudgePromptInputs inputs;
    inputs.context_description = *sample.judge_context;
    inputs.question = sample.question;
    if (orientation == Orientation::no_swap) {
        inputs.assistant1 = gt;
        inputs.assistant2 = pred;
    } else {
        inputs.assistant1 = pred;
        inputs.assistant2 = gt;
    }
    std::vector<ChatMessage> messages{ChatMessage::text(Role::user, render_judge_prompt(inputs))};

    JudgeVerdict verdict;
    verdict.sample_id = sample.id;
    verdict.orientation = orientation;

    constexpr int kMaxAttempts = 4;  // 1 initial + 3 retries on unparsable output
    for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
        verdict.attempts = attempt;
        // Identical prompt under temperature 0 would replay the same cached
        // unparsable answer forever, so retries carry a cache-bypass nonce.
        std::string nonce = attempt == 1 ? "" : "judge-retry-" + std::to_string(attempt - 1);
        ChatResponse resp = judge_client.send_chat(messages, nonce);
        verdict.raw_text = resp.text;
        try {
            auto [first, second] = parse_scores(resp.text);
            if (orientation == Orientation::no_swap) {
                verdict.score_gt = first;
                verdict.score_pred = second;
            } else {
                verdict.score_gt = second;
                verdict.score_pred = first;
            }
            verdict.valid = true;
            return verdict;
        } catch (const ParseError&) {
            // fall through to retry
        }
    }
    verdict.valid = false;
    verdict.score_gt.reset();
    verdict.score_pred.reset();
    return verdict;
}

std::vector<JudgeVerdict> judge_run(
    const std::vector<GenerationRecord>& records,
    const std::unordered_map<std::string, const MediaSample*>& samples, ChatClient& judge_client) {
    // Every record must resolve before any judging begins.
    for (const auto& rec : records) {
        if (!samples.count(rec.sample_id)) {
            throw StateError("record references unknown sample " + rec.sample_id);
        }
    }

    std::vector<JudgeVerdict> verdicts;
    verdicts.reserve(records.size() * 2);
    for (const auto& rec : records) {
        const MediaSample& sample = *samples.at(rec.sample_id);
        for (Orientation o : {Orientation::no_swap, Orientation::swap}) {
            verdicts.push_back(
                judge_pair(sample, sample.ground_truth_answer, rec.answer, o, judge_client));
        }
    }
    std::stable_sort(verdicts.begin(), verdicts.end(), [](const auto& a, const auto& b) {
        if (a.sample_id != b.sample_id) return a.sample_id < b.sample_id;
        return static_cast<int>(a.orientation) < static_cast<int>(b.orientation);
    });
    return verdicts;
}

}  // namespace codeval
