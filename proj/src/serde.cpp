// SPDX-License-Identifier: Apache-2.0
#include "codeval/serde.hpp"

#include <ctime>

#include "codeval/errors.hpp"

namespace codeval {

void to_json(json& j, const MediaSample& s) {
    j = json{{"id", s.id},
             {"modality", to_string(s.modality)},
             {"media_path", s.media_path},
             {"mime", s.mime},
             {"category", s.category},
             {"question", s.question},
             {"ground_truth_answer", s.ground_truth_answer}};
    if (s.difficulty) j["difficulty"] = to_string(*s.difficulty);
    if (s.duration_seconds) j["duration_seconds"] = *s.duration_seconds;
    if (s.options) {
        json opts = json::array();
        for (const auto& [letter, text] : *s.options) {
            opts.push_back(json::array({std::string(1, letter), text}));
        }
        j["options"] = opts;
    }
    if (s.judge_context) j["judge_context"] = *s.judge_context;
}

void from_json(const json& j, MediaSample& s) {
    s.id = j.at("id").get<std::string>();
    s.modality = modality_from_string(j.at("modality").get<std::string>());
    s.media_path = j.at("media_path").get<std::string>();
    s.mime = j.at("mime").get<std::string>();
    s.category = j.at("category").get<std::string>();
    s.question = j.at("question").get<std::string>();
    s.ground_truth_answer = j.at("ground_truth_answer").get<std::string>();
    if (j.contains("difficulty") && !j["difficulty"].is_null()) {
        s.difficulty = difficulty_from_string(j["difficulty"].get<std::string>());
    }
    if (j.contains("duration_seconds") && !j["duration_seconds"].is_null()) {
        s.duration_seconds = j["duration_seconds"].get<double>();
    }
    if (j.contains("options") && !j["options"].is_null()) {
        std::vector<std::pair<char, std::string>> opts;
        for (const auto& o : j["options"]) {
            auto letter = o.at(0).get<std::string>();
            if (letter.size() != 1) throw ParseError("option letter must be a single character");
            opts.emplace_back(letter[0], o.at(1).get<std::string>());
        }
        s.options = std::move(opts);
    }
    if (j.contains("judge_context") && !j["judge_context"].is_null()) {
        s.judge_context = j["judge_context"].get<std::string>();
    }
}

void to_json(json& j, const Strategy& s) {
    j = json{{"kind", to_string(s.kind)}};
    if (s.description_source_run) j["description_source_run"] = *s.description_source_run;
}

void from_json(const json& j, Strategy& s) {
    s.kind = strategy_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("description_source_run") && !j["description_source_run"].is_null()) {
        s.description_source_run = j["description_source_run"].get<std::string>();
    }
}

void to_json(json& j, const TokenUsage& u) {
    j = json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

void from_json(const json& j, TokenUsage& u) {
    u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
}

void to_json(json& j, const GenerationRecord& r) {
    j = json{{"sample_id", r.sample_id},
             {"strategy", r.strategy},
             {"answer", r.answer},
             {"model_id", r.model_id},
             {"usage", r.usage},
             {"created_at", r.created_at},
             {"request_digests", r.request_digests}};
    if (r.description) j["description"] = *r.description;
}

void from_json(const json& j, GenerationRecord& r) {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.strategy = j.at("strategy").get<Strategy>();
    r.answer = j.at("answer").get<std::string>();
    // Schema 1 run logs wrote "model"; schema 2 renamed it to "model_id".
    if (j.contains("model_id")) {
        r.model_id = j["model_id"].get<std::string>();
    } else {
        r.model_id = j.at("model").get<std::string>();
    }
    if (j.contains("usage") && !j["usage"].is_null()) {
        r.usage = j["usage"].get<std::vector<TokenUsage>>();
    }
    r.created_at = j.value("created_at", std::string{});
    if (j.contains("request_digests")) {
        r.request_digests = j["request_digests"].get<std::vector<std::string>>();
    }
    if (j.contains("description") && !j["description"].is_null()) {
        r.description = j["description"].get<std::string>();
    }
}

void to_json(json& j, const JudgeVerdict& v) {
    j = json{{"sample_id", v.sample_id},
             {"orientation", to_string(v.orientation)},
             {"raw_text", v.raw_text},
             {"valid", v.valid},
             {"attempts", v.attempts}};
    if (v.score_gt) j["score_gt"] = *v.score_gt;
    if (v.score_pred) j["score_pred"] = *v.score_pred;
}

void from_json(const json& j, JudgeVerdict& v) {
    v.sample_id = j.at("sample_id").get<std::string>();
    v.orientation = orientation_from_string(j.at("orientation").get<std::string>());
    v.raw_text = j.at("raw_text").get<std::string>();
    v.valid = j.at("valid").get<bool>();
    v.attempts = j.at("attempts").get<int>();
    if (j.contains("score_gt") && !j["score_gt"].is_null()) v.score_gt = j["score_gt"].get<double>();
    if (j.contains("score_pred") && !j["score_pred"].is_null()) {
        v.score_pred = j["score_pred"].get<double>();
    }
}

std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace codeval
