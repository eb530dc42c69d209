// SPDX-License-Identifier: Apache-2.0
#include "codeval/datamodel.hpp"

#include <stdexcept>

#include "codeval/errors.hpp"

namespace codeval {

std::string to_string(Modality m) {
    return m == Modality::audio ? "audio" : "image";
}

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
    }
    return "easy";
}

std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::standard: return "standard";
        case StrategyKind::cod: return "cod";
        case StrategyKind::cod_transfer: return "cod_transfer";
    }
    return "standard";
}

std::string to_string(Orientation o) {
    return o == Orientation::no_swap ? "no_swap" : "swap";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Modality modality_from_string(const std::string& s) {
    if (s == "audio") return Modality::audio;
    if (s == "image") return Modality::image;
    throw ParseError("unknown modality: " + s);
}

Difficulty difficulty_from_string(const std::string& s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    throw ParseError("unknown difficulty: " + s);
}

StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "standard") return StrategyKind::standard;
    if (s == "cod") return StrategyKind::cod;
    if (s == "cod_transfer") return StrategyKind::cod_transfer;
    throw ParseError("unknown strategy kind: " + s);
}

Orientation orientation_from_string(const std::string& s) {
    if (s == "no_swap") return Orientation::no_swap;
    if (s == "swap") return Orientation::swap;
    throw ParseError("unknown orientation: " + s);
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ParseError("unknown role: " + s);
}

std::vector<std::string> validate_sample(const MediaSample& sample) {
    std::vector<std::string> violations;
    if (sample.id.empty()) violations.push_back("id must be nonempty");
    if (sample.media_path.empty()) violations.push_back("media_path must be nonempty");
    if (sample.question.empty()) violations.push_back("question must be nonempty");

    if (sample.options) {
        const auto& opts = *sample.options;
        if (opts.size() < 2 || opts.size() > 26) {
            violations.push_back("options must have 2..26 entries");
        }
        bool letters_ok = true;
        for (std::size_t i = 0; i < opts.size(); ++i) {
            if (opts[i].first != static_cast<char>('A' + i)) letters_ok = false;
        }
        if (!letters_ok) violations.push_back("option letters must be consecutive from 'A'");
        if (sample.ground_truth_answer.size() != 1) {
            violations.push_back("ground truth not an option letter");
        } else {
            char gt = sample.ground_truth_answer[0];
            bool found = false;
            for (const auto& [letter, text] : opts) {
                if (letter == gt) found = true;
            }
            if (!found) violations.push_back("ground truth not an option letter");
        }
    } else if (sample.ground_truth_answer.empty()) {
        violations.push_back("ground_truth_answer must be nonempty");
    }

    if (sample.duration_seconds && *sample.duration_seconds <= 0.0) {
        violations.push_back("duration must be > 0");
    }
    return violations;
}

ContentPart ContentPart::make_text(std::string t) {
    ContentPart p;
    p.kind = Kind::text;
    p.text = std::move(t);
    return p;
}

ContentPart ContentPart::make_media(Kind k, std::string bytes, std::string mime) {
    ContentPart p;
    p.kind = k;
    p.data = std::move(bytes);
    p.mime = std::move(mime);
    return p;
}

ChatMessage ChatMessage::text(Role role, std::string content) {
    ChatMessage m;
    m.role = role;
    m.parts.push_back(ContentPart::make_text(std::move(content)));
    return m;
}

}  // namespace codeval
