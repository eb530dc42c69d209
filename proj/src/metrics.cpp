// SPDX-License-Identifier: Apache-2.0
#include "codeval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "codeval/errors.hpp"

namespace codeval {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_mixed(const std::string& category) { return lower(category) == kMixedCategory; }

struct Accum {
    double sum_gt = 0.0;
    double sum_p = 0.0;
    std::int64_t n = 0;
};

}  // namespace

std::string to_string(TokenCountMode m) {
    return m == TokenCountMode::usage_reported ? "usage" : "whitespace";
}

TokenCountMode token_count_mode_from_string(const std::string& s) {
    if (s == "usage" || s == "usage_reported") return TokenCountMode::usage_reported;
    if (s == "whitespace") return TokenCountMode::whitespace;
    throw ConfigError("unknown token count mode: " + s);
}

double alignment_ratio(double s_p, double s_gt) {
    if (s_gt <= 0.0) {
        throw StateError("alignment ratio undefined for s_gt <= 0 (got " + std::to_string(s_gt) +
                         ")");
    }
    return s_p / s_gt;
}

std::vector<CategoryReport> aggregate_category(
    const std::vector<JudgeVerdict>& verdicts,
    const std::unordered_map<std::string, const MediaSample*>& samples, StrategyKind strategy) {
    // category -> per-orientation and overall accumulators, insertion-stable
    // output order via a sorted map on category name.
    std::map<std::string, std::map<Orientation, Accum>> acc;
    std::map<std::string, Accum> overall;
    std::map<std::string, std::int64_t> invalid;

    for (const auto& v : verdicts) {
        auto it = samples.find(v.sample_id);
        if (it == samples.end()) {
            throw StateError("verdict references unknown sample " + v.sample_id);
        }
        const std::string& category = it->second->category;
        if (!v.valid) {
            ++invalid[category];
            acc[category];  // ensure the category is reported even if all-invalid
            continue;
        }
        auto& a = acc[category][v.orientation];
        a.sum_gt += *v.score_gt;
        a.sum_p += *v.score_pred;
        ++a.n;
        auto& o = overall[category];
        o.sum_gt += *v.score_gt;
        o.sum_p += *v.score_pred;
        ++o.n;
    }

    std::vector<CategoryReport> reports;
    for (auto& [category, by_orientation] : acc) {
        CategoryReport rep;
        rep.strategy = strategy;
        rep.category = category;
        rep.n_invalid = invalid.count(category) ? invalid[category] : 0;
        for (auto& [orientation, a] : by_orientation) {
            if (a.n == 0) continue;
            OrientationScores os;
            os.s_gt = a.sum_gt / static_cast<double>(a.n);
            os.s_p = a.sum_p / static_cast<double>(a.n);
            if (os.s_gt > 0.0) os.r = os.s_p / os.s_gt;
            rep.per_orientation[orientation] = os;
        }
        const Accum& o = overall[category];
        rep.n_valid = o.n;
        if (o.n > 0) {
            rep.s_gt = o.sum_gt / static_cast<double>(o.n);
            rep.s_p = o.sum_p / static_cast<double>(o.n);
            if (rep.s_gt > 0.0) rep.r = rep.s_p / rep.s_gt;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

std::optional<char> extract_choice(const std::string& answer,
                                   const std::vector<std::pair<char, std::string>>& options) {
    auto valid = [&](char c) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        for (const auto& [letter, text] : options) {
            if (letter == c) return true;
        }
        return false;
    };
    auto canon = [](char c) {
        return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    };

    const std::string stripped = strip(answer);

    // Rule 1: the whole answer is a letter, optionally with trailing '.', ')' or ':'.
    if (stripped.size() == 1 && valid(stripped[0])) return canon(stripped[0]);
    if (stripped.size() == 2 && valid(stripped[0]) &&
        (stripped[1] == '.' || stripped[1] == ')' || stripped[1] == ':')) {
        return canon(stripped[0]);
    }

    // Rule 2: "answer is <L>" / "Answer: <L>", optional parentheses.
    static const std::regex answer_pat(R"(answer(?:\s+is\s+|\s*:\s*)\(?([A-Za-z])\)?(?![A-Za-z0-9]))",
                                       std::regex::icase);
    std::smatch m;
    if (std::regex_search(stripped, m, answer_pat) && valid(m[1].str()[0])) {
        return canon(m[1].str()[0]);
    }

    // Rule 3: a standalone "<L>." token anywhere, or a bare "<L>" token at
    // end of line. Bare letters mid-sentence (the pronoun "I") never match.
    {
        std::istringstream lines(stripped);
        std::string line;
        while (std::getline(lines, line)) {
            std::istringstream toks(line);
            std::vector<std::string> tokens;
            std::string tok;
            while (toks >> tok) tokens.push_back(tok);
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                const std::string& t = tokens[i];
                if (t.size() == 2 && valid(t[0]) && t[1] == '.') return canon(t[0]);
                if (t.size() == 1 && valid(t[0]) && i + 1 == tokens.size()) return canon(t[0]);
            }
        }
    }

    // Rule 4: the answer is one option's full text.
    const std::string lowered = lower(stripped);
    for (const auto& [letter, text] : options) {
        if (lowered == lower(strip(text))) return letter;
    }
    return std::nullopt;
}

AccuracyReport accuracy(const std::vector<GenerationRecord>& records,
                        const std::unordered_map<std::string, const MediaSample*>& samples,
                        StrategyKind strategy) {
    AccuracyReport rep;
    rep.strategy = strategy;
    for (const auto& rec : records) {
        auto it = samples.find(rec.sample_id);
        if (it == samples.end()) {
            throw StateError("record references unknown sample " + rec.sample_id);
        }
        const MediaSample& sample = *it->second;
        if (!sample.is_mcq()) {
            throw StateError("sample " + sample.id + " is not multiple-choice; cannot score");
        }
        if (!sample.difficulty) {
            throw StateError("sample " + sample.id + " has no difficulty bucket");
        }
        auto& bucket = rep.per_bucket[*sample.difficulty];
        ++bucket.n_total;
        auto choice = extract_choice(rec.answer, *sample.options);
        if (!choice) {
            ++rep.n_unparsable;
        } else if (std::string(1, *choice) == sample.ground_truth_answer) {
            ++bucket.n_correct;
        }
    }
    for (auto& [difficulty, bucket] : rep.per_bucket) {
        bucket.accuracy =
            bucket.n_total == 0
                ? 0.0
                : static_cast<double>(bucket.n_correct) / static_cast<double>(bucket.n_total);
    }
    return rep;
}

std::int64_t token_count(const std::string& text, TokenCountMode mode,
                         const std::optional<TokenUsage>& usage) {
    if (mode == TokenCountMode::usage_reported) {
        if (!usage) {
            throw StateError(
                "no usage data recorded for this generation; rerun with --token-mode whitespace");
        }
        return usage->completion_tokens;
    }
    std::int64_t count = 0;
    bool in_run = false;
    for (char c : text) {
        bool ws = std::isspace(static_cast<unsigned char>(c));
        if (!ws && !in_run) ++count;
        in_run = !ws;
    }
    return count;
}

std::vector<DensityReport> info_density(
    const std::vector<GenerationRecord>& records,
    const std::unordered_map<std::string, const MediaSample*>& samples, TokenCountMode mode) {
    struct DensityAccum {
        double tokens = 0.0;
        double seconds = 0.0;
        double rate_sum = 0.0;
        std::int64_t n = 0;
    };
    std::map<std::string, DensityAccum> acc;
    std::vector<std::string> missing_duration;
    bool saw_mixed = false;

    for (const auto& rec : records) {
        if (rec.strategy.kind == StrategyKind::standard || !rec.description) {
            throw StateError("record " + rec.sample_id +
                             " has no description; density needs cod/cod_transfer records");
        }
        auto it = samples.find(rec.sample_id);
        if (it == samples.end()) {
            throw StateError("record references unknown sample " + rec.sample_id);
        }
        const MediaSample& sample = *it->second;
        if (sample.modality != Modality::audio) {
            throw StateError("sample " + sample.id + " is not audio; density is audio-only");
        }
        if (is_mixed(sample.category)) {
            saw_mixed = true;
            continue;
        }
        if (!sample.duration_seconds) {
            missing_duration.push_back(sample.id);
            continue;
        }
        // Only cod records carry the describe turn's usage; a transferred
        // description was generated elsewhere, so usage mode can't count it.
        std::optional<TokenUsage> description_usage;
        if (rec.strategy.kind == StrategyKind::cod && !rec.usage.empty()) {
            description_usage = rec.usage.front();
        }
        auto tokens = token_count(*rec.description, mode, description_usage);
        auto& a = acc[sample.category];
        a.tokens += static_cast<double>(tokens);
        a.seconds += *sample.duration_seconds;
        a.rate_sum += static_cast<double>(tokens) / *sample.duration_seconds;
        ++a.n;
    }

    if (!missing_duration.empty()) {
        std::ostringstream oss;
        oss << "samples missing duration_seconds:";
        for (const auto& id : missing_duration) oss << " " << id;
        throw StateError(oss.str());
    }
    if (saw_mixed) {
        std::cerr << "note: Mixed-category records excluded from density analysis\n";
    }

    std::vector<DensityReport> reports;
    for (auto& [category, a] : acc) {
        if (a.seconds <= 0.0) {
            throw StateError("zero total duration for category " + category);
        }
        DensityReport rep;
        rep.category = category;
        rep.id = a.tokens / a.seconds;
        rep.id_mean = a.rate_sum / static_cast<double>(a.n);
        rep.n_samples = a.n;
        reports.push_back(std::move(rep));
    }
    return reports;
}

double delta_r(double r_cod, double r_standard) { return r_cod - r_standard; }

}  // namespace codeval
