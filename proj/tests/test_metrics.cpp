// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "codeval/errors.hpp"
#include "codeval/metrics.hpp"
#include "support.hpp"

using namespace codeval;
using namespace codeval::testing;

namespace {

JudgeVerdict make_verdict(const std::string& sample_id, Orientation o, double gt, double pred) {
    JudgeVerdict v;
    v.sample_id = sample_id;
    v.orientation = o;
    v.score_gt = gt;
    v.score_pred = pred;
    v.raw_text = "scripted";
    v.valid = true;
    v.attempts = 1;
    return v;
}

JudgeVerdict make_invalid(const std::string& sample_id, Orientation o) {
    JudgeVerdict v;
    v.sample_id = sample_id;
    v.orientation = o;
    v.raw_text = "unparsable";
    v.valid = false;
    v.attempts = 4;
    return v;
}

// Brute-force oracle: flat recomputation of means over the raw verdict
// list, independent of aggregate_category's grouping path.
struct OracleRow {
    double s_gt, s_p;
    std::int64_t n_valid, n_invalid;
};
OracleRow oracle_category(const std::vector<JudgeVerdict>& verdicts,
                          const std::unordered_map<std::string, const MediaSample*>& samples,
                          const std::string& category,
                          std::optional<Orientation> orientation = std::nullopt) {
    double sum_gt = 0, sum_p = 0;
    std::int64_t n = 0, n_invalid = 0;
    for (const auto& v : verdicts) {
        if (samples.at(v.sample_id)->category != category) continue;
        if (orientation && v.orientation != *orientation) continue;
        if (!v.valid) {
            ++n_invalid;
            continue;
        }
        sum_gt += *v.score_gt;
        sum_p += *v.score_pred;
        ++n;
    }
    return {n ? sum_gt / n : 0.0, n ? sum_p / n : 0.0, n, n_invalid};
}

struct VerdictFixture {
    std::vector<MediaSample> samples;
    std::vector<JudgeVerdict> verdicts;
    std::unordered_map<std::string, const MediaSample*> index;

    VerdictFixture(const VerdictFixture&) = delete;
    VerdictFixture() = default;
    void reindex() {
        index.clear();
        for (const auto& s : samples) index[s.id] = &s;
    }
};

}  // namespace

TEST_CASE("alignment_ratio matches reported category ratios") {
    CHECK(alignment_ratio(7.51, 8.23) == doctest::Approx(0.9125).epsilon(1e-4));
    CHECK(alignment_ratio(5.0, 5.0) == 1.0);
    CHECK(alignment_ratio(6.38, 8.12) == doctest::Approx(0.7857).epsilon(1e-4));
    CHECK_THROWS_AS(alignment_ratio(1.0, 0.0), StateError);
    CHECK_THROWS_AS(alignment_ratio(1.0, -2.0), StateError);
}

TEST_CASE("alignment_ratio is scale invariant") {
    std::mt19937 rng{11};
    std::uniform_real_distribution<double> dist(0.1, 10.0);
    for (int i = 0; i < 1000; ++i) {
        double s_p = dist(rng), s_gt = dist(rng), a = dist(rng);
        CHECK(alignment_ratio(a * s_p, a * s_gt) ==
              doctest::Approx(alignment_ratio(s_p, s_gt)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_category reproduces per-orientation and overall ratios") {
    VerdictFixture f;
    f.samples = {make_audio_sample("s1", "Speech"), make_audio_sample("s2", "Speech")};
    f.reindex();
    // Orientation means: no_swap 8.11/7.81, swap 7.98/7.47.
    f.verdicts = {make_verdict("s1", Orientation::no_swap, 8.11, 7.81),
                  make_verdict("s2", Orientation::no_swap, 8.11, 7.81),
                  make_verdict("s1", Orientation::swap, 7.98, 7.47),
                  make_verdict("s2", Orientation::swap, 7.98, 7.47)};

    auto reports = aggregate_category(f.verdicts, f.index, StrategyKind::cod);
    REQUIRE(reports.size() == 1);
    const auto& rep = reports[0];
    CHECK(rep.category == "Speech");
    CHECK(*rep.per_orientation.at(Orientation::no_swap).r ==
          doctest::Approx(0.9630).epsilon(1e-4));
    CHECK(*rep.per_orientation.at(Orientation::swap).r == doctest::Approx(0.9361).epsilon(1e-4));
    // Overall r is the ratio of pooled means: 7.64 / 8.045.
    CHECK(*rep.r == doctest::Approx(0.9497).epsilon(1e-4));
    CHECK(rep.n_valid == 4);
    CHECK(rep.n_invalid == 0);
    // r = s_p / s_gt within 1e-9.
    CHECK(*rep.r == doctest::Approx(rep.s_p / rep.s_gt).epsilon(1e-9));
}

TEST_CASE("equal scores give r = 1 everywhere") {
    VerdictFixture f;
    f.samples = {make_audio_sample("s1", "music")};
    f.reindex();
    f.verdicts = {make_verdict("s1", Orientation::no_swap, 6.5, 6.5),
                  make_verdict("s1", Orientation::swap, 9.0, 9.0)};
    auto reports = aggregate_category(f.verdicts, f.index, StrategyKind::standard);
    REQUIRE(reports.size() == 1);
    CHECK(*reports[0].r == 1.0);
    CHECK(*reports[0].per_orientation.at(Orientation::no_swap).r == 1.0);
    CHECK(*reports[0].per_orientation.at(Orientation::swap).r == 1.0);
}

TEST_CASE("invalid verdicts are excluded from means and tallied") {
    VerdictFixture f;
    f.samples = {make_audio_sample("s1", "sound"), make_audio_sample("s2", "sound")};
    f.reindex();
    f.verdicts = {make_verdict("s1", Orientation::no_swap, 8, 6),
                  make_verdict("s1", Orientation::swap, 8, 6),
                  make_verdict("s2", Orientation::no_swap, 8, 6),
                  make_invalid("s2", Orientation::swap)};
    auto reports = aggregate_category(f.verdicts, f.index, StrategyKind::cod);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].n_valid == 3);
    CHECK(reports[0].n_invalid == 1);
    CHECK(reports[0].s_gt == 8.0);
    CHECK(reports[0].s_p == 6.0);
}

TEST_CASE("a category whose verdicts are all invalid is reported, not dropped") {
    VerdictFixture f;
    f.samples = {make_audio_sample("s1", "speech"), make_audio_sample("s2", "music")};
    f.reindex();
    f.verdicts = {make_verdict("s1", Orientation::no_swap, 8, 7),
                  make_invalid("s2", Orientation::no_swap),
                  make_invalid("s2", Orientation::swap)};
    auto reports = aggregate_category(f.verdicts, f.index, StrategyKind::cod);
    REQUIRE(reports.size() == 2);
    auto music = std::find_if(reports.begin(), reports.end(),
                              [](const auto& r) { return r.category == "music"; });
    REQUIRE(music != reports.end());
    CHECK(music->n_valid == 0);
    CHECK(music->n_invalid == 2);
    CHECK(!music->r.has_value());
}

TEST_CASE("aggregate_category matches the brute-force oracle on random verdict sets") {
    std::mt19937 rng{1234};
    std::uniform_real_distribution<double> score(0.0, 10.0);
    const std::vector<std::string> category_pool{"speech", "sound", "music",
                                                 "mixed", "cat5",  "cat6"};

    for (int trial = 0; trial < 100; ++trial) {
        VerdictFixture f;
        int n_categories = 1 + static_cast<int>(rng() % 6);
        int n_verdicts = 1 + static_cast<int>(rng() % 1000);
        int n_samples = std::max(1, n_verdicts / 2);
        for (int i = 0; i < n_samples; ++i) {
            f.samples.push_back(make_audio_sample(
                "s" + std::to_string(i), category_pool[rng() % n_categories]));
        }
        f.reindex();
        std::uniform_real_distribution<double> invalid_rate_dist(0.0, 0.2);
        double invalid_rate = invalid_rate_dist(rng);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (int i = 0; i < n_verdicts; ++i) {
            std::string id = "s" + std::to_string(rng() % n_samples);
            Orientation o = rng() % 2 ? Orientation::swap : Orientation::no_swap;
            if (coin(rng) < invalid_rate) {
                f.verdicts.push_back(make_invalid(id, o));
            } else {
                f.verdicts.push_back(make_verdict(id, o, score(rng), score(rng)));
            }
        }

        auto reports = aggregate_category(f.verdicts, f.index, StrategyKind::cod);
        for (const auto& rep : reports) {
            auto overall = oracle_category(f.verdicts, f.index, rep.category);
            CHECK(rep.n_valid == overall.n_valid);
            CHECK(rep.n_invalid == overall.n_invalid);
            if (overall.n_valid > 0) {
                CHECK(rep.s_gt == doctest::Approx(overall.s_gt).epsilon(1e-12));
                CHECK(rep.s_p == doctest::Approx(overall.s_p).epsilon(1e-12));
                CHECK(*rep.r == doctest::Approx(overall.s_p / overall.s_gt).epsilon(1e-12));
            }
            for (Orientation o : {Orientation::no_swap, Orientation::swap}) {
                auto expected = oracle_category(f.verdicts, f.index, rep.category, o);
                if (expected.n_valid == 0) {
                    CHECK(!rep.per_orientation.count(o));
                    continue;
                }
                const auto& got = rep.per_orientation.at(o);
                CHECK(got.s_gt == doctest::Approx(expected.s_gt).epsilon(1e-12));
                CHECK(got.s_p == doctest::Approx(expected.s_p).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("extract_choice applies the documented rules in order") {
    auto options = *make_mcq_sample("q", Difficulty::easy, 'J').options;
    // Rule 1
    CHECK(extract_choice("B.", options) == 'B');
    CHECK(extract_choice("  J  ", options) == 'J');
    CHECK(extract_choice("c)", options) == 'C');
    CHECK(extract_choice("D:", options) == 'D');
    // Rule 2
    CHECK(extract_choice("The answer is (J)", options) == 'J');
    CHECK(extract_choice("the ANSWER IS b", options) == 'B');
    CHECK(extract_choice("Answer: E", options) == 'E');
    CHECK(extract_choice("final answer:(F)", options) == 'F');
    // Rule 3
    CHECK(extract_choice("I would pick G. because it fits", options) == 'G');
    CHECK(extract_choice("After thinking, my choice is H", options) == 'H');
    // Rule 4
    CHECK(extract_choice("option text 3", options) == 'D');
    CHECK(extract_choice("  OPTION TEXT 9  ", options) == 'J');
    // Unparsable
    CHECK(!extract_choice("no clue whatsoever", options).has_value());
    CHECK(!extract_choice("", options).has_value());
}

TEST_CASE("bare option letter 'I' mid-sentence does not fire rule 3") {
    auto options = *make_mcq_sample("q", Difficulty::easy, 'J').options;  // A..J includes I
    CHECK(!extract_choice("I cannot tell", options).has_value());
    // ...but a standalone choice token does.
    CHECK(extract_choice("I. is the one", options) == 'I');
    CHECK(extract_choice("my pick is I", options) == 'I');
}

TEST_CASE("rule order is first-hit-wins") {
    auto options = *make_mcq_sample("q", Difficulty::easy, 'J').options;
    // Rule 2 fires before a later standalone token (rule 3).
    CHECK(extract_choice("The answer is A. Not B.", options) == 'A');
}

TEST_CASE("accuracy buckets by difficulty and counts unparsable as incorrect") {
    std::vector<MediaSample> samples;
    std::unordered_map<std::string, const MediaSample*> index;
    std::vector<GenerationRecord> records;
    for (int i = 0; i < 4; ++i) {
        samples.push_back(make_mcq_sample("e" + std::to_string(i), Difficulty::easy, 'A'));
    }
    for (auto& s : samples) index[s.id] = &s;
    auto add_record = [&](const std::string& id, const std::string& answer) {
        GenerationRecord r;
        r.sample_id = id;
        r.strategy.kind = StrategyKind::standard;
        r.answer = answer;
        records.push_back(r);
    };
    add_record("e0", "A.");
    add_record("e1", "The answer is A");
    add_record("e2", "B.");
    add_record("e3", "cannot determine");

    auto rep = accuracy(records, index, StrategyKind::standard);
    const auto& easy = rep.per_bucket.at(Difficulty::easy);
    CHECK(easy.n_total == 4);
    CHECK(easy.n_correct == 2);
    CHECK(easy.accuracy == 0.5);
    CHECK(rep.n_unparsable == 1);
}

TEST_CASE("accuracy is permutation-invariant in record order") {
    std::vector<MediaSample> samples;
    std::unordered_map<std::string, const MediaSample*> index;
    std::vector<GenerationRecord> records;
    std::mt19937 rng{5};
    for (int i = 0; i < 30; ++i) {
        Difficulty d = static_cast<Difficulty>(i % 3);
        samples.push_back(make_mcq_sample("s" + std::to_string(i), d,
                                          static_cast<char>('A' + i % 10)));
    }
    for (auto& s : samples) index[s.id] = &s;
    for (int i = 0; i < 30; ++i) {
        GenerationRecord r;
        r.sample_id = "s" + std::to_string(i);
        r.strategy.kind = StrategyKind::cod;
        r.answer = i % 4 == 0 ? std::string(1, static_cast<char>('A' + i % 10)) : "B.";
        records.push_back(r);
    }
    auto baseline = accuracy(records, index, StrategyKind::cod);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(records.begin(), records.end(), rng);
        auto shuffled = accuracy(records, index, StrategyKind::cod);
        for (auto& [d, bucket] : baseline.per_bucket) {
            CHECK(shuffled.per_bucket.at(d).n_correct == bucket.n_correct);
            CHECK(shuffled.per_bucket.at(d).n_total == bucket.n_total);
        }
        CHECK(shuffled.n_unparsable == baseline.n_unparsable);
    }
}

TEST_CASE("accuracy rejects non-MCQ samples by name") {
    auto s = make_audio_sample("open1");
    std::unordered_map<std::string, const MediaSample*> index{{s.id, &s}};
    GenerationRecord r;
    r.sample_id = "open1";
    r.answer = "A.";
    try {
        accuracy({r}, index, StrategyKind::standard);
        FAIL("expected StateError");
    } catch (const StateError& e) {
        CHECK(std::string(e.what()).find("open1") != std::string::npos);
    }
}

TEST_CASE("token_count in both modes") {
    CHECK(token_count("the cat sat", TokenCountMode::whitespace, std::nullopt) == 3);
    CHECK(token_count("", TokenCountMode::whitespace, std::nullopt) == 0);
    CHECK(token_count("  padded   out  ", TokenCountMode::whitespace, std::nullopt) == 2);
    TokenUsage usage{12, 57};
    CHECK(token_count("anything", TokenCountMode::usage_reported, usage) == 57);
    CHECK_THROWS_AS(token_count("x", TokenCountMode::usage_reported, std::nullopt), StateError);
}

TEST_CASE("info_density pools tokens over seconds and excludes Mixed") {
    std::vector<MediaSample> samples{
        make_audio_sample("sp1", "speech", 10.0), make_audio_sample("sp2", "speech", 10.0),
        make_audio_sample("mx1", "Mixed", 5.0)};
    std::unordered_map<std::string, const MediaSample*> index;
    for (auto& s : samples) index[s.id] = &s;

    auto make_cod = [&](const std::string& id, int tokens) {
        GenerationRecord r;
        r.sample_id = id;
        r.strategy.kind = StrategyKind::cod;
        std::string desc;
        for (int i = 0; i < tokens; ++i) desc += "w ";
        r.description = desc;
        r.answer = "a";
        return r;
    };

    // 39 tokens over 10 s in one record: id = 3.9.
    auto single = info_density({make_cod("sp1", 39)}, index, TokenCountMode::whitespace);
    REQUIRE(single.size() == 1);
    CHECK(single[0].id == doctest::Approx(3.9).epsilon(1e-12));

    // Pooled: (39 + 41) / 20 = 4.0; Mixed absent.
    auto pooled = info_density({make_cod("sp1", 39), make_cod("sp2", 41), make_cod("mx1", 100)},
                               index, TokenCountMode::whitespace);
    REQUIRE(pooled.size() == 1);
    CHECK(pooled[0].category == "speech");
    CHECK(pooled[0].id == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(pooled[0].n_samples == 2);
    // Per-sample mean differs from pooled in general: (3.9 + 4.1) / 2.
    CHECK(pooled[0].id_mean == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("info_density is invariant under batching") {
    std::mt19937 rng{99};
    std::vector<MediaSample> samples;
    std::vector<GenerationRecord> records;
    std::unordered_map<std::string, const MediaSample*> index;
    for (int i = 0; i < 40; ++i) {
        samples.push_back(make_audio_sample("s" + std::to_string(i), "speech",
                                            1.0 + static_cast<double>(rng() % 100)));
    }
    for (auto& s : samples) index[s.id] = &s;
    for (int i = 0; i < 40; ++i) {
        GenerationRecord r;
        r.sample_id = "s" + std::to_string(i);
        r.strategy.kind = StrategyKind::cod;
        std::string desc;
        for (unsigned w = 0; w < 1 + rng() % 80; ++w) desc += "tok ";
        r.description = desc;
        records.push_back(r);
    }
    auto whole = info_density(records, index, TokenCountMode::whitespace);
    REQUIRE(whole.size() == 1);

    // Split into two batches; recombined token/second sums must agree.
    std::vector<GenerationRecord> a(records.begin(), records.begin() + 17);
    std::vector<GenerationRecord> b(records.begin() + 17, records.end());
    auto ra = info_density(a, index, TokenCountMode::whitespace);
    auto rb = info_density(b, index, TokenCountMode::whitespace);
    double seconds_a = 0, seconds_b = 0;
    for (int i = 0; i < 17; ++i) seconds_a += *samples[i].duration_seconds;
    for (int i = 17; i < 40; ++i) seconds_b += *samples[i].duration_seconds;
    double recombined =
        (ra[0].id * seconds_a + rb[0].id * seconds_b) / (seconds_a + seconds_b);
    CHECK(whole[0].id == doctest::Approx(recombined).epsilon(1e-12));
}

TEST_CASE("info_density errors list every sample missing a duration") {
    std::vector<MediaSample> samples{make_audio_sample("ok", "speech", 10.0),
                                     make_audio_sample("nd1", "speech", 10.0),
                                     make_audio_sample("nd2", "sound", 10.0)};
    samples[1].duration_seconds.reset();
    samples[2].duration_seconds.reset();
    std::unordered_map<std::string, const MediaSample*> index;
    for (auto& s : samples) index[s.id] = &s;
    std::vector<GenerationRecord> records;
    for (auto& s : samples) {
        GenerationRecord r;
        r.sample_id = s.id;
        r.strategy.kind = StrategyKind::cod;
        r.description = "some words here";
        records.push_back(r);
    }
    try {
        info_density(records, index, TokenCountMode::whitespace);
        FAIL("expected StateError");
    } catch (const StateError& e) {
        std::string what = e.what();
        CHECK(what.find("nd1") != std::string::npos);
        CHECK(what.find("nd2") != std::string::npos);
    }
}

TEST_CASE("delta_r matches reported improvements") {
    CHECK(delta_r(0.9502, 0.9124) == doctest::Approx(0.0378).epsilon(1e-12));
    CHECK(delta_r(0.5, 0.5) == 0.0);
    CHECK(delta_r(0.8722, 0.8631) == doctest::Approx(0.0091).epsilon(1e-12));
}
