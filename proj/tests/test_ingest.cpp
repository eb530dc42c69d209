// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>

#include "codeval/errors.hpp"
#include "codeval/ingest.hpp"
#include "support.hpp"

using namespace codeval;
using namespace codeval::testing;

TEST_CASE("load_manifest returns every sample line in file order") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    write_manifest(path, "bench", tmp.path() / "media",
                   {make_audio_sample("a1"), make_audio_sample("a2"), make_audio_sample("a3")});
    Manifest m = load_manifest(path);
    CHECK(m.dataset_name == "bench");
    REQUIRE(m.samples.size() == 3);
    CHECK(m.samples[0].id == "a1");
    CHECK(m.samples[1].id == "a2");
    CHECK(m.samples[2].id == "a3");
}

TEST_CASE("missing field is reported with its line number and name") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    {
        std::ofstream out(path);
        out << R"({"schema_version":1,"dataset_name":"d","media_root":"x"})" << "\n";
        out << R"({"id":"s1","modality":"audio","media_path":"a.wav","mime":"audio/wav","category":"speech","ground_truth_answer":"yes"})"
            << "\n";
    }
    CHECK_THROWS_WITH_AS(load_manifest(path), "line 2: missing field question", ParseError);
}

TEST_CASE("duplicate sample ids are rejected by name") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    write_manifest(path, "d", "x", {make_audio_sample("dup"), make_audio_sample("dup")});
    CHECK_THROWS_WITH_AS(load_manifest(path), "duplicate sample id 'dup' at line 3", ParseError);
}

TEST_CASE("unsupported schema version names both versions") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    {
        std::ofstream out(path);
        out << R"({"schema_version":99,"dataset_name":"d","media_root":"x"})" << "\n";
    }
    try {
        load_manifest(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string what = e.what();
        CHECK(what.find("99") != std::string::npos);
        CHECK(what.find("1") != std::string::npos);
    }
}

TEST_CASE("malformed line carries line number and fragment") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    {
        std::ofstream out(path);
        out << R"({"schema_version":1,"dataset_name":"d","media_root":"x"})" << "\n";
        out << "{not json" << "\n";
    }
    try {
        load_manifest(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string what = e.what();
        CHECK(what.find("line 2") != std::string::npos);
        CHECK(what.find("{not json") != std::string::npos);
    }
}

TEST_CASE("every loaded sample passes validation or loading fails") {
    TempDir tmp;
    auto path = tmp.path() / "m.jsonl";
    MediaSample bad = make_audio_sample("b1");
    bad.duration_seconds = -3.0;
    write_manifest(path, "d", "x", {bad});
    CHECK_THROWS_AS(load_manifest(path), ParseError);
}

TEST_CASE("resolve_media reads the exact bytes and keeps the sample MIME") {
    TempDir tmp;
    MediaSample s = make_audio_sample("clip");
    std::string bytes = "RIFF....WAVEdata\x01\x02\x03";
    write_media(tmp.path() / "media", s, bytes);
    MediaPayload p = resolve_media(s, tmp.path() / "media");
    CHECK(p.bytes == bytes);
    CHECK(p.mime == "audio/wav");
}

TEST_CASE("resolve_media rejects parent-directory escapes") {
    TempDir tmp;
    MediaSample s = make_audio_sample("x");
    s.media_path = "../secret";
    CHECK_THROWS_WITH_AS(resolve_media(s, tmp.path()), "path traversal rejected: ../secret",
                         StateError);
}

TEST_CASE("resolve_media names the full path of a missing file") {
    TempDir tmp;
    MediaSample s = make_audio_sample("img");
    s.media_path = "img.png";
    try {
        resolve_media(s, tmp.path());
        FAIL("expected StateError");
    } catch (const StateError& e) {
        CHECK(std::string(e.what()).find((tmp.path() / "img.png").string()) !=
              std::string::npos);
    }
}
