// SPDX-License-Identifier: Apache-2.0
#include "codeval/ingest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "codeval/errors.hpp"
#include "codeval/serde.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

std::string fragment_of(const std::string& line) {
    constexpr std::size_t kMax = 120;
    if (line.size() <= kMax) return line;
    return line.substr(0, kMax) + "...";
}

}  // namespace

std::unordered_map<std::string, const MediaSample*> Manifest::index() const {
    std::unordered_map<std::string, const MediaSample*> idx;
    idx.reserve(samples.size());
    for (const auto& s : samples) idx.emplace(s.id, &s);
    return idx;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path.string());

    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    std::unordered_set<std::string> seen_ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid record (" +
                             e.what() + "): " + fragment_of(line));
        }
        if (line_no == 1) {
            try {
                m.schema_version = j.at("schema_version").get<int>();
                m.dataset_name = j.at("dataset_name").get<std::string>();
                m.media_root = j.at("media_root").get<std::string>();
            } catch (const json::exception&) {
                throw ParseError("line 1: malformed manifest header: " + fragment_of(line));
            }
            if (m.schema_version != kManifestSchemaVersion) {
                throw ParseError("unsupported manifest schema_version " +
                                 std::to_string(m.schema_version) + ", expected " +
                                 std::to_string(kManifestSchemaVersion));
            }
            continue;
        }

        MediaSample sample;
        try {
            sample = j.get<MediaSample>();
        } catch (const json::out_of_range& e) {
            // nlohmann reports "key 'X' not found"; surface the field name.
            std::string what = e.what();
            std::string field;
            auto a = what.find('\'');
            auto b = what.rfind('\'');
            if (a != std::string::npos && b > a) field = what.substr(a + 1, b - a - 1);
            throw ParseError("line " + std::to_string(line_no) + ": missing field " + field);
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what() + ": " +
                             fragment_of(line));
        }

        auto violations = validate_sample(sample);
        if (!violations.empty()) {
            std::ostringstream oss;
            oss << "line " << line_no << ": sample '" << sample.id << "' invalid:";
            for (const auto& v : violations) oss << " " << v << ";";
            throw ParseError(oss.str());
        }
        if (!seen_ids.insert(sample.id).second) {
            throw ParseError("duplicate sample id '" + sample.id + "' at line " +
                             std::to_string(line_no));
        }
        m.samples.push_back(std::move(sample));
    }
    if (line_no == 0) throw ParseError("manifest is empty: " + path.string());
    return m;
}

MediaPayload resolve_media(const MediaSample& sample, const fs::path& media_root) {
    fs::path rel(sample.media_path);
    if (rel.is_absolute()) throw StateError("path traversal rejected: " + sample.media_path);
    for (const auto& part : rel) {
        if (part == "..") throw StateError("path traversal rejected: " + sample.media_path);
    }
    fs::path full = media_root / rel;
    std::ifstream in(full, std::ios::binary);
    if (!in) {
        throw StateError("media file not found: " + fs::absolute(full).string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return MediaPayload{buf.str(), sample.mime};
}

}  // namespace codeval
