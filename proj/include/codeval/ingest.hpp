// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * Benchmark manifest loading and media resolution.
 *
 * A manifest is a UTF-8 JSONL file: one header line carrying
 * schema_version / dataset_name / media_root, then one MediaSample
 * object per line. Sample order in the file is preserved.
 */

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "codeval/datamodel.hpp"

namespace codeval {

inline constexpr int kManifestSchemaVersion = 1;

struct Manifest {
    int schema_version = kManifestSchemaVersion;
    std::string dataset_name;
    std::filesystem::path media_root;
    std::vector<MediaSample> samples;

    /// Index by sample id. Ids are unique by the load contract.
    std::unordered_map<std::string, const MediaSample*> index() const;
};

struct MediaPayload {
    std::string bytes;
    std::string mime;
};

/// Loads and fully validates a manifest. Errors carry the 1-based line
/// number and the offending fragment.
Manifest load_manifest(const std::filesystem::path& path);

/// Reads the sample's media file from under media_root. Rejects paths
/// that escape the root.
MediaPayload resolve_media(const MediaSample& sample, const std::filesystem::path& media_root);

}  // namespace codeval
