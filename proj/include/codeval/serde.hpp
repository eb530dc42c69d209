// SPDX-License-Identifier: Apache-2.0
#pragma once

/// JSON encodings for the domain types. One object per JSONL line in
/// manifests and run logs; field names match the manifest schema.

#include <nlohmann/json.hpp>

#include "codeval/datamodel.hpp"

namespace codeval {

using json = nlohmann::json;

void to_json(json& j, const MediaSample& s);
void from_json(const json& j, MediaSample& s);

void to_json(json& j, const Strategy& s);
void from_json(const json& j, Strategy& s);

void to_json(json& j, const TokenUsage& u);
void from_json(const json& j, TokenUsage& u);

void to_json(json& j, const GenerationRecord& r);
void from_json(const json& j, GenerationRecord& r);

void to_json(json& j, const JudgeVerdict& v);
void from_json(const json& j, JudgeVerdict& v);

/// Current ISO-8601 UTC timestamp, e.g. "2025-03-04T12:00:00Z".
std::string now_iso8601();

}  // namespace codeval
