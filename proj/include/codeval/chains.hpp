// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * The three prompting strategies, executed as conversations:
 *
 *   standard      — media + question in one request.
 *   cod           — describe the media first, then ask the question in
 *                   the same conversation (two sequential calls).
 *   cod_transfer  — like cod, but the description turn is replayed
 *                   verbatim from another run (one call).
 */

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "codeval/datamodel.hpp"
#include "codeval/ingest.hpp"
#include "codeval/modelclient.hpp"

namespace codeval {

struct PromptTemplates {
    std::string describe_audio =
        "Please describe the audio in detail, including the spoken content, each "
        "speaker's tone and emotion, and any background sounds or music.";
    std::string describe_image =
        "Please describe the image in detail, including objects, scene, colors, "
        "text, and spatial relationships.";
    std::optional<std::string> answer_preamble;
    // Per-dataset overrides keyed by (dataset_name, "audio"|"image").
    std::map<std::pair<std::string, std::string>, std::string> overrides;

    const std::string& describe_for(Modality m, const std::string& dataset_name) const;
};

/// Loads template overrides from a JSON config file; missing file keeps defaults.
PromptTemplates load_templates(const std::filesystem::path& path);

/// Question text as sent to the model: verbatim for open QA; for MCQ the
/// question, a blank line, one "<letter>. <text>" line per option, then a
/// fixed answer instruction line.
std::string render_question(const MediaSample& sample);

inline constexpr const char* kMcqInstruction =
    "Answer with the option's letter from the given choices directly.";

/// Looks up a previously generated description by sample id (cod_transfer).
using DescriptionLookup =
    std::function<std::optional<std::string>(const std::string& sample_id)>;

class ChainRunner {
public:
    ChainRunner(ChatClient& client, const PromptTemplates& templates, std::string dataset_name,
                std::filesystem::path media_root);

    GenerationRecord run_standard(const MediaSample& sample);
    GenerationRecord run_cod(const MediaSample& sample);
    GenerationRecord run_cod_transfer(const MediaSample& sample, const std::string& source_run,
                                      const DescriptionLookup& lookup);

    GenerationRecord run(const MediaSample& sample, const Strategy& strategy,
                         const DescriptionLookup& lookup);

private:
    ChatMessage media_message(const MediaSample& sample, const std::string& text);

    ChatClient& client_;
    PromptTemplates templates_;
    std::string dataset_name_;
    std::filesystem::path media_root_;
};

}  // namespace codeval
