// SPDX-License-Identifier: Apache-2.0
#include "codeval/chains.hpp"

#include <fstream>

#include "codeval/errors.hpp"
#include "codeval/serde.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

std::string one_line(const std::string& text) {
    std::string out = text;
    for (auto& c : out) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace

const std::string& PromptTemplates::describe_for(Modality m, const std::string& dataset_name) const {
    auto it = overrides.find({dataset_name, to_string(m)});
    if (it != overrides.end()) return it->second;
    return m == Modality::audio ? describe_audio : describe_image;
}

PromptTemplates load_templates(const fs::path& path) {
    PromptTemplates t;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open template config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid template config " + path.string() + ": " + e.what());
    }
    if (j.contains("describe_audio")) t.describe_audio = j["describe_audio"].get<std::string>();
    if (j.contains("describe_image")) t.describe_image = j["describe_image"].get<std::string>();
    if (j.contains("answer_preamble")) t.answer_preamble = j["answer_preamble"].get<std::string>();
    if (j.contains("overrides")) {
        // {"<dataset>": {"audio": "...", "image": "..."}}
        for (auto& [dataset, by_modality] : j["overrides"].items()) {
            for (auto& [modality, tmpl] : by_modality.items()) {
                if (modality != "audio" && modality != "image") {
                    throw ConfigError("template override modality must be audio or image, got " +
                                      modality);
                }
                t.overrides[{dataset, modality}] = tmpl.get<std::string>();
            }
        }
    }
    if (t.describe_audio.empty() || t.describe_image.empty()) {
        throw ConfigError("describe templates must be nonempty");
    }
    return t;
}

std::string render_question(const MediaSample& sample) {
    if (!sample.options) return sample.question;
    std::string out = sample.question;
    out += "\n\n";
    for (const auto& [letter, text] : *sample.options) {
        out += letter;
        out += ". ";
        out += one_line(text);
        out += "\n";
    }
    out += kMcqInstruction;
    return out;
}

ChainRunner::ChainRunner(ChatClient& client, const PromptTemplates& templates,
                         std::string dataset_name, fs::path media_root)
    : client_(client),
      templates_(templates),
      dataset_name_(std::move(dataset_name)),
      media_root_(std::move(media_root)) {}

ChatMessage ChainRunner::media_message(const MediaSample& sample, const std::string& text) {
    MediaPayload payload = resolve_media(sample, media_root_);
    ChatMessage m;
    m.role = Role::user;
    m.parts.push_back(ContentPart::make_media(
        sample.modality == Modality::audio ? ContentPart::Kind::audio : ContentPart::Kind::image,
        std::move(payload.bytes), payload.mime));
    m.parts.push_back(ContentPart::make_text(text));
    return m;
}

GenerationRecord ChainRunner::run_standard(const MediaSample& sample) {
    std::vector<ChatMessage> messages;
    std::string question = render_question(sample);
    if (templates_.answer_preamble) question = *templates_.answer_preamble + "\n" + question;
    messages.push_back(media_message(sample, question));

    GenerationRecord rec;
    rec.sample_id = sample.id;
    rec.strategy.kind = StrategyKind::standard;
    rec.model_id = client_.config().model_id;
    rec.request_digests.push_back(cache_key(client_.config(), messages));
    try {
        ChatResponse resp = client_.send_chat(messages);
        rec.answer = resp.text;
        if (resp.usage) rec.usage.push_back(*resp.usage);
    } catch (const TransportError& e) {
        throw TransportError("sample " + sample.id + ": " + e.what(), e.http_status);
    }
    rec.created_at = now_iso8601();
    return rec;
}

GenerationRecord ChainRunner::run_cod(const MediaSample& sample) {
    GenerationRecord rec;
    rec.sample_id = sample.id;
    rec.strategy.kind = StrategyKind::cod;
    rec.model_id = client_.config().model_id;

    // Turn 1: describe the media.
    std::vector<ChatMessage> messages;
    messages.push_back(media_message(sample, templates_.describe_for(sample.modality, dataset_name_)));
    rec.request_digests.push_back(cache_key(client_.config(), messages));
    ChatResponse describe_resp;
    try {
        describe_resp = client_.send_chat(messages);
    } catch (const TransportError& e) {
        throw TransportError("sample " + sample.id + " (turn 1): " + e.what(), e.http_status);
    }
    if (describe_resp.text.empty()) {
        throw StateError("sample " + sample.id + ": empty description");
    }
    rec.description = describe_resp.text;
    if (describe_resp.usage) rec.usage.push_back(*describe_resp.usage);

    // Turn 2: the question, with the full conversation carried over.
    messages.push_back(ChatMessage::text(Role::assistant, describe_resp.text));
    std::string question = render_question(sample);
    if (templates_.answer_preamble) question = *templates_.answer_preamble + "\n" + question;
    messages.push_back(ChatMessage::text(Role::user, question));
    rec.request_digests.push_back(cache_key(client_.config(), messages));
    try {
        ChatResponse answer_resp = client_.send_chat(messages);
        rec.answer = answer_resp.text;
        if (answer_resp.usage) rec.usage.push_back(*answer_resp.usage);
    } catch (const TransportError& e) {
        throw TransportError("sample " + sample.id + " (turn 2): " + e.what(), e.http_status);
    }
    rec.created_at = now_iso8601();
    return rec;
}

GenerationRecord ChainRunner::run_cod_transfer(const MediaSample& sample,
                                               const std::string& source_run,
                                               const DescriptionLookup& lookup) {
    auto description = lookup(sample.id);
    if (!description) {
        throw StateError("missing source record for sample " + sample.id + " in run " + source_run);
    }
    if (description->empty()) {
        throw StateError("source record for sample " + sample.id + " in run " + source_run +
                         " has an empty description");
    }

    // Synthesize the conversation as if the describe turn had happened,
    // with the transferred description verbatim as the assistant reply.
    std::vector<ChatMessage> messages;
    messages.push_back(media_message(sample, templates_.describe_for(sample.modality, dataset_name_)));
    messages.push_back(ChatMessage::text(Role::assistant, *description));
    std::string question = render_question(sample);
    if (templates_.answer_preamble) question = *templates_.answer_preamble + "\n" + question;
    messages.push_back(ChatMessage::text(Role::user, question));

    GenerationRecord rec;
    rec.sample_id = sample.id;
    rec.strategy.kind = StrategyKind::cod_transfer;
    rec.strategy.description_source_run = source_run;
    rec.description = *description;
    rec.model_id = client_.config().model_id;
    rec.request_digests.push_back(cache_key(client_.config(), messages));
    try {
        ChatResponse resp = client_.send_chat(messages);
        rec.answer = resp.text;
        if (resp.usage) rec.usage.push_back(*resp.usage);
    } catch (const TransportError& e) {
        throw TransportError("sample " + sample.id + ": " + e.what(), e.http_status);
    }
    rec.created_at = now_iso8601();
    return rec;
}

GenerationRecord ChainRunner::run(const MediaSample& sample, const Strategy& strategy,
                                  const DescriptionLookup& lookup) {
    switch (strategy.kind) {
        case StrategyKind::standard:
            return run_standard(sample);
        case StrategyKind::cod:
            return run_cod(sample);
        case StrategyKind::cod_transfer:
            if (!strategy.description_source_run) {
                throw ConfigError("cod_transfer requires a source run");
            }
            return run_cod_transfer(sample, *strategy.description_source_run, lookup);
    }
    throw StateError("unreachable strategy kind");
}

}  // namespace codeval
