// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * OpenAI-compatible chat-completions client: multi-modal content parts,
 * retries with exponential backoff, a max-in-flight gate, and a
 * content-addressed response cache shared across runs.
 */

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codeval/datamodel.hpp"

namespace codeval {

struct EndpointConfig {
    std::string base_url;
    std::string api_key_env_name;  // empty means the endpoint needs no auth
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int request_timeout_seconds = 120;
    int max_retries = 3;
    int max_in_flight = 4;
    int retry_base_delay_ms = 1000;  // backoff base, doubled per attempt, jitter +-20%
};

EndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct ChatResponse {
    std::string text;
    std::optional<TokenUsage> usage;
    bool from_cache = false;
    std::optional<long> endpoint_latency_ms;
};

/// Stable hex digest over model_id, temperature, max_output_tokens, and the
/// full message list (media bytes enter as their own digests). Timing and
/// network fields are excluded. A nonempty nonce yields a distinct key.
std::string cache_key(const EndpointConfig& config, const std::vector<ChatMessage>& messages,
                      const std::string& nonce = "");

/// OpenAI-compatible request body (content parts; media as base64).
nlohmann::json build_request_body(const EndpointConfig& config,
                                  const std::vector<ChatMessage>& messages);

/// SHA-256 hex digest.
std::string sha256_hex(const std::string& data);

std::string base64_encode(const std::string& data);

/// Directory-backed response cache, write-once per key, safe for
/// concurrent writers.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<ChatResponse> get(const std::string& key) const;

    /// First write wins; later puts for the same key are no-ops.
    void put(const std::string& key, const ChatResponse& response) const;

private:
    std::filesystem::path dir_;
};

class ChatClient {
public:
    /// cache may be null (no caching). The config's max_in_flight bounds
    /// concurrent outstanding requests through this client.
    ChatClient(EndpointConfig config, const ResponseCache* cache);
    ~ChatClient();

    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    /// Cache hit returns the stored response with from_cache=true and no
    /// network call. Retries transport errors and HTTP 429/5xx with
    /// exponential backoff up to max_retries; other 4xx are permanent.
    ChatResponse send_chat(const std::vector<ChatMessage>& messages,
                           const std::string& nonce = "");

    const EndpointConfig& config() const { return config_; }

private:
    ChatResponse perform_request(const std::vector<ChatMessage>& messages);

    EndpointConfig config_;
    const ResponseCache* cache_;
    struct Gate;
    std::unique_ptr<Gate> gate_;
};

}  // namespace codeval
