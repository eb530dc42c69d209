// SPDX-License-Identifier: Apache-2.0
#include "codeval/modelclient.hpp"

#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "codeval/errors.hpp"
#include "codeval/serde.hpp"

namespace fs = std::filesystem;

namespace codeval {

namespace {

using json = nlohmann::json;

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // leading path, no trailing slash
};

ParsedUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl p;
    if (path_start == std::string::npos) {
        p.origin = base_url;
    } else {
        p.origin = base_url.substr(0, path_start);
        p.path = base_url.substr(path_start);
        while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
    }
    return p;
}

// Audio format string for the wire, derived from the MIME type.
std::string audio_format_from_mime(const std::string& mime) {
    auto slash = mime.find('/');
    std::string sub = slash == std::string::npos ? mime : mime.substr(slash + 1);
    if (sub == "mpeg") return "mp3";
    if (sub == "x-wav") return "wav";
    return sub;
}

json content_part_to_wire(const ContentPart& part) {
    switch (part.kind) {
        case ContentPart::Kind::text:
            return json{{"type", "text"}, {"text", part.text}};
        case ContentPart::Kind::image:
            return json{{"type", "image_url"},
                        {"image_url",
                         {{"url", "data:" + part.mime + ";base64," + base64_encode(part.data)}}}};
        case ContentPart::Kind::audio:
            return json{{"type", "input_audio"},
                        {"input_audio",
                         {{"data", base64_encode(part.data)},
                          {"format", audio_format_from_mime(part.mime)}}}};
    }
    throw StateError("unreachable content part kind");
}

std::chrono::milliseconds backoff_delay(int attempt, int base_ms) {
    thread_local std::mt19937 rng{std::random_device{}()};
    double delay = static_cast<double>(base_ms) * std::pow(2.0, attempt);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    return std::chrono::milliseconds(static_cast<long>(delay * jitter(rng)));
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string base64_encode(const std::string& data) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back(tbl[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

EndpointConfig load_endpoint_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open endpoint config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid endpoint config " + path.string() + ": " + e.what());
    }
    EndpointConfig c;
    try {
        c.base_url = j.at("base_url").get<std::string>();
        c.model_id = j.at("model_id").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError("endpoint config " + path.string() + ": " + e.what());
    }
    c.api_key_env_name = j.value("api_key_env_name", std::string{});
    c.temperature = j.value("temperature", 0.0);
    c.max_output_tokens = j.value("max_output_tokens", 1024);
    c.request_timeout_seconds = j.value("request_timeout_seconds", 120);
    c.max_retries = j.value("max_retries", 3);
    c.max_in_flight = j.value("max_in_flight", 4);
    c.retry_base_delay_ms = j.value("retry_base_delay_ms", 1000);
    if (c.max_retries < 0 || c.max_in_flight < 1 || c.temperature < 0.0) {
        throw ConfigError("endpoint config " + path.string() +
                          ": max_retries >= 0, max_in_flight >= 1, temperature >= 0 required");
    }
    return c;
}

std::string cache_key(const EndpointConfig& config, const std::vector<ChatMessage>& messages,
                      const std::string& nonce) {
    // Canonical form: nlohmann keeps object keys sorted, so dump() is stable.
    json canon;
    canon["model_id"] = config.model_id;
    canon["temperature"] = config.temperature;
    canon["max_output_tokens"] = config.max_output_tokens;
    json msgs = json::array();
    for (const auto& m : messages) {
        json parts = json::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::text) {
                parts.push_back(json{{"kind", "text"}, {"text", p.text}});
            } else {
                parts.push_back(json{{"kind", p.kind == ContentPart::Kind::image ? "image" : "audio"},
                                     {"mime", p.mime},
                                     {"sha256", sha256_hex(p.data)}});
            }
        }
        msgs.push_back(json{{"role", to_string(m.role)}, {"parts", parts}});
    }
    canon["messages"] = msgs;
    if (!nonce.empty()) canon["nonce"] = nonce;
    return sha256_hex(canon.dump());
}

json build_request_body(const EndpointConfig& config, const std::vector<ChatMessage>& messages) {
    json body;
    body["model"] = config.model_id;
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_output_tokens;
    json msgs = json::array();
    for (const auto& m : messages) {
        json content = json::array();
        for (const auto& p : m.parts) content.push_back(content_part_to_wire(p));
        msgs.push_back(json{{"role", to_string(m.role)}, {"content", content}});
    }
    body["messages"] = msgs;
    return body;
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".json"));
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        return std::nullopt;  // partial write from a crashed process; treat as miss
    }
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    if (j.contains("usage") && !j["usage"].is_null()) r.usage = j["usage"].get<TokenUsage>();
    r.from_cache = true;
    return r;
}

void ResponseCache::put(const std::string& key, const ChatResponse& response) const {
    json j;
    j["text"] = response.text;
    if (response.usage) j["usage"] = *response.usage;

    fs::path final_path = dir_ / (key + ".json");
    if (fs::exists(final_path)) return;  // write-once
    fs::path tmp = dir_ / (key + "." + std::to_string(::getpid()) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump();
    }
    // link() fails if the key already exists, preserving write-once under
    // concurrent writers; the temp file is always removed.
    if (::link(tmp.c_str(), final_path.c_str()) != 0 && errno != EEXIST) {
        fs::remove(tmp);
        throw StateError("cache write failed for key " + key);
    }
    fs::remove(tmp);
}

// Counting gate with a runtime bound (std::counting_semaphore wants a
// compile-time ceiling).
struct ChatClient::Gate {
    explicit Gate(int limit) : available(limit) {}
    std::mutex mu;
    std::condition_variable cv;
    int available;

    void acquire() {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return available > 0; });
        --available;
    }
    void release() {
        {
            std::lock_guard lk(mu);
            ++available;
        }
        cv.notify_one();
    }
};

ChatClient::ChatClient(EndpointConfig config, const ResponseCache* cache)
    : config_(std::move(config)), cache_(cache), gate_(std::make_unique<Gate>(config_.max_in_flight)) {}

ChatClient::~ChatClient() = default;

ChatResponse ChatClient::send_chat(const std::vector<ChatMessage>& messages,
                                   const std::string& nonce) {
    const std::string key = cache_key(config_, messages, nonce);
    if (cache_) {
        if (auto hit = cache_->get(key)) return *hit;
    }

    // Resolve the API key before any network activity.
    std::string api_key;
    if (!config_.api_key_env_name.empty()) {
        const char* v = std::getenv(config_.api_key_env_name.c_str());
        if (!v || !*v) {
            throw ConfigError("API key environment variable not set: " + config_.api_key_env_name);
        }
        api_key = v;
    }

    auto url = split_base_url(config_.base_url);
    const std::string body = build_request_body(config_, messages).dump();
    const std::string path = url.path + "/chat/completions";

    TransportError last_error("no attempt made", 0);
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff_delay(attempt - 1, config_.retry_base_delay_ms));
        }
        gate_->acquire();
        auto t0 = std::chrono::steady_clock::now();
        httplib::Client cli(url.origin);
        cli.set_connection_timeout(config_.request_timeout_seconds, 0);
        cli.set_read_timeout(config_.request_timeout_seconds, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = cli.Post(path, headers, body, "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
        gate_->release();

        if (!res) {
            last_error = TransportError(
                "transport failure talking to " + config_.base_url + ": " +
                    httplib::to_string(res.error()),
                0);
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = TransportError("endpoint returned HTTP " + std::to_string(res->status),
                                        res->status);
            continue;
        }
        if (res->status >= 400) {
            throw TransportError("permanent HTTP " + std::to_string(res->status) + " from " +
                                     config_.base_url + ": " + res->body,
                                 res->status);
        }

        json j;
        try {
            j = json::parse(res->body);
        } catch (const json::exception& e) {
            throw ParseError(std::string("unparsable chat completion response: ") + e.what());
        }
        ChatResponse out;
        try {
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("chat completion missing message content: ") + e.what());
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            TokenUsage u;
            u.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            u.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
            out.usage = u;
        }
        out.from_cache = false;
        out.endpoint_latency_ms = latency;
        if (cache_) cache_->put(key, out);
        return out;
    }
    throw TransportError("retries exhausted (" + std::to_string(config_.max_retries + 1) +
                             " attempts): " + last_error.what(),
                         last_error.http_status);
}

}  // namespace codeval
