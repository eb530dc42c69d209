// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared test scaffolding: a scripted OpenAI-compatible mock endpoint
// with request counters, temp directories, and sample builders.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "codeval/datamodel.hpp"
#include "codeval/ingest.hpp"
#include "codeval/modelclient.hpp"
#include "codeval/serde.hpp"

namespace codeval::testing {

using json = nlohmann::json;

struct RecordedRequest {
    json body;
    std::string auth_header;
};

/// In-process chat-completions endpoint. The reply function sees the
/// parsed request body and the 0-based request ordinal and returns the
/// assistant text; completion token usage is reported as the whitespace
/// token count unless overridden.
class MockEndpoint {
public:
    using Reply = std::function<std::string(const json& body, int ordinal)>;

    explicit MockEndpoint(Reply reply) : reply_(std::move(reply)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            int concurrent = ++in_flight_;
            int peak = peak_in_flight_.load();
            while (concurrent > peak && !peak_in_flight_.compare_exchange_weak(peak, concurrent)) {
            }
            int ordinal = request_count_.fetch_add(1);
            json body = json::parse(req.body);
            {
                std::lock_guard lk(mu_);
                requests_.push_back({body, req.get_header_value("Authorization")});
            }
            int status = 200;
            {
                std::lock_guard lk(mu_);
                if (!status_script_.empty()) {
                    status = status_script_.front();
                    status_script_.erase(status_script_.begin());
                }
            }
            if (status != 200) {
                res.status = status;
                res.set_content("scripted failure", "text/plain");
            } else {
                std::string text = reply_(body, ordinal);
                json out = {
                    {"choices", json::array({json{{"message", {{"role", "assistant"},
                                                                {"content", text}}}}})},
                    {"usage",
                     {{"prompt_tokens", 7},
                      {"completion_tokens", whitespace_tokens(text)}}}};
                res.set_content(out.dump(), "application/json");
            }
            --in_flight_;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int request_count() const { return request_count_.load(); }
    int peak_in_flight() const { return peak_in_flight_.load(); }

    std::vector<RecordedRequest> requests() const {
        std::lock_guard lk(mu_);
        return requests_;
    }

    /// Next responses use these HTTP statuses (200 = scripted success).
    void script_statuses(std::vector<int> statuses) {
        std::lock_guard lk(mu_);
        status_script_ = std::move(statuses);
    }

    EndpointConfig config(const std::string& model_id = "mock-model") const {
        EndpointConfig c;
        c.base_url = base_url();
        c.model_id = model_id;
        c.max_retries = 3;
        c.max_in_flight = 8;
        c.retry_base_delay_ms = 10;  // keep retry tests fast
        return c;
    }

    static std::int64_t whitespace_tokens(const std::string& text) {
        std::int64_t n = 0;
        bool in_run = false;
        for (char c : text) {
            bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
            if (!ws && !in_run) ++n;
            in_run = !ws;
        }
        return n;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    Reply reply_;
    std::atomic<int> request_count_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_in_flight_{0};
    mutable std::mutex mu_;
    std::vector<RecordedRequest> requests_;
    std::vector<int> status_script_;
};

/// Self-deleting temp directory.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng{std::random_device{}()};
        path_ = base / ("codeval_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline MediaSample make_audio_sample(const std::string& id, const std::string& category = "speech",
                                     double duration = 10.0) {
    MediaSample s;
    s.id = id;
    s.modality = Modality::audio;
    s.media_path = id + ".wav";
    s.mime = "audio/wav";
    s.category = category;
    s.duration_seconds = duration;
    s.question = "What is happening in the audio?";
    s.ground_truth_answer = "Two people are talking.";
    s.judge_context = "Two speakers discuss the weather.";
    return s;
}

inline MediaSample make_mcq_sample(const std::string& id, Difficulty difficulty, char ground_truth,
                                   int n_options = 10) {
    MediaSample s;
    s.id = id;
    s.modality = Modality::image;
    s.media_path = id + ".png";
    s.mime = "image/png";
    s.category = "science";
    s.difficulty = difficulty;
    s.question = "What is shown in the image?";
    std::vector<std::pair<char, std::string>> options;
    for (int i = 0; i < n_options; ++i) {
        options.emplace_back(static_cast<char>('A' + i), "option text " + std::to_string(i));
    }
    s.options = options;
    s.ground_truth_answer = std::string(1, ground_truth);
    return s;
}

/// Writes the sample's media file under root so resolve_media succeeds.
inline void write_media(const std::filesystem::path& root, const MediaSample& s,
                        const std::string& bytes = "\x00\x01media-bytes") {
    std::filesystem::create_directories(root);
    std::ofstream out(root / s.media_path, std::ios::binary);
    out << bytes;
}

inline void write_manifest(const std::filesystem::path& path, const std::string& dataset_name,
                           const std::filesystem::path& media_root,
                           const std::vector<MediaSample>& samples) {
    std::ofstream out(path, std::ios::trunc);
    out << json{{"schema_version", 1},
                {"dataset_name", dataset_name},
                {"media_root", media_root.string()}}
               .dump()
        << "\n";
    for (const auto& s : samples) out << json(s).dump() << "\n";
}

}  // namespace codeval::testing
