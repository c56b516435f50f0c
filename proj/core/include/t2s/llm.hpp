#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "t2s/errors.hpp"

namespace t2s::llm {

struct CompletionRequest {
    std::string model_tag;
    std::string prompt;
    int max_tokens = 256;
    double temperature = 0.0;
    std::vector<std::string> stop;
};

enum class FinishReason { Stop, Length, Error };

struct Usage {
    size_t prompt_tokens = 0;
    size_t completion_tokens = 0;
};

struct CompletionResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;
    Usage usage;
    bool cached = false;
};

/// Content hash of (model_tag, prompt, max_tokens, temperature, stop); the
/// cache key and request id.
std::string request_key(const CompletionRequest& request);

/// Rough token count used for context budgeting: ceil(chars / 4).
size_t estimate_tokens(std::string_view text);

class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// Offline stand-in for a real endpoint. Responses resolve in order: exact
/// prompt match, question extracted from the prompt's answer line, responder
/// callback, then the default text. Enforces a context window like the real
/// thing: estimated prompt tokens + max_tokens must fit context_limit.
class MockCompletionClient final : public CompletionClient {
public:
    MockCompletionClient() = default;

    /// Populate from a JSON fixture: {"by_question": {...}, "by_prompt": {...},
    /// "default": "...", "context_limit": 4096}.
    void load_fixture_file(const std::string& path);

    void set_response_for_prompt(std::string prompt, std::string text);
    void set_response_for_question(std::string question, std::string text);
    void set_default_response(std::string text);
    void set_responder(std::function<std::string(const CompletionRequest&)> fn);
    void set_context_limit(size_t tokens) { context_limit_ = tokens; }

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

    size_t call_count() const { return calls_.load(); }

    /// The question inside a rendered prompt's final answer line, or empty.
    static std::string extract_question(const std::string& prompt);

private:
    std::map<std::string, std::string> by_prompt_;
    std::map<std::string, std::string> by_question_;
    std::function<std::string(const CompletionRequest&)> responder_;
    std::string default_response_;
    bool has_default_ = false;
    size_t context_limit_ = 4096;
    std::atomic<size_t> calls_{0};
};

struct HttpClientConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/completions";
    std::string api_key_env = "T2S_API_KEY";  // env var holding the key; empty disables auth
    int max_retries = 5;                      // on 429 and 5xx
    int base_delay_ms = 2000;                 // exponential backoff base
    int timeout_seconds = 60;
    int max_inflight = 4;  // concurrent requests allowed through this client
};

/// Minimal completions-endpoint client (OpenAI-style JSON). Retries
/// rate-limit and server errors with exponential backoff; auth failures and
/// exhausted retries surface as typed errors carrying the request id. Shared
/// across workers; a bounded in-flight limit keeps request concurrency at
/// max_inflight.
class HttpCompletionClient final : public CompletionClient {
public:
    explicit HttpCompletionClient(HttpClientConfig config);
    ~HttpCompletionClient() override;
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "http:" + config_.base_url; }

private:
    class InflightGate;
    HttpClientConfig config_;
    std::unique_ptr<InflightGate> gate_;
};

/// Persistent response cache around any client. Records are append-only JSON
/// Lines {key, request, response, ts}; duplicate keys compact last-write-wins
/// on load. Appends are serialized in-process and flocked across processes;
/// a record is either fully written or not written at all.
class CachingCompletionClient final : public CompletionClient {
public:
    CachingCompletionClient(CompletionClient& inner, std::string cache_path);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return inner_.name() + "+cache"; }

    size_t hit_count() const { return hits_.load(); }
    size_t entry_count() const;

private:
    void append_record(const std::string& key, const CompletionRequest& request,
                       const CompletionResponse& response);

    CompletionClient& inner_;
    std::string cache_path_;
    mutable std::mutex mutex_;
    std::map<std::string, CompletionResponse> entries_;
    std::atomic<size_t> hits_{0};
};

}  // namespace t2s::llm
