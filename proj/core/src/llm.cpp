#include "t2s/llm.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "t2s/rng.hpp"

namespace t2s::llm {

using nlohmann::json;

std::string request_key(const CompletionRequest& request) {
    uint64_t h = kFnvOffsetBasis;
    auto mix = [&h](std::string_view s) {
        h = fnv1a64(s, h);
        h = fnv1a64("\x1f", h);
    };
    mix(request.model_tag);
    mix(request.prompt);
    mix(std::to_string(request.max_tokens));
    {
        std::ostringstream t;
        t << request.temperature;
        mix(t.str());
    }
    for (const auto& s : request.stop) mix(s);
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

// ---------------------------------------------------------------------------
// MockCompletionClient
// ---------------------------------------------------------------------------

std::string MockCompletionClient::extract_question(const std::string& prompt) {
    static const std::string code_marker = "/* Answer the following: ";
    size_t pos = prompt.rfind(code_marker);
    if (pos != std::string::npos) {
        size_t begin = pos + code_marker.size();
        size_t end = prompt.find(" */", begin);
        if (end != std::string::npos) return prompt.substr(begin, end - begin);
    }
    static const std::string text_marker = "Answer the following: ";
    pos = prompt.rfind(text_marker);
    if (pos != std::string::npos) {
        size_t begin = pos + text_marker.size();
        size_t end = prompt.find('\n', begin);
        if (end == std::string::npos) end = prompt.size();
        return prompt.substr(begin, end - begin);
    }
    return {};
}

void MockCompletionClient::load_fixture_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock fixture file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mock fixture file: ") + e.what());
    }
    if (j.contains("by_question"))
        for (auto& [q, text] : j["by_question"].items())
            set_response_for_question(q, text.get<std::string>());
    if (j.contains("by_prompt"))
        for (auto& [p, text] : j["by_prompt"].items())
            set_response_for_prompt(p, text.get<std::string>());
    if (j.contains("default")) set_default_response(j["default"].get<std::string>());
    if (j.contains("context_limit")) set_context_limit(j["context_limit"].get<size_t>());
}

void MockCompletionClient::set_response_for_prompt(std::string prompt, std::string text) {
    by_prompt_[std::move(prompt)] = std::move(text);
}
void MockCompletionClient::set_response_for_question(std::string question, std::string text) {
    by_question_[std::move(question)] = std::move(text);
}
void MockCompletionClient::set_default_response(std::string text) {
    default_response_ = std::move(text);
    has_default_ = true;
}
void MockCompletionClient::set_responder(std::function<std::string(const CompletionRequest&)> fn) {
    responder_ = std::move(fn);
}

CompletionResponse MockCompletionClient::complete(const CompletionRequest& request) {
    calls_.fetch_add(1);
    std::string key = request_key(request);
    size_t prompt_tokens = estimate_tokens(request.prompt);
    if (prompt_tokens + size_t(request.max_tokens) > context_limit_)
        throw ContextOverflowError("mock context limit " + std::to_string(context_limit_) +
                                       " exceeded (" + std::to_string(prompt_tokens) +
                                       " prompt tokens + " + std::to_string(request.max_tokens) +
                                       " completion tokens)",
                                   key);

    CompletionResponse response;
    response.usage.prompt_tokens = prompt_tokens;
    if (auto it = by_prompt_.find(request.prompt); it != by_prompt_.end()) {
        response.text = it->second;
    } else if (auto q = extract_question(request.prompt); !q.empty() && by_question_.count(q)) {
        response.text = by_question_.at(q);
    } else if (responder_) {
        response.text = responder_(request);
    } else if (has_default_) {
        response.text = default_response_;
    } else {
        throw LlmError("mock has no response for prompt", key);
    }
    response.finish_reason = FinishReason::Stop;
    response.usage.completion_tokens = estimate_tokens(response.text);
    return response;
}

// ---------------------------------------------------------------------------
// HttpCompletionClient
// ---------------------------------------------------------------------------

class HttpCompletionClient::InflightGate {
public:
    explicit InflightGate(int limit) : limit_(std::max(1, limit)) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return inflight_ < limit_; });
        ++inflight_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            --inflight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int inflight_ = 0;
    int limit_;
};

HttpCompletionClient::HttpCompletionClient(HttpClientConfig config)
    : config_(std::move(config)),
      gate_(std::make_unique<InflightGate>(config_.max_inflight)) {}

HttpCompletionClient::~HttpCompletionClient() = default;

CompletionResponse HttpCompletionClient::complete(const CompletionRequest& request) {
    gate_->acquire();
    struct Release {
        InflightGate* gate;
        ~Release() { gate->release(); }
    } release{gate_.get()};

    const std::string key = request_key(request);

    json body = {{"model", request.model_tag},
                 {"prompt", request.prompt},
                 {"max_tokens", request.max_tokens},
                 {"temperature", request.temperature}};
    if (!request.stop.empty()) body["stop"] = request.stop;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* api_key = std::getenv(config_.api_key_env.c_str());
        if (!api_key || !*api_key)
            throw AuthError("API key env var " + config_.api_key_env + " is not set", key);
        headers.emplace("Authorization", std::string("Bearer ") + api_key);
    }

    int attempt = 0;
    while (true) {
        httplib::Client cli(config_.base_url);
        cli.set_connection_timeout(config_.timeout_seconds, 0);
        cli.set_read_timeout(config_.timeout_seconds, 0);
        auto res = cli.Post(config_.path, headers, payload, "application/json");

        bool retryable = false;
        std::string error;
        if (!res) {
            error = "transport error: " + httplib::to_string(res.error());
            retryable = true;
        } else if (res->status == 401 || res->status == 403) {
            throw AuthError("authentication rejected (" + std::to_string(res->status) + ")", key);
        } else if (res->status == 429 || res->status >= 500) {
            error = "HTTP " + std::to_string(res->status);
            retryable = true;
        } else if (res->status != 200) {
            throw LlmError("HTTP " + std::to_string(res->status) + ": " + res->body, key);
        } else {
            json reply;
            try {
                reply = json::parse(res->body);
            } catch (const json::exception& e) {
                throw LlmError(std::string("bad JSON response: ") + e.what(), key);
            }
            CompletionResponse out;
            try {
                const json& choice = reply.at("choices").at(0);
                if (choice.contains("text"))
                    out.text = choice["text"].get<std::string>();
                else
                    out.text = choice.at("message").at("content").get<std::string>();
                std::string reason = choice.value("finish_reason", "stop");
                out.finish_reason =
                    reason == "length" ? FinishReason::Length : FinishReason::Stop;
                if (reply.contains("usage")) {
                    out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
                    out.usage.completion_tokens = reply["usage"].value("completion_tokens", 0);
                }
            } catch (const json::exception& e) {
                throw LlmError(std::string("unexpected response shape: ") + e.what(), key);
            }
            return out;
        }

        if (retryable) {
            if (attempt >= config_.max_retries) {
                if (res && res->status == 429)
                    throw RateLimitExhausted("rate limited after " +
                                                 std::to_string(attempt) + " retries",
                                             key);
                if (!res && res.error() == httplib::Error::Read)
                    throw TimeoutError("request timed out after retries", key);
                throw LlmError("request failed after " + std::to_string(attempt) +
                                   " retries: " + error,
                               key);
            }
            int delay_ms = config_.base_delay_ms * (1 << attempt);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            ++attempt;
        }
    }
}

// ---------------------------------------------------------------------------
// CachingCompletionClient
// ---------------------------------------------------------------------------

namespace {

json response_to_json(const CompletionResponse& response) {
    return {{"text", response.text},
            {"finish_reason", response.finish_reason == FinishReason::Length ? "length" : "stop"},
            {"prompt_tokens", response.usage.prompt_tokens},
            {"completion_tokens", response.usage.completion_tokens}};
}

CompletionResponse response_from_json(const json& j) {
    CompletionResponse response;
    response.text = j.value("text", "");
    response.finish_reason =
        j.value("finish_reason", "stop") == "length" ? FinishReason::Length : FinishReason::Stop;
    response.usage.prompt_tokens = j.value("prompt_tokens", 0);
    response.usage.completion_tokens = j.value("completion_tokens", 0);
    return response;
}

}  // namespace

CachingCompletionClient::CachingCompletionClient(CompletionClient& inner, std::string cache_path)
    : inner_(inner), cache_path_(std::move(cache_path)) {
    std::ifstream in(cache_path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception&) {
            continue;  // torn or corrupt record; later writes win
        }
        if (!record.contains("key") || !record.contains("response")) continue;
        entries_[record["key"].get<std::string>()] = response_from_json(record["response"]);
    }
}

size_t CachingCompletionClient::entry_count() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

CompletionResponse CachingCompletionClient::complete(const CompletionRequest& request) {
    const std::string key = request_key(request);
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            hits_.fetch_add(1);
            CompletionResponse response = it->second;
            response.cached = true;
            return response;
        }
    }
    CompletionResponse response = inner_.complete(request);
    response.cached = false;
    {
        std::lock_guard lock(mutex_);
        entries_[key] = response;
        append_record(key, request, response);
    }
    return response;
}

void CachingCompletionClient::append_record(const std::string& key,
                                            const CompletionRequest& request,
                                            const CompletionResponse& response) {
    json record = {{"key", key},
                   {"request",
                    {{"model", request.model_tag},
                     {"prompt", request.prompt},
                     {"max_tokens", request.max_tokens},
                     {"temperature", request.temperature},
                     {"stop", request.stop}}},
                   {"response", response_to_json(response)},
                   {"ts", std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count()}};
    std::string line = record.dump() + "\n";

    int fd = ::open(cache_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw LlmError("cannot open cache file " + cache_path_, key);
    ::flock(fd, LOCK_EX);
    ssize_t written = ::write(fd, line.data(), line.size());
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (written != ssize_t(line.size()))
        throw LlmError("short write to cache file " + cache_path_, key);
}

}  // namespace t2s::llm
