#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"

#include "docflow/diff_engine.hpp"
#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"

namespace docflow {

// HTTP JSON chat-completion client (OpenAI-compatible wire shape). All
// model-backed strategies and the model-assisted judge go through this one
// class so token accounting has a single source of truth.

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;
};

struct ChatResult {
    std::string content;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
};

struct ModelConfig {
    std::string endpoint;            // base URL, optionally with a custom path
    std::string api_key;             // sent as a bearer token when non-empty
    std::string model_name = "desk-chat";
    double temperature = 0.1;
    int timeout_secs = 60;

    static ModelConfig from_env() {
        ModelConfig cfg;
        if (const char* e = std::getenv("DOCFLOW_LLM_ENDPOINT")) cfg.endpoint = e;
        if (const char* k = std::getenv("DOCFLOW_LLM_KEY")) cfg.api_key = k;
        if (const char* m = std::getenv("DOCFLOW_LLM_MODEL")) cfg.model_name = m;
        return cfg;
    }
};

namespace detail {

// Split "http://host:port/some/path" into base URL and path. A bare base URL
// gets the standard chat-completions path.
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const std::string kDefaultPath = "/v1/chat/completions";
    std::size_t scheme = endpoint.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    std::size_t slash = endpoint.find('/', host_start);
    if (slash == std::string::npos) return {endpoint, kDefaultPath};
    std::string base = endpoint.substr(0, slash);
    std::string path = endpoint.substr(slash);
    if (path == "/") path = kDefaultPath;
    return {base, path};
}

inline std::uint64_t approx_tokens(std::string_view text) {
    return static_cast<std::uint64_t>(text.size() / 4 + 1);
}

} // namespace detail

class LanguageModelClient {
public:
    explicit LanguageModelClient(ModelConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endpoint.empty())
            throw ModelUnavailable("no model endpoint configured (set DOCFLOW_LLM_ENDPOINT)");
    }

    const ModelConfig& config() const { return cfg_; }

    ChatResult chat(const std::vector<ChatMessage>& messages) const {
        json req{{"model", cfg_.model_name},
                 {"temperature", cfg_.temperature},
                 {"messages", json::array()}};
        for (const ChatMessage& m : messages)
            req["messages"].push_back(json{{"role", m.role}, {"content", m.content}});
        const std::string body = req.dump();

        auto [base, path] = detail::split_endpoint(cfg_.endpoint);
        httplib::Client cli(base);
        cli.set_connection_timeout(cfg_.timeout_secs, 0);
        cli.set_read_timeout(cfg_.timeout_secs, 0);
        cli.set_write_timeout(cfg_.timeout_secs, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + cfg_.api_key);

        httplib::Result res = cli.Post(path, headers, body, "application/json");
        if (!res)
            throw ModelUnavailable("model request failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw ModelUnavailable("model endpoint returned status " +
                                   std::to_string(res->status));

        json rj;
        try {
            rj = json::parse(res->body);
        } catch (const json::exception&) {
            throw MalformedModelOutput("model response is not valid JSON");
        }
        if (!rj.is_object() || !rj.contains("choices") || !rj.at("choices").is_array() ||
            rj.at("choices").empty())
            throw MalformedModelOutput("model response has no choices");
        const json& first = rj.at("choices").at(0);
        if (!first.contains("message") || !first.at("message").contains("content") ||
            !first.at("message").at("content").is_string())
            throw MalformedModelOutput("model response choice has no message content");

        ChatResult out;
        out.content = first.at("message").at("content").get<std::string>();
        if (rj.contains("usage") && rj.at("usage").is_object()) {
            const json& u = rj.at("usage");
            out.prompt_tokens = u.value("prompt_tokens", std::uint64_t{0});
            out.completion_tokens = u.value("completion_tokens", std::uint64_t{0});
        }
        if (out.prompt_tokens == 0) out.prompt_tokens = detail::approx_tokens(body);
        if (out.completion_tokens == 0)
            out.completion_tokens = detail::approx_tokens(out.content);

        prompt_tokens_.fetch_add(out.prompt_tokens, std::memory_order_relaxed);
        completion_tokens_.fetch_add(out.completion_tokens, std::memory_order_relaxed);
        requests_.fetch_add(1, std::memory_order_relaxed);
        return out;
    }

    std::uint64_t prompt_tokens() const { return prompt_tokens_.load(std::memory_order_relaxed); }
    std::uint64_t completion_tokens() const {
        return completion_tokens_.load(std::memory_order_relaxed);
    }
    std::uint64_t total_tokens() const { return prompt_tokens() + completion_tokens(); }
    std::uint64_t request_count() const { return requests_.load(std::memory_order_relaxed); }

private:
    ModelConfig cfg_;
    mutable std::atomic<std::uint64_t> prompt_tokens_{0};
    mutable std::atomic<std::uint64_t> completion_tokens_{0};
    mutable std::atomic<std::uint64_t> requests_{0};
};

enum class SummaryMode { Deterministic, ModelAssisted };

// Model-assisted compression of the deterministic change summary; the
// deterministic rendering itself lives next to the delta type.
inline std::string summarize_delta(const StateDelta& delta, SummaryMode mode,
                                   const LanguageModelClient* model = nullptr) {
    std::string det = summarize_delta(delta);
    if (mode == SummaryMode::Deterministic) return det;
    if (model == nullptr)
        throw ModelUnavailable("model-assisted summary requested without a client");
    ChatResult r = model->chat(
        {{"system", "You compress document change logs. Reply with one short plain-text "
                    "sentence, no markup."},
         {"user", "Summarize these document changes:\n" + det}});
    return r.content;
}

} // namespace docflow
