#pragma once

// HTTP bridge to an OpenAI-style chat completion endpoint. Turns the context
// window into a chat transcript, posts it, and hands the completion text back
// as the policy output. Connection failures and 5xx responses are retried
// with linear backoff; anything else fails fast.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "memex/errors.hpp"
#include "memex/kernel.hpp"
#include "memex/message.hpp"

namespace memex {

struct GatewayConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::string model = "memex-agent";
    std::string auth_env = "MEMEX_API_TOKEN";  // env var holding the bearer token
    int timeout_ms = 30'000;
    int max_retries = 2;   // retries after the first attempt
    int backoff_ms = 100;  // sleep backoff_ms * attempt between retries
    double temperature = 0.0;
};

inline constexpr const char* kCompletionsPath = "/v1/chat/completions";

// Window → chat transcript. Tool results and retrieved blocks arrive as user
// turns with an Observation prefix; status lines go through verbatim since
// they are already self-describing.
inline nlohmann::json window_to_chat(const ContextWindow& window) {
    nlohmann::json messages = nlohmann::json::array();
    for (const Message& m : window.messages()) {
        std::string role;
        std::string content = m.payload;
        switch (m.kind) {
            case MessageKind::system_prompt: role = "system"; break;
            case MessageKind::task: role = "user"; break;
            case MessageKind::thinking_and_call:
            case MessageKind::indexed_summary: role = "assistant"; break;
            case MessageKind::tool_output:
            case MessageKind::retrieved_block:
                role = "user";
                content = "Observation: " + content;
                break;
            case MessageKind::context_status: role = "user"; break;
        }
        messages.push_back({{"role", role}, {"content", content}});
    }
    return messages;
}

inline nlohmann::json build_request(const GatewayConfig& cfg, const ContextWindow& window) {
    return nlohmann::json{{"model", cfg.model},
                          {"messages", window_to_chat(window)},
                          {"temperature", cfg.temperature}};
}

struct CompletionResult {
    std::string content;
    int attempts = 0;
};

inline CompletionResult complete_with_stats(const GatewayConfig& cfg,
                                            const ContextWindow& window) {
    if (cfg.endpoint.empty()) throw GatewayProtocolError("gateway endpoint is not configured");

    httplib::Client client(cfg.endpoint);
    auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (const char* token = std::getenv(cfg.auth_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    std::string body = build_request(cfg, window).dump();

    CompletionResult result;
    std::string last_failure;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms * attempt));
        ++result.attempts;
        httplib::Result res = client.Post(kCompletionsPath, headers, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;  // unreachable or timed out: worth retrying
        }
        if (res->status >= 500 && res->status < 600) {
            last_failure = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw GatewayProtocolError("gateway rejected request: HTTP " +
                                       std::to_string(res->status));
        nlohmann::json parsed =
            nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
            !parsed["choices"][0]["message"].contains("content") ||
            !parsed["choices"][0]["message"]["content"].is_string())
            throw GatewayProtocolError("gateway returned a malformed completion body");
        result.content = parsed["choices"][0]["message"]["content"].get<std::string>();
        return result;
    }
    throw GatewayTimeoutError("gateway gave no usable response after " +
                              std::to_string(result.attempts) + " attempts (" + last_failure +
                              ")");
}

inline std::string complete(const GatewayConfig& cfg, const ContextWindow& window) {
    return complete_with_stats(cfg, window).content;
}

inline Policy make_gateway_policy(GatewayConfig cfg) {
    return [cfg](const ContextWindow& window) { return complete(cfg, window); };
}

}  // namespace memex
