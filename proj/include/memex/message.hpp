#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "memex/tokens.hpp"

namespace memex {

enum class Role { system, user, assistant, tool, status };

enum class MessageKind {
    system_prompt,
    task,
    thinking_and_call,
    tool_output,
    retrieved_block,
    indexed_summary,
    context_status,
};

inline const char* to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
        default: return "status";
    }
}

inline const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::system_prompt: return "system_prompt";
        case MessageKind::task: return "task";
        case MessageKind::thinking_and_call: return "thinking_and_call";
        case MessageKind::tool_output: return "tool_output";
        case MessageKind::retrieved_block: return "retrieved_block";
        case MessageKind::indexed_summary: return "indexed_summary";
        default: return "context_status";
    }
}

struct Message {
    Role role;
    MessageKind kind;
    std::string payload;
    int token_count;

    static Message make(Role role, MessageKind kind, std::string payload) {
        int tokens = count_tokens(payload);
        return Message{role, kind, std::move(payload), tokens};
    }
};

// Conversation state M = [m0, u, ...]. The first two messages (system prompt
// and task) are a protected prefix: nothing may remove or rewrite them.
class ContextWindow {
public:
    ContextWindow(std::string system_prompt, std::string task) {
        messages_.push_back(Message::make(Role::system, MessageKind::system_prompt, std::move(system_prompt)));
        messages_.push_back(Message::make(Role::user, MessageKind::task, std::move(task)));
    }

    const std::vector<Message>& messages() const { return messages_; }
    size_t size() const { return messages_.size(); }
    const Message& at(size_t i) const { return messages_.at(i); }

    void append(Message m) {
        if (m.kind == MessageKind::system_prompt || m.kind == MessageKind::task)
            throw std::logic_error("append: protected prefix kinds cannot be appended");
        messages_.push_back(std::move(m));
    }

    void pop_back() {
        if (messages_.size() <= 2)
            throw std::logic_error("pop_back: protected prefix [m0, u] cannot be removed");
        messages_.pop_back();
    }

    // Compression rewrite: drop everything after the prefix, keep exactly
    // [m0, u, summary].
    void rewrite_working(Message summary) {
        if (summary.kind != MessageKind::indexed_summary)
            throw std::logic_error("rewrite_working: replacement must be an indexed summary");
        messages_.resize(2);
        messages_.push_back(std::move(summary));
    }

    // Tokens the policy actually has to carry: everything past the protected
    // prefix, excluding injected status lines.
    int working_tokens() const {
        int total = 0;
        for (size_t i = 2; i < messages_.size(); ++i)
            if (messages_[i].kind != MessageKind::context_status) total += messages_[i].token_count;
        return total;
    }

    long long total_tokens() const {
        long long total = 0;
        for (const auto& m : messages_) total += m.token_count;
        return total;
    }

private:
    std::vector<Message> messages_;
};

struct ContextStatusReport {
    int working = 0;
    long long total = 0;
    int threshold = 0;
    bool warning = false;
};

inline ContextStatusReport context_status_report(const ContextWindow& w, int tau) {
    ContextStatusReport r;
    r.working = w.working_tokens();
    r.total = w.total_tokens();
    r.threshold = tau;
    r.warning = r.working > tau;
    return r;
}

inline std::string render_context_status(const ContextStatusReport& r) {
    std::string s = "[Context Status: working context tokens=" + std::to_string(r.working) +
                    ", total tokens=" + std::to_string(r.total) +
                    ", threshold=" + std::to_string(r.threshold) + "]";
    if (r.warning) s += " WARNING: working > threshold";
    return s;
}

inline Message make_context_status(const ContextWindow& w, int tau) {
    return Message::make(Role::status, MessageKind::context_status,
                         render_context_status(context_status_report(w, tau)));
}

}  // namespace memex
