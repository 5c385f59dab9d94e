#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace memex {

// One executed tool call, reduced to what the penalties need.
struct CallRecord {
    std::string signature;
    bool is_memory = false;  // compression/read: exempt from redundancy
    bool mutating = false;   // changed environment state
};

// Per-step formatting outcome.
struct StepFormat {
    bool attempted = false;  // assistant output contained at least one call region
    int malformed = 0;       // malformed regions in that output
};

// Token-budget overage, averaged over steps and capped at 1. Steps that ran a
// successful compression are exempt: their post-step count is the fresh
// summary, and penalizing the rescue would teach the wrong lesson.
inline double context_penalty(const std::vector<int>& c_per_step,
                              const std::vector<int>& compressed_steps, int tau) {
    if (c_per_step.empty() || tau <= 0) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < c_per_step.size(); ++i) {
        bool exempt = std::find(compressed_steps.begin(), compressed_steps.end(),
                                static_cast<int>(i)) != compressed_steps.end();
        if (exempt) continue;
        int over = c_per_step[i] - tau;
        if (over > 0) total += static_cast<double>(over);
    }
    double denom = static_cast<double>(tau) * static_cast<double>(c_per_step.size());
    return std::min(1.0, total / denom);
}

inline int count_redundant(const std::vector<CallRecord>& calls) {
    // redundant: same signature as an earlier non-memory call with no
    // state-modifying call in between; memory ops neither count nor reset
    int redundant = 0;
    std::vector<std::pair<std::string, long>> last_epoch;
    long epoch = 0;
    for (const auto& call : calls) {
        if (call.is_memory) continue;
        auto it = std::find_if(last_epoch.begin(), last_epoch.end(),
                               [&](const auto& p) { return p.first == call.signature; });
        if (it != last_epoch.end() && it->second == epoch) ++redundant;
        if (it != last_epoch.end())
            it->second = epoch;
        else
            last_epoch.emplace_back(call.signature, epoch);
        if (call.mutating) ++epoch;
    }
    return redundant;
}

inline int count_env_calls(const std::vector<CallRecord>& calls) {
    int n = 0;
    for (const auto& call : calls)
        if (!call.is_memory) ++n;
    return n;
}

inline double redundancy_penalty(const std::vector<CallRecord>& calls) {
    int denom = count_env_calls(calls);
    if (denom == 0) return 0.0;
    return static_cast<double>(count_redundant(calls)) / static_cast<double>(denom);
}

inline double format_penalty(const std::vector<StepFormat>& steps) {
    int attempts = 0, malformed = 0;
    for (const auto& s : steps) {
        if (s.attempted) ++attempts;
        malformed += s.malformed;
    }
    if (attempts == 0) return 0.0;
    return std::min(1.0, static_cast<double>(malformed) / static_cast<double>(attempts));
}

struct PenaltyBreakdown {
    int r_task = 0;
    double p_context = 0.0;
    double p_redundancy = 0.0;
    double p_format = 0.0;
    double r_total = 0.0;

    int steps = 0;
    int env_calls = 0;
    int attempt_steps = 0;
    int redundant_calls = 0;
    int malformed_regions = 0;
    std::vector<int> c_per_step;
    std::vector<int> compressed_steps;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"r_task", r_task},
            {"p_context", p_context},
            {"p_redundancy", p_redundancy},
            {"p_format", p_format},
            {"r_total", r_total},
            {"counters",
             {{"steps", steps},
              {"env_calls", env_calls},
              {"attempt_steps", attempt_steps},
              {"redundant_calls", redundant_calls},
              {"malformed_regions", malformed_regions}}},
            {"c_per_step", c_per_step},
            {"compressed_steps", compressed_steps},
        };
    }

    static PenaltyBreakdown from_json(const nlohmann::json& j) {
        PenaltyBreakdown b;
        b.r_task = j.at("r_task").get<int>();
        b.p_context = j.at("p_context").get<double>();
        b.p_redundancy = j.at("p_redundancy").get<double>();
        b.p_format = j.at("p_format").get<double>();
        b.r_total = j.at("r_total").get<double>();
        const auto& c = j.at("counters");
        b.steps = c.at("steps").get<int>();
        b.env_calls = c.at("env_calls").get<int>();
        b.attempt_steps = c.at("attempt_steps").get<int>();
        b.redundant_calls = c.at("redundant_calls").get<int>();
        b.malformed_regions = c.at("malformed_regions").get<int>();
        b.c_per_step = j.at("c_per_step").get<std::vector<int>>();
        b.compressed_steps = j.at("compressed_steps").get<std::vector<int>>();
        return b;
    }

    bool operator==(const PenaltyBreakdown&) const = default;
};

// The single reward computation both scoring paths share. task_success is the
// conjunction of a finish call and the environment goal predicate.
inline PenaltyBreakdown compute_breakdown(const std::vector<int>& c_per_step,
                                          const std::vector<int>& compressed_steps,
                                          const std::vector<CallRecord>& calls,
                                          const std::vector<StepFormat>& fmt, bool task_success,
                                          int tau) {
    PenaltyBreakdown b;
    b.r_task = task_success ? 1 : 0;
    b.p_context = context_penalty(c_per_step, compressed_steps, tau);
    b.p_redundancy = redundancy_penalty(calls);
    b.p_format = format_penalty(fmt);
    b.r_total = static_cast<double>(b.r_task) - b.p_context - b.p_redundancy - b.p_format;
    b.steps = static_cast<int>(c_per_step.size());
    b.env_calls = count_env_calls(calls);
    for (const auto& s : fmt) {
        if (s.attempted) ++b.attempt_steps;
        b.malformed_regions += s.malformed;
    }
    b.redundant_calls = count_redundant(calls);
    b.c_per_step = c_per_step;
    b.compressed_steps = compressed_steps;
    return b;
}

}  // namespace memex
