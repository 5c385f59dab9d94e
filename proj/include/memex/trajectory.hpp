#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/errors.hpp"
#include "memex/reward.hpp"
#include "memex/toolcall.hpp"

namespace memex {

inline constexpr const char* kTrajectorySchema = "memex-trajectory-v1";

inline constexpr const char* kCompressTool = "CompressExperience";
inline constexpr const char* kReadTool = "ReadExperience";
inline constexpr const char* kFinishTool = "finish";

inline bool is_memory_tool(std::string_view name) {
    return name == kCompressTool || name == kReadTool;
}

struct StoreWrite {
    std::string index;
    size_t bytes = 0;
    bool operator==(const StoreWrite&) const = default;
};

struct StepRecord {
    int t = 0;                  // 1-based step number
    std::string assistant;      // raw policy output
    bool has_observation = false;
    std::string observation;    // exactly what was appended (or logged for compression)
    std::string call_name;      // executed call, empty when none
    std::string signature;
    bool is_memory = false;
    bool mutating = false;
    bool attempted = false;
    int malformed = 0;
    bool compressed = false;    // successful compression this step
    std::string summary;        // rendered summary payload when compressed
    int pre_working = 0;        // what the policy saw
    int post_working = 0;       // C_t, after this step's effects
    int window_messages = 0;    // window length after the step
    long long full_tokens_cum = 0;
    std::vector<StoreWrite> writes;
    std::vector<std::string> reads;
    std::vector<std::string> warnings;

    bool operator==(const StepRecord&) const = default;
};

struct TrajectoryLog {
    std::string traj_id;
    uint64_t seed = 0;
    int tau = 8000;
    int tau_sigma = 300;
    int t_max = 40;
    std::string policy_name;
    std::string system_prompt;
    std::string task;

    std::vector<StepRecord> steps;

    bool has_terminal = false;
    std::string outcome;  // finished | max_step_reached | policy_error
    std::string answer;
    bool goal = false;
    PenaltyBreakdown breakdown;

    bool operator==(const TrajectoryLog&) const = default;
};

namespace detail {

inline nlohmann::json step_to_json(const StepRecord& s) {
    nlohmann::json j;
    j["type"] = "step";
    j["t"] = s.t;
    j["assistant"] = s.assistant;
    if (s.has_observation)
        j["observation"] = s.observation;
    else
        j["observation"] = nullptr;
    j["call_name"] = s.call_name;
    j["signature"] = s.signature;
    j["is_memory"] = s.is_memory;
    j["mutating"] = s.mutating;
    j["attempted"] = s.attempted;
    j["malformed"] = s.malformed;
    j["compressed"] = s.compressed;
    if (s.compressed)
        j["summary"] = s.summary;
    else
        j["summary"] = nullptr;
    j["pre_working"] = s.pre_working;
    j["post_working"] = s.post_working;
    j["window_messages"] = s.window_messages;
    j["full_tokens_cum"] = s.full_tokens_cum;
    j["writes"] = nlohmann::json::array();
    for (const auto& w : s.writes) j["writes"].push_back({{"index", w.index}, {"bytes", w.bytes}});
    j["reads"] = s.reads;
    j["warnings"] = s.warnings;
    return j;
}

inline StepRecord step_from_json(const nlohmann::json& j) {
    StepRecord s;
    s.t = j.at("t").get<int>();
    s.assistant = j.at("assistant").get<std::string>();
    s.has_observation = !j.at("observation").is_null();
    if (s.has_observation) s.observation = j.at("observation").get<std::string>();
    s.call_name = j.at("call_name").get<std::string>();
    s.signature = j.at("signature").get<std::string>();
    s.is_memory = j.at("is_memory").get<bool>();
    s.mutating = j.at("mutating").get<bool>();
    s.attempted = j.at("attempted").get<bool>();
    s.malformed = j.at("malformed").get<int>();
    s.compressed = j.at("compressed").get<bool>();
    if (s.compressed) s.summary = j.at("summary").get<std::string>();
    s.pre_working = j.at("pre_working").get<int>();
    s.post_working = j.at("post_working").get<int>();
    s.window_messages = j.at("window_messages").get<int>();
    s.full_tokens_cum = j.at("full_tokens_cum").get<long long>();
    for (const auto& w : j.at("writes"))
        s.writes.push_back(StoreWrite{w.at("index").get<std::string>(), w.at("bytes").get<size_t>()});
    s.reads = j.at("reads").get<std::vector<std::string>>();
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

}  // namespace detail

inline void write_trajectory_jsonl(const TrajectoryLog& log, std::ostream& out) {
    nlohmann::json header;
    header["type"] = "header";
    header["schema"] = kTrajectorySchema;
    header["traj_id"] = log.traj_id;
    header["seed"] = log.seed;
    header["tau"] = log.tau;
    header["tau_sigma"] = log.tau_sigma;
    header["t_max"] = log.t_max;
    header["policy"] = log.policy_name;
    header["system_prompt"] = log.system_prompt;
    header["task"] = log.task;
    out << header.dump() << "\n";
    for (const auto& s : log.steps) out << detail::step_to_json(s).dump() << "\n";
    if (log.has_terminal) {
        nlohmann::json terminal;
        terminal["type"] = "terminal";
        terminal["outcome"] = log.outcome;
        terminal["answer"] = log.answer;
        terminal["goal"] = log.goal;
        terminal["reward"] = log.breakdown.to_json();
        out << terminal.dump() << "\n";
    }
}

inline void write_trajectory_jsonl(const TrajectoryLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot open trajectory file '" + path.string() + "'");
    write_trajectory_jsonl(log, out);
    if (!out) throw StorageError("failed writing trajectory file '" + path.string() + "'");
}

inline TrajectoryLog read_trajectory_jsonl(std::istream& in, const std::string& origin = "<stream>") {
    TrajectoryLog log;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object() || !j.contains("type"))
            throw StorageError("bad trajectory line at " + origin + ":" + std::to_string(lineno));
        std::string type = j["type"].get<std::string>();
        try {
            if (type == "header") {
                if (have_header) throw StorageError("duplicate header at " + origin);
                have_header = true;
                if (j.at("schema").get<std::string>() != kTrajectorySchema)
                    throw StorageError("unknown trajectory schema in " + origin);
                log.traj_id = j.at("traj_id").get<std::string>();
                log.seed = j.at("seed").get<uint64_t>();
                log.tau = j.at("tau").get<int>();
                log.tau_sigma = j.at("tau_sigma").get<int>();
                log.t_max = j.at("t_max").get<int>();
                log.policy_name = j.at("policy").get<std::string>();
                log.system_prompt = j.at("system_prompt").get<std::string>();
                log.task = j.at("task").get<std::string>();
            } else if (type == "step") {
                if (!have_header || log.has_terminal)
                    throw StorageError("step out of order at " + origin + ":" + std::to_string(lineno));
                StepRecord s = detail::step_from_json(j);
                if (s.t != static_cast<int>(log.steps.size()) + 1)
                    throw StorageError("non-contiguous step numbers at " + origin + ":" +
                                       std::to_string(lineno));
                log.steps.push_back(std::move(s));
            } else if (type == "terminal") {
                if (!have_header || log.has_terminal)
                    throw StorageError("terminal out of order at " + origin + ":" +
                                       std::to_string(lineno));
                log.has_terminal = true;
                log.outcome = j.at("outcome").get<std::string>();
                log.answer = j.at("answer").get<std::string>();
                log.goal = j.at("goal").get<bool>();
                log.breakdown = PenaltyBreakdown::from_json(j.at("reward"));
            } else {
                throw StorageError("unknown record type '" + type + "' in " + origin);
            }
        } catch (const nlohmann::json::exception& e) {
            throw StorageError("bad trajectory record at " + origin + ":" +
                               std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header) throw StorageError("trajectory has no header: " + origin);
    return log;
}

inline TrajectoryLog read_trajectory_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open trajectory file '" + path.string() + "'");
    return read_trajectory_jsonl(in, path.string());
}

// From-scratch rescoring: re-parses every logged assistant output instead of
// trusting the logged flags, then feeds the shared reward computation. Only
// the environment-truth bits (mutating, post-step tokens, goal) come from the
// record, because text alone cannot reproduce them.
inline PenaltyBreakdown episode_return(const TrajectoryLog& log, bool goal, int tau) {
    std::vector<int> c_per_step;
    std::vector<int> compressed_steps;
    std::vector<CallRecord> calls;
    std::vector<StepFormat> fmt;
    bool finish_executed = false;
    for (size_t i = 0; i < log.steps.size(); ++i) {
        const StepRecord& s = log.steps[i];
        ParseOutcome parsed = parse_assistant_output(s.assistant);
        StepFormat f;
        f.attempted = !parsed.calls.empty() || !parsed.malformed.empty();
        f.malformed = static_cast<int>(parsed.malformed.size());
        fmt.push_back(f);
        if (!parsed.calls.empty()) {
            const ToolCall& call = parsed.calls.front();
            CallRecord rec;
            rec.signature = canonical_signature(call);
            rec.is_memory = is_memory_tool(call.name);
            rec.mutating = s.mutating;
            calls.push_back(rec);
            if (call.name == kFinishTool) finish_executed = true;
        }
        c_per_step.push_back(s.post_working);
        if (s.compressed) compressed_steps.push_back(static_cast<int>(i));
    }
    return compute_breakdown(c_per_step, compressed_steps, calls, fmt, finish_executed && goal,
                             tau);
}

inline PenaltyBreakdown episode_return(const TrajectoryLog& log) {
    if (!log.has_terminal)
        throw StorageError("episode_return: trajectory has no terminal record");
    return episode_return(log, log.goal, log.tau);
}

}  // namespace memex
