#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/memory_ops.hpp"
#include "memex/message.hpp"
#include "memex/reward.hpp"
#include "memex/store.hpp"
#include "memex/toolcall.hpp"
#include "memex/trajectory.hpp"
#include "memex/world.hpp"

namespace memex {

using Policy = std::function<std::string(const ContextWindow&)>;
using GoalHook = std::function<bool()>;

struct ToolResult {
    std::string observation;
    bool mutating = false;
};

// Environment-side tools. The three loop-owned names (CompressExperience,
// ReadExperience, finish) are reserved and can never be registered.
class ToolRegistry {
public:
    using Executor = std::function<ToolResult(const nlohmann::json& arguments)>;

    static bool is_reserved(std::string_view name) {
        return name == kCompressTool || name == kReadTool || name == kFinishTool;
    }

    void register_tool(const std::string& name, Executor fn) {
        if (is_reserved(name))
            throw std::logic_error("register_tool: '" + name + "' is reserved by the loop");
        if (name.empty()) throw std::logic_error("register_tool: empty tool name");
        tools_[name] = std::move(fn);
    }

    bool has(const std::string& name) const { return tools_.count(name) > 0; }

    ToolResult execute(const std::string& name, const nlohmann::json& arguments) const {
        auto it = tools_.find(name);
        if (it == tools_.end()) throw std::logic_error("execute: unknown tool '" + name + "'");
        return it->second(arguments);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : tools_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, Executor> tools_;
};

struct EpisodeConfig {
    std::string traj_id;
    uint64_t seed = 0;
    int t_max = 40;
    int tau = 8000;
    int tau_sigma = 300;
    int policy_timeout_ms = 0;  // 0 disables the watchdog
    std::string policy_name;
    std::string system_prompt;
    std::string task;
};

enum class Outcome { finished, max_step_reached, policy_error };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::finished: return "finished";
        case Outcome::max_step_reached: return "max_step_reached";
        default: return "policy_error";
    }
}

struct EpisodeResult {
    Outcome outcome = Outcome::max_step_reached;
    std::string answer;
    TrajectoryLog trajectory;
    ExperienceStore store;
    ContextWindow window{"", ""};
};

namespace detail {

// Runs the policy on a snapshot of the window under a watchdog. The worker
// thread owns its own copy of everything, so an overdue result is simply
// dropped instead of blocking the loop.
inline std::string invoke_policy(const Policy& policy, const ContextWindow& window,
                                 int timeout_ms) {
    if (timeout_ms <= 0) return policy(window);
    auto task = std::make_shared<std::packaged_task<std::string()>>(
        [policy, snapshot = window]() { return policy(snapshot); });
    std::future<std::string> fut = task->get_future();
    std::thread([task]() { (*task)(); }).detach();
    if (fut.wait_for(std::chrono::milliseconds(timeout_ms)) != std::future_status::ready)
        throw std::runtime_error("policy timed out after " + std::to_string(timeout_ms) + "ms");
    return fut.get();
}

struct CompressArgs {
    bool ok = false;
    std::string error;
    IndexedSummary summary;
    std::vector<MemoryBlock> blocks;
};

inline CompressArgs parse_compress_args(const nlohmann::json& args) {
    CompressArgs out;
    if (!args.contains("summary")) {
        out.error = "missing 'summary' argument";
        return out;
    }
    const nlohmann::json& summary = args["summary"];
    if (summary.is_string()) {
        out.summary.status_text = summary.get<std::string>();
    } else if (summary.is_object()) {
        if (summary.contains("status")) {
            if (!summary["status"].is_string()) {
                out.error = "'summary.status' must be a string";
                return out;
            }
            out.summary.status_text = summary["status"].get<std::string>();
        }
        if (summary.contains("index_map")) {
            if (!summary["index_map"].is_object()) {
                out.error = "'summary.index_map' must be an object of index -> description";
                return out;
            }
            for (const auto& [index, desc] : summary["index_map"].items()) {
                if (!desc.is_string()) {
                    out.error = "'summary.index_map' values must be strings";
                    return out;
                }
                out.summary.index_map.emplace_back(index, desc.get<std::string>());
            }
        }
    } else {
        out.error = "'summary' must be a string or an object";
        return out;
    }

    if (args.contains("db_blocks")) {
        if (!args["db_blocks"].is_array()) {
            out.error = "'db_blocks' must be an array";
            return out;
        }
        for (const auto& b : args["db_blocks"]) {
            if (!b.is_object() || !b.contains("db_index") || !b["db_index"].is_string()) {
                out.error = "each block needs a string 'db_index'";
                return out;
            }
            std::string index = b["db_index"].get<std::string>();
            bool has_content = b.contains("db_content");
            bool has_anchors =
                b.contains("start_anchor") || b.contains("mid_anchor") || b.contains("end_anchor");
            if (has_content == has_anchors) {
                out.error = "block '" + index + "' needs either 'db_content' or the three anchors";
                return out;
            }
            if (has_content) {
                if (!b["db_content"].is_string()) {
                    out.error = "block '" + index + "': 'db_content' must be a string";
                    return out;
                }
                out.blocks.push_back(MemoryBlock::explicit_block(index, b["db_content"].get<std::string>()));
            } else {
                for (const char* field : {"start_anchor", "mid_anchor", "end_anchor"}) {
                    if (!b.contains(field) || !b[field].is_string()) {
                        out.error = "block '" + index + "': anchored blocks need string '" +
                                    std::string(field) + "'";
                        return out;
                    }
                }
                out.blocks.push_back(MemoryBlock::anchored_block(
                    index, b["start_anchor"].get<std::string>(),
                    b["mid_anchor"].get<std::string>(), b["end_anchor"].get<std::string>()));
            }
        }
    }
    out.ok = true;
    return out;
}

}  // namespace detail

inline constexpr const char* kNoToolCallObservation =
    "Error: no valid tool call found. You MUST call a tool.";

// The agent loop. Each step injects a context status line, queries the
// policy, executes the first well-formed call (or injects the recovery
// observation), and keeps the running reward inputs up to date.
inline EpisodeResult run_episode(const Policy& policy, const ToolRegistry& tools,
                                 const GoalHook& goal_hook, const EpisodeConfig& cfg) {
    EpisodeResult result;
    result.window = ContextWindow(cfg.system_prompt, cfg.task);
    ContextWindow& window = result.window;
    ExperienceStore& store = result.store;

    TrajectoryLog& log = result.trajectory;
    log.traj_id = cfg.traj_id.empty() ? "traj_" + std::to_string(cfg.seed) : cfg.traj_id;
    log.seed = cfg.seed;
    log.tau = cfg.tau;
    log.tau_sigma = cfg.tau_sigma;
    log.t_max = cfg.t_max;
    log.policy_name = cfg.policy_name;
    log.system_prompt = cfg.system_prompt;
    log.task = cfg.task;

    std::vector<int> c_per_step;
    std::vector<int> compressed_steps;
    std::vector<CallRecord> calls;
    std::vector<StepFormat> fmt;
    bool finish_executed = false;
    long long full_tokens_cum = 0;

    result.outcome = Outcome::max_step_reached;
    for (int t = 1; t <= cfg.t_max; ++t) {
        window.append(make_context_status(window, cfg.tau));

        std::string raw;
        try {
            raw = detail::invoke_policy(policy, window, cfg.policy_timeout_ms);
        } catch (const std::exception&) {
            result.outcome = Outcome::policy_error;
            break;
        }

        StepRecord step;
        step.t = t;
        step.assistant = raw;
        step.pre_working = window.working_tokens();
        window.append(Message::make(Role::assistant, MessageKind::thinking_and_call, raw));
        full_tokens_cum += count_tokens(raw);

        ParseOutcome parsed = parse_assistant_output(raw);
        step.attempted = !parsed.calls.empty() || !parsed.malformed.empty();
        step.malformed = static_cast<int>(parsed.malformed.size());

        auto append_observation = [&](MessageKind kind, Role role, const std::string& text) {
            window.append(Message::make(role, kind, text));
            full_tokens_cum += count_tokens(text);
            step.has_observation = true;
            step.observation = text;
        };

        if (parsed.calls.empty()) {
            // no executable call this step; the step is still consumed
            append_observation(MessageKind::tool_output, Role::tool, kNoToolCallObservation);
        } else {
            const ToolCall& call = parsed.calls.front();  // first well-formed call wins
            step.call_name = call.name;
            step.signature = canonical_signature(call);
            step.is_memory = is_memory_tool(call.name);

            if (call.name == kCompressTool) {
                detail::CompressArgs cargs = detail::parse_compress_args(call.arguments);
                if (!cargs.ok) {
                    append_observation(MessageKind::tool_output, Role::tool,
                                       "Compression failed: " + cargs.error);
                } else {
                    CompressOutcome comp = compress_experience(window, store, cargs.summary,
                                                               cargs.blocks, cfg.tau_sigma, t);
                    if (comp.ok) {
                        step.compressed = true;
                        step.summary = window.at(2).payload;
                        full_tokens_cum += window.at(2).token_count;
                        for (const auto& a : comp.archived)
                            step.writes.push_back(StoreWrite{a.index, a.bytes});
                        step.warnings = comp.warnings;
                        // logged for the trajectory; deliberately not appended
                        // to the window the compression just emptied
                        step.has_observation = true;
                        step.observation = comp.observation;
                    } else {
                        append_observation(MessageKind::tool_output, Role::tool,
                                           "Compression failed: " + comp.error);
                    }
                }
            } else if (call.name == kReadTool) {
                if (!call.arguments.contains("db_index") || !call.arguments["db_index"].is_string()) {
                    append_observation(MessageKind::tool_output, Role::tool,
                                       "Error: ReadExperience requires a string 'db_index' argument.");
                } else {
                    std::string index = call.arguments["db_index"].get<std::string>();
                    // read_experience appends the message itself
                    ReadOutcome read = read_experience(window, store, index);
                    full_tokens_cum += count_tokens(read.observation);
                    step.has_observation = true;
                    step.observation = read.observation;
                    if (read.hit) step.reads.push_back(index);
                }
            } else if (call.name == kFinishTool) {
                finish_executed = true;
                result.answer = call.arguments.dump();
            } else if (tools.has(call.name)) {
                ToolResult res = tools.execute(call.name, call.arguments);
                step.mutating = res.mutating;
                append_observation(MessageKind::tool_output, Role::tool, res.observation);
            } else {
                append_observation(MessageKind::tool_output, Role::tool,
                                   "Error: unknown tool '" + call.name + "'.");
            }

            calls.push_back(CallRecord{step.signature, step.is_memory, step.mutating});
        }

        step.post_working = window.working_tokens();
        step.window_messages = static_cast<int>(window.size());
        step.full_tokens_cum = full_tokens_cum;
        c_per_step.push_back(step.post_working);
        if (step.compressed) compressed_steps.push_back(static_cast<int>(c_per_step.size()) - 1);
        fmt.push_back(StepFormat{step.attempted, step.malformed});
        log.steps.push_back(std::move(step));

        if (finish_executed) {
            result.outcome = Outcome::finished;
            break;
        }
    }

    log.outcome = to_string(result.outcome);
    log.answer = result.answer;
    log.goal = goal_hook ? goal_hook() : false;
    log.breakdown =
        compute_breakdown(c_per_step, compressed_steps, calls, fmt,
                          finish_executed && log.goal, cfg.tau);
    log.has_terminal = true;
    return result;
}

// Re-drives the loop by replaying recorded assistant outputs against a fresh
// environment, then insists every step came back byte-identical.
inline EpisodeResult replay_episode(const TrajectoryLog& ref, const ToolRegistry& tools,
                                    const GoalHook& goal_hook) {
    EpisodeConfig cfg;
    cfg.traj_id = ref.traj_id;
    cfg.seed = ref.seed;
    cfg.t_max = ref.t_max;
    cfg.tau = ref.tau;
    cfg.tau_sigma = ref.tau_sigma;
    cfg.policy_name = ref.policy_name;
    cfg.system_prompt = ref.system_prompt;
    cfg.task = ref.task;

    auto cursor = std::make_shared<size_t>(0);
    Policy replayer = [&ref, cursor](const ContextWindow&) -> std::string {
        if (*cursor >= ref.steps.size())
            throw std::runtime_error("replay: recorded trajectory exhausted");
        return ref.steps[(*cursor)++].assistant;
    };

    EpisodeResult res = run_episode(replayer, tools, goal_hook, cfg);

    size_t n = std::min(res.trajectory.steps.size(), ref.steps.size());
    for (size_t i = 0; i < n; ++i) {
        const StepRecord& a = ref.steps[i];
        const StepRecord& b = res.trajectory.steps[i];
        if (a.has_observation != b.has_observation || a.observation != b.observation ||
            a.compressed != b.compressed || a.summary != b.summary)
            throw DivergenceError(a.t, "replay diverged at step " + std::to_string(a.t));
    }
    if (res.trajectory.steps.size() != ref.steps.size())
        throw DivergenceError(static_cast<int>(n) + 1,
                              "replay diverged: step count " +
                                  std::to_string(res.trajectory.steps.size()) + " vs recorded " +
                                  std::to_string(ref.steps.size()));
    if (res.trajectory.outcome != ref.outcome)
        throw DivergenceError(static_cast<int>(n),
                              "replay diverged: outcome " + res.trajectory.outcome +
                                  " vs recorded " + ref.outcome);
    return res;
}

// Bundles a generated world behind the registry/goal-hook interface the
// kernel wants. The state lives on the shared_ptr so the closures stay valid
// across copies.
struct HouseholdEnv {
    std::shared_ptr<WorldState> state;
    TaskSpec task;
    ToolRegistry tools;
    GoalHook goal;
};

inline HouseholdEnv make_household_env(uint64_t seed) {
    GeneratedWorld gw = generate_world(seed);
    HouseholdEnv env;
    env.state = std::make_shared<WorldState>(std::move(gw.state));
    env.task = gw.task;
    std::shared_ptr<WorldState> state = env.state;
    env.tools.register_tool("execute_action", [state](const nlohmann::json& args) -> ToolResult {
        if (!args.contains("action") || !args["action"].is_string())
            return ToolResult{"Error: execute_action requires a string 'action' argument.", false};
        ActionResult r = execute_action(*state, args["action"].get<std::string>());
        return ToolResult{r.observation, r.mutating};
    });
    TaskSpec task = env.task;
    env.goal = [state, task]() { return check_goal(*state, task); };
    return env;
}

}  // namespace memex
