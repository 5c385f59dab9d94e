#pragma once

// Shared test utilities: a deterministic chaos-monkey policy that exercises
// every kernel path (valid actions, memory ops with good and bad anchors,
// malformed outputs, unknown tools, finishes) plus an episode driver for it.

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "memex/kernel.hpp"
#include "memex/oracles.hpp"
#include "memex/rng.hpp"

namespace testutil {

using namespace memex;

inline std::string random_assistant_output(DetRng& rng, const GeneratedWorld& gw,
                                           const ContextWindow& window) {
    using nlohmann::json;
    std::string think = "considering option " + std::to_string(rng.below(1000)) + ".\n";
    auto rec_id = [&]() { return gw.state.receptacles[static_cast<size_t>(rng.below(
                              static_cast<int>(gw.state.receptacles.size())))].id; };
    auto obj_id = [&]() { return gw.state.objects[static_cast<size_t>(rng.below(
                              static_cast<int>(gw.state.objects.size())))].id; };

    int roll = rng.below(100);
    if (roll < 40) {
        std::string act;
        switch (rng.below(9)) {
            case 0: act = "look"; break;
            case 1: act = "go to " + rec_id(); break;
            case 2: act = "open " + rec_id(); break;
            case 3: act = "close " + rec_id(); break;
            case 4: act = "pick up " + obj_id(); break;
            case 5: act = "put " + obj_id() + " in/on " + rec_id(); break;
            case 6: act = "examine " + (rng.chance(1, 2) ? rec_id() : obj_id()); break;
            case 7: act = "clean " + obj_id() + " with " + rec_id(); break;
            default: act = "wander aimlessly"; break;
        }
        return think + emit_call("execute_action", json{{"action", act}});
    }
    if (roll < 52) {
        static const char* indices[] = {"ctx_a", "ctx_b", "ctx_c", "ghost"};
        return think + emit_call(kReadTool, json{{"db_index", indices[rng.below(4)]}});
    }
    if (roll < 67) {
        json args;
        if (rng.chance(1, 4))
            args["summary"] = std::string(static_cast<size_t>(rng.below(1600)), 's');
        else
            args["summary"] = json{{"status", "state " + std::to_string(rng.below(100))},
                                   {"index_map", json{{"ctx_a", "assorted notes"}}}};
        json blocks = json::array();
        int nb = rng.below(3);
        for (int b = 0; b < nb; ++b) {
            std::string index = std::string("ctx_") + static_cast<char>('a' + rng.below(3));
            if (rng.chance(1, 2)) {
                blocks.push_back(
                    {{"db_index", index},
                     {"db_content", "archived " + std::to_string(rng.below(10000))}});
            } else if (rng.chance(1, 3)) {
                // junk anchors: the compression should fail atomically
                blocks.push_back({{"db_index", index},
                                  {"start_anchor", "zz-not-there"},
                                  {"mid_anchor", "qq"},
                                  {"end_anchor", "yy"}});
            } else {
                // anchors sliced from a live window payload so they resolve
                const Message& m =
                    window.at(static_cast<size_t>(rng.below(static_cast<int>(window.size()))));
                if (m.payload.size() >= 12) {
                    size_t third = m.payload.size() / 3;
                    blocks.push_back(
                        {{"db_index", index},
                         {"start_anchor", m.payload.substr(0, 3)},
                         {"mid_anchor", m.payload.substr(third, 3)},
                         {"end_anchor", m.payload.substr(m.payload.size() - 3)}});
                } else {
                    blocks.push_back({{"db_index", index}, {"db_content", "tiny"}});
                }
            }
        }
        args["db_blocks"] = blocks;
        return think + emit_call(kCompressTool, args);
    }
    if (roll < 80) {
        switch (rng.below(5)) {
            case 0: return think + "<tool_call>{\"name\": \"x\", \"arguments\": {}";
            case 1: return think + "</tool_call> stray";
            case 2: return think + "<tool_call>{definitely not json}</tool_call>";
            case 3: return think + "<tool_call>{\"arguments\": {}}</tool_call>";
            default:
                return think + "<tool_call>{broken}</tool_call>" +
                       emit_call("execute_action", json{{"action", "look"}});
        }
    }
    if (roll < 88) return think + emit_call("mystery_tool", json{{"x", rng.below(10)}});
    if (roll < 94) return think;  // no call at all
    return think + emit_call(kFinishTool, json{{"success", rng.chance(1, 2)}});
}

struct RandomEpisode {
    EpisodeResult result;
    HouseholdEnv env;
};

inline RandomEpisode run_random_episode(uint64_t seed, int t_max = 0, int tau = 150,
                                        int tau_sigma = 60) {
    RandomEpisode out{EpisodeResult{}, make_household_env(seed)};
    auto gw = std::make_shared<GeneratedWorld>(generate_world(seed));
    auto rng = std::make_shared<DetRng>(seed ^ 0xfeedfacecafebeefull);

    Policy policy = [gw, rng](const ContextWindow& w) {
        return random_assistant_output(*rng, *gw, w);
    };

    EpisodeConfig cfg;
    cfg.traj_id = "fuzz_" + std::to_string(seed);
    cfg.seed = seed;
    cfg.t_max = t_max > 0 ? t_max : 10 + static_cast<int>(seed % 16);
    cfg.tau = tau;          // small threshold so overflow penalties actually occur
    cfg.tau_sigma = tau_sigma;
    cfg.policy_name = "fuzz";
    cfg.system_prompt = "fuzz system prompt";
    cfg.task = out.env.task.instruction;
    out.result = run_episode(policy, out.env.tools, out.env.goal, cfg);
    return out;
}

}  // namespace testutil
