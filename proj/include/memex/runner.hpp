#pragma once

// Batch episode driver: expands a seed list, runs each seed under the selected
// policy on a small worker pool, writes one trajectory + store file pair per
// seed, and aggregates a deterministic summary (episodes are ordered by seed,
// so the output does not depend on thread scheduling).

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/gateway.hpp"
#include "memex/kernel.hpp"
#include "memex/oracles.hpp"
#include "memex/trajectory.hpp"

namespace memex {

struct RunConfig {
    std::vector<uint64_t> seeds;
    std::string policy = "oracle_indexed";  // oracle_full | oracle_indexed | gateway
    int t_max = 40;
    int tau = 8000;
    int tau_sigma = 300;
    int policy_timeout_ms = 0;
    int block_budget = 2;     // indexed oracle: blocks per compression
    int compress_every = 4;   // indexed oracle: assistant turns between compressions
    bool explore = false;     // indexed oracle: sweep the room before acting
    std::string out_dir = "runs";
    int workers = 1;
    std::string system_prompt;  // resolved text, not a path
    GatewayConfig gateway;
};

// "1,2,5-10" → {1,2,5,6,7,8,9,10}
inline std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        size_t dash = part.find('-');
        try {
            if (dash == std::string::npos) {
                seeds.push_back(std::stoull(part));
            } else {
                uint64_t lo = std::stoull(part.substr(0, dash));
                uint64_t hi = std::stoull(part.substr(dash + 1));
                if (hi < lo) throw std::invalid_argument("descending range");
                if (hi - lo > 100000) throw std::invalid_argument("range too large");
                for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad seed list element '" + part + "'");
        }
    }
    return seeds;
}

// flat key=value file; '#' starts a comment; blank lines ignored
inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
    std::map<std::string, std::string> entries;
    std::string line;
    size_t lineno = 0;
    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     " is not key=value: '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + " has empty key");
        entries[key] = value;
    }
    return entries;
}

inline void apply_config_entries(RunConfig& cfg,
                                 const std::map<std::string, std::string>& entries) {
    auto to_int = [](const std::string& key, const std::string& v) {
        try {
            return std::stoi(v);
        } catch (const std::exception&) {
            throw std::runtime_error("config key '" + key + "' needs an integer, got '" + v + "'");
        }
    };
    auto to_bool = [](const std::string& key, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::runtime_error("config key '" + key + "' needs a boolean, got '" + v + "'");
    };
    for (const auto& [key, value] : entries) {
        if (key == "seeds") cfg.seeds = parse_seed_list(value);
        else if (key == "policy") cfg.policy = value;
        else if (key == "tmax") cfg.t_max = to_int(key, value);
        else if (key == "tau") cfg.tau = to_int(key, value);
        else if (key == "tau_sigma") cfg.tau_sigma = to_int(key, value);
        else if (key == "policy_timeout_ms") cfg.policy_timeout_ms = to_int(key, value);
        else if (key == "block_budget") cfg.block_budget = to_int(key, value);
        else if (key == "compress_every") cfg.compress_every = to_int(key, value);
        else if (key == "explore") cfg.explore = to_bool(key, value);
        else if (key == "out") cfg.out_dir = value;
        else if (key == "workers") cfg.workers = to_int(key, value);
        else if (key == "endpoint") cfg.gateway.endpoint = value;
        else if (key == "model") cfg.gateway.model = value;
        else if (key == "auth_env") cfg.gateway.auth_env = value;
        else if (key == "timeout_ms") cfg.gateway.timeout_ms = to_int(key, value);
        else if (key == "max_retries") cfg.gateway.max_retries = to_int(key, value);
        else throw std::runtime_error("unknown config key '" + key + "'");
    }
}

struct EpisodeSummary {
    uint64_t seed = 0;
    std::string outcome;
    bool goal = false;
    double r_total = 0.0;
    double p_context = 0.0;
    double p_redundancy = 0.0;
    double p_format = 0.0;
    int steps = 0;
    int compressions = 0;
    int read_calls = 0;
    int peak_working = 0;
    int final_working = 0;
    long long full_tokens = 0;
    std::string traj_path;
    std::string store_path;

    nlohmann::json to_json() const {
        return nlohmann::json{{"seed", seed},
                              {"outcome", outcome},
                              {"goal", goal},
                              {"r_total", r_total},
                              {"p_context", p_context},
                              {"p_redundancy", p_redundancy},
                              {"p_format", p_format},
                              {"steps", steps},
                              {"compressions", compressions},
                              {"read_calls", read_calls},
                              {"peak_working", peak_working},
                              {"final_working", final_working},
                              {"full_tokens", full_tokens},
                              {"traj_path", traj_path},
                              {"store_path", store_path}};
    }
};

struct BatchSummary {
    std::vector<EpisodeSummary> episodes;  // ordered by seed

    nlohmann::json to_json(const RunConfig& cfg) const {
        int solved = 0, compressions = 0, reads = 0, peak_working = 0;
        double reward_sum = 0.0;
        long long step_sum = 0, working_sum = 0;
        for (const auto& e : episodes) {
            if (e.goal) ++solved;
            compressions += e.compressions;
            reads += e.read_calls;
            peak_working = std::max(peak_working, e.peak_working);
            reward_sum += e.r_total;
            step_sum += e.steps;
            working_sum += static_cast<long long>(e.final_working);
        }
        size_t n = episodes.size();
        double dn = n ? static_cast<double>(n) : 1.0;
        nlohmann::json eps = nlohmann::json::array();
        for (const auto& e : episodes) eps.push_back(e.to_json());
        return nlohmann::json{
            {"config",
             {{"policy", cfg.policy},
              {"tmax", cfg.t_max},
              {"tau", cfg.tau},
              {"tau_sigma", cfg.tau_sigma},
              {"block_budget", cfg.block_budget},
              {"compress_every", cfg.compress_every},
              {"explore", cfg.explore},
              {"episodes", n}}},
            {"aggregate",
             {{"solved", solved},
              {"success_rate", n ? static_cast<double>(solved) / dn : 0.0},
              {"mean_reward", n ? reward_sum / dn : 0.0},
              {"mean_steps", n ? static_cast<double>(step_sum) / dn : 0.0},
              {"mean_final_working", n ? static_cast<double>(working_sum) / dn : 0.0},
              {"peak_working", peak_working},
              {"mean_compress_calls", n ? static_cast<double>(compressions) / dn : 0.0},
              {"mean_read_calls", n ? static_cast<double>(reads) / dn : 0.0},
              {"total_compressions", compressions}}},
            {"episodes", eps}};
    }
};

inline Policy make_policy_for(const RunConfig& cfg, uint64_t seed) {
    if (cfg.policy == "oracle_full") return make_full_context_policy(seed);
    if (cfg.policy == "oracle_indexed") {
        IndexedPolicyOptions opts;
        opts.B = cfg.block_budget;
        opts.compress_every = cfg.compress_every;
        opts.explore = cfg.explore;
        return make_indexed_policy(seed, opts);
    }
    if (cfg.policy == "gateway") {
        if (cfg.gateway.endpoint.empty())
            throw std::runtime_error("policy 'gateway' needs an endpoint");
        return make_gateway_policy(cfg.gateway);
    }
    throw std::runtime_error("unknown policy '" + cfg.policy +
                             "' (expected oracle_full, oracle_indexed, or gateway)");
}

inline EpisodeSummary run_one(const RunConfig& cfg, uint64_t seed) {
    HouseholdEnv env = make_household_env(seed);
    EpisodeConfig ecfg;
    ecfg.traj_id = "traj_" + std::to_string(seed);
    ecfg.seed = seed;
    ecfg.t_max = cfg.t_max;
    ecfg.tau = cfg.tau;
    ecfg.tau_sigma = cfg.tau_sigma;
    ecfg.policy_timeout_ms = cfg.policy_timeout_ms;
    ecfg.policy_name = cfg.policy;
    ecfg.system_prompt = cfg.system_prompt;
    ecfg.task = env.task.instruction;

    EpisodeResult result = run_episode(make_policy_for(cfg, seed), env.tools, env.goal, ecfg);

    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    std::filesystem::path traj = dir / ("traj_" + std::to_string(seed) + ".jsonl");
    std::filesystem::path store = dir / ("store_" + std::to_string(seed) + ".jsonl");
    write_trajectory_jsonl(result.trajectory, traj);
    result.store.persist(store);

    EpisodeSummary s;
    s.seed = seed;
    s.outcome = to_string(result.outcome);
    s.goal = result.trajectory.goal;
    s.r_total = result.trajectory.breakdown.r_total;
    s.p_context = result.trajectory.breakdown.p_context;
    s.p_redundancy = result.trajectory.breakdown.p_redundancy;
    s.p_format = result.trajectory.breakdown.p_format;
    s.steps = static_cast<int>(result.trajectory.steps.size());
    for (const auto& st : result.trajectory.steps) {
        if (st.compressed) ++s.compressions;
        if (st.call_name == kReadTool) ++s.read_calls;
        s.peak_working = std::max(s.peak_working, st.post_working);
    }
    s.final_working = result.window.working_tokens();
    s.full_tokens =
        result.trajectory.steps.empty() ? 0 : result.trajectory.steps.back().full_tokens_cum;
    s.traj_path = traj.string();
    s.store_path = store.string();
    return s;
}

inline BatchSummary run_batch(const RunConfig& cfg) {
    if (cfg.seeds.empty()) throw std::runtime_error("no seeds to run");
    BatchSummary batch;
    batch.episodes.resize(cfg.seeds.size());

    int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cfg.seeds.size())));
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<size_t>(workers));
    for (int wi = 0; wi < workers; ++wi) {
        pool.emplace_back([&, wi] {
            try {
                for (size_t i = next.fetch_add(1); i < cfg.seeds.size(); i = next.fetch_add(1))
                    batch.episodes[i] = run_one(cfg, cfg.seeds[i]);
            } catch (...) {
                failures[static_cast<size_t>(wi)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    std::sort(batch.episodes.begin(), batch.episodes.end(),
              [](const EpisodeSummary& a, const EpisodeSummary& b) { return a.seed < b.seed; });
    return batch;
}

}  // namespace memex
