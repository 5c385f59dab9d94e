// command line front end: batch episode runs, rescoring, segmentation,
// deterministic replay verification, and store inspection

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "memex/gateway.hpp"
#include "memex/kernel.hpp"
#include "memex/runner.hpp"
#include "memex/segmentation.hpp"
#include "memex/store.hpp"
#include "memex/trajectory.hpp"

#ifndef MEMEX_DEFAULT_PROMPT
#define MEMEX_DEFAULT_PROMPT ""
#endif

namespace {

using namespace memex;
using nlohmann::json;

// exit codes: 0 success, 1 runtime failure, 2 configuration/input error
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_episode_table(const BatchSummary& batch) {
    std::fprintf(stderr, "%-8s %-18s %-5s %-8s %-6s %-6s %-6s %-8s %-8s\n", "seed", "outcome",
                 "goal", "reward", "steps", "compr", "reads", "working", "peak");
    for (const auto& e : batch.episodes)
        std::fprintf(stderr, "%-8llu %-18s %-5s %-8.3f %-6d %-6d %-6d %-8d %-8d\n",
                     static_cast<unsigned long long>(e.seed), e.outcome.c_str(),
                     e.goal ? "yes" : "no", e.r_total, e.steps, e.compressions, e.read_calls,
                     e.final_working, e.peak_working);
}

int cmd_run(const RunConfig& cfg) {
    BatchSummary batch = run_batch(cfg);
    print_episode_table(batch);
    json out = batch.to_json(cfg);
    std::ofstream summary(std::filesystem::path(cfg.out_dir) / "summary.json",
                          std::ios::binary | std::ios::trunc);
    summary << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    for (const auto& e : batch.episodes)
        if (e.outcome == to_string(Outcome::policy_error)) {
            std::fprintf(stderr, "error: seed %llu ended in policy_error\n",
                         static_cast<unsigned long long>(e.seed));
            return 1;
        }
    return 0;
}

// input artifacts that fail to load are configuration problems (exit 2)
TrajectoryLog load_trajectory(const std::string& path) {
    try {
        return read_trajectory_jsonl(path);
    } catch (const StorageError& e) {
        throw ConfigError(e.what());
    }
}

int cmd_score(const std::string& traj_path, int tau_override) {
    TrajectoryLog log = load_trajectory(traj_path);
    if (!log.has_terminal)
        throw ConfigError("trajectory has no terminal record; cannot score");
    int tau = tau_override > 0 ? tau_override : log.tau;
    PenaltyBreakdown recomputed = episode_return(log, log.goal, tau);
    json out;
    out["traj_id"] = log.traj_id;
    out["tau"] = tau;
    out["recorded"] = log.breakdown.to_json();
    out["recomputed"] = recomputed.to_json();
    out["matches_recorded"] = (recomputed == log.breakdown);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_segment(const std::string& traj_path, const std::string& group_id,
                const std::string& out_path) {
    TrajectoryLog log = load_trajectory(traj_path);
    auto segments = segment_trajectory(log, group_id);
    if (out_path.empty()) {
        export_segments(segments, std::cout);
    } else {
        export_segments(segments, std::filesystem::path(out_path));
        std::fprintf(stderr, "wrote %zu segments to %s\n", segments.size(), out_path.c_str());
    }
    return 0;
}

int cmd_replay(const std::string& traj_path) {
    TrajectoryLog log = load_trajectory(traj_path);
    HouseholdEnv env = make_household_env(log.seed);
    try {
        EpisodeResult res = replay_episode(log, env.tools, env.goal);
        json out;
        out["verified"] = true;
        out["traj_id"] = log.traj_id;
        out["seed"] = log.seed;
        out["steps"] = res.trajectory.steps.size();
        out["outcome"] = res.trajectory.outcome;
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const DivergenceError& e) {
        json out;
        out["verified"] = false;
        out["traj_id"] = log.traj_id;
        out["step"] = e.step();
        out["error"] = e.what();
        std::cout << out.dump(2) << "\n";
        return 1;
    }
}

int cmd_store_dump(const std::string& store_path) {
    ExperienceStore store = [&] {
        try {
            return ExperienceStore::load(store_path);
        } catch (const StorageError& e) {
            throw ConfigError(e.what());
        }
    }();
    json out;
    out["entries"] = json::array();
    for (const auto& index : store.indices())
        out["entries"].push_back({{"index", index}, {"content", store.get(index)}});
    out["writes"] = json::array();
    for (const auto& w : store.write_log())
        out["writes"].push_back({{"step", w.step}, {"index", w.index}, {"bytes", w.bytes}});
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memex: indexed-memory agent episodes over a deterministic household world"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a batch of episodes and write artifacts");
    std::string seeds_text = "0";
    std::uint64_t seed_single = 0;
    std::string config_path;
    std::string prompt_path;
    RunConfig cfg;
    auto* seeds_opt = run->add_option("--seeds", seeds_text, "seed list, e.g. 3 or 1,2,5-10");
    run->add_option("--seed", seed_single, "single seed (shorthand for --seeds N)")
        ->excludes(seeds_opt);
    run->add_option("--policy", cfg.policy, "oracle_full | oracle_indexed | gateway");
    run->add_option("--tmax", cfg.t_max, "step cap per episode");
    run->add_option("--tau", cfg.tau, "working-context token threshold");
    run->add_option("--tau-sigma", cfg.tau_sigma, "summary token budget");
    run->add_option("--policy-timeout-ms", cfg.policy_timeout_ms, "per-call policy watchdog (0=off)");
    run->add_option("--B", cfg.block_budget, "indexed oracle: blocks archived per compression");
    run->add_option("--compress-every", cfg.compress_every,
                    "indexed oracle: assistant turns between compressions");
    run->add_flag("--explore", cfg.explore, "indexed oracle: sweep all receptacles first");
    run->add_option("--out", cfg.out_dir, "output directory for trajectories and stores");
    run->add_option("--workers", cfg.workers, "parallel episode workers");
    run->add_option("--endpoint", cfg.gateway.endpoint, "gateway base URL, e.g. http://host:port");
    run->add_option("--model", cfg.gateway.model, "gateway model name");
    run->add_option("--prompt", prompt_path, "system prompt file (default: shipped prompt)");
    run->add_option("--config", config_path, "key=value config file (flags win)");

    // score
    auto* score = app.add_subcommand("score", "recompute the reward breakdown from a trajectory");
    std::string score_traj;
    int score_tau = 0;
    score->add_option("trajectory", score_traj, "trajectory .jsonl file")->required();
    score->add_option("--tau", score_tau, "override the recorded threshold");

    // segment
    auto* segment = app.add_subcommand("segment", "split a trajectory at its compressions");
    std::string seg_traj, seg_group, seg_out;
    segment->add_option("trajectory", seg_traj, "trajectory .jsonl file")->required();
    segment->add_option("--group", seg_group, "group id stamped on every segment");
    segment->add_option("--out", seg_out, "segment .jsonl output (default: stdout)");

    // replay
    auto* replay = app.add_subcommand("replay", "re-drive a trajectory and verify determinism");
    std::string replay_traj;
    replay->add_option("trajectory", replay_traj, "trajectory .jsonl file")->required();

    // store-dump
    auto* dump = app.add_subcommand("store-dump", "print a persisted experience store");
    std::string dump_store;
    dump->add_option("store", dump_store, "store .jsonl file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage error
        return 2;
    }

    try {
        if (run->parsed()) {
            try {
                // precedence: defaults < config file < explicit flags
                if (!config_path.empty()) {
                    RunConfig file_cfg;
                    apply_config_entries(file_cfg, parse_config_file(config_path));
                    RunConfig flags = cfg;
                    cfg = file_cfg;
                    if (!run->get_option("--policy")->empty()) cfg.policy = flags.policy;
                    if (!run->get_option("--tmax")->empty()) cfg.t_max = flags.t_max;
                    if (!run->get_option("--tau")->empty()) cfg.tau = flags.tau;
                    if (!run->get_option("--tau-sigma")->empty()) cfg.tau_sigma = flags.tau_sigma;
                    if (!run->get_option("--policy-timeout-ms")->empty())
                        cfg.policy_timeout_ms = flags.policy_timeout_ms;
                    if (!run->get_option("--B")->empty()) cfg.block_budget = flags.block_budget;
                    if (!run->get_option("--compress-every")->empty())
                        cfg.compress_every = flags.compress_every;
                    if (!run->get_option("--explore")->empty()) cfg.explore = flags.explore;
                    if (!run->get_option("--out")->empty()) cfg.out_dir = flags.out_dir;
                    if (!run->get_option("--workers")->empty()) cfg.workers = flags.workers;
                    if (!run->get_option("--endpoint")->empty())
                        cfg.gateway.endpoint = flags.gateway.endpoint;
                    if (!run->get_option("--model")->empty())
                        cfg.gateway.model = flags.gateway.model;
                }
                if (!run->get_option("--seed")->empty())
                    cfg.seeds = {seed_single};
                else if (!run->get_option("--seeds")->empty() || cfg.seeds.empty())
                    cfg.seeds = parse_seed_list(seeds_text);
                if (cfg.policy != "oracle_full" && cfg.policy != "oracle_indexed" &&
                    cfg.policy != "gateway")
                    throw std::runtime_error("unknown policy '" + cfg.policy + "'");
                if (cfg.policy == "gateway" && cfg.gateway.endpoint.empty())
                    throw std::runtime_error("gateway policy needs --endpoint");
                if (prompt_path.empty()) prompt_path = MEMEX_DEFAULT_PROMPT;
                if (prompt_path.empty())
                    throw std::runtime_error("no system prompt available; pass --prompt FILE");
                cfg.system_prompt = read_text_file(prompt_path);
            } catch (const std::exception& e) {
                // everything up to here is configuration, not execution
                throw ConfigError(e.what());
            }
            return cmd_run(cfg);
        }
        if (score->parsed()) return cmd_score(score_traj, score_tau);
        if (segment->parsed()) return cmd_segment(seg_traj, seg_group, seg_out);
        if (replay->parsed()) return cmd_replay(replay_traj);
        if (dump->parsed()) return cmd_store_dump(dump_store);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
