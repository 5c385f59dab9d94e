#include <catch2/catch_amalgamated.hpp>

#include "memex/reward.hpp"
#include "memex/rng.hpp"
#include "memex/trajectory.hpp"

#include "helpers.hpp"

using namespace memex;
using Catch::Approx;

static CallRecord env(const std::string& sig, bool mutating = false) {
    return CallRecord{sig, false, mutating};
}
static CallRecord mem(const std::string& sig) { return CallRecord{sig, true, false}; }

TEST_CASE("context penalty is zero while every step stays at or under the threshold") {
    CHECK(context_penalty({50, 60, 70}, {}, 100) == 0.0);
    CHECK(context_penalty({100, 100}, {}, 100) == 0.0);
    CHECK(context_penalty({}, {}, 100) == 0.0);
}

TEST_CASE("context penalty averages the overage across all steps") {
    // one step at 150 against tau=100: overage 50 over a single-step budget of 100
    CHECK(context_penalty({150}, {}, 100) == Approx(0.5));
    // 10 over on one of two steps: 10 / (100 * 2)
    CHECK(context_penalty({110, 100}, {}, 100) == Approx(0.05));
    // overflow only counts the part above the line
    CHECK(context_penalty({90, 130}, {}, 100) == Approx(30.0 / 200.0));
}

TEST_CASE("context penalty saturates at one") {
    CHECK(context_penalty({300, 300, 300}, {}, 100) == 1.0);
    std::vector<int> huge(5, 1'000'000);
    CHECK(context_penalty(huge, {}, 10) == 1.0);
}

TEST_CASE("steps that ran a successful compression are exempt from context penalty") {
    // step 1 overflowed but compressed: its overage must not count
    CHECK(context_penalty({150, 150}, {1}, 100) == Approx(50.0 / 200.0));
    CHECK(context_penalty({150}, {0}, 100) == 0.0);
    // exemption never *raises* the penalty
    for (int tau : {50, 100, 200}) {
        std::vector<int> c = {40, 180, 90, 260};
        double all = context_penalty(c, {}, tau);
        for (int i = 0; i < 4; ++i) CHECK(context_penalty(c, {i}, tau) <= all);
    }
}

TEST_CASE("redundancy counts exact repeats with no state change in between") {
    CHECK(redundancy_penalty({env("a"), env("a")}) == Approx(0.5));
    CHECK(count_redundant({env("a"), env("a")}) == 1);
    // a mutating call between the repeats resets the slate
    CHECK(redundancy_penalty({env("a"), env("m", true), env("a")}) == 0.0);
    // the mutating call itself can be the repeat-breaker even with the same signature
    CHECK(count_redundant({env("a", true), env("a", true)}) == 0);
    // three identical reads: two redundant out of three environment calls
    CHECK(redundancy_penalty({env("a"), env("a"), env("a")}) == Approx(2.0 / 3.0));
}

TEST_CASE("memory operations neither count as redundant nor reset the window") {
    // the read between the repeats does not rescue the second call
    std::vector<CallRecord> calls = {env("a"), mem("ReadExperience({\"db_index\": \"x\"})"),
                                     env("a")};
    CHECK(count_redundant(calls) == 1);
    // denominator excludes the memory call: 1 redundant / 2 env calls
    CHECK(redundancy_penalty(calls) == Approx(0.5));
    // identical memory calls back to back are free
    CHECK(redundancy_penalty({mem("r"), mem("r"), mem("r")}) == 0.0);
    CHECK(count_env_calls({mem("r"), env("a"), mem("r")}) == 1);
}

TEST_CASE("redundancy with no environment calls is zero") {
    CHECK(redundancy_penalty({}) == 0.0);
    CHECK(redundancy_penalty({mem("r")}) == 0.0);
}

TEST_CASE("distinct signatures are never redundant") {
    std::vector<CallRecord> calls;
    for (int i = 0; i < 20; ++i) calls.push_back(env("sig" + std::to_string(i)));
    CHECK(count_redundant(calls) == 0);
    CHECK(redundancy_penalty(calls) == 0.0);
}

TEST_CASE("format penalty is malformed regions over attempting steps, capped") {
    CHECK(format_penalty({}) == 0.0);
    CHECK(format_penalty({{false, 0}, {false, 0}}) == 0.0);
    CHECK(format_penalty({{true, 1}, {true, 0}, {true, 0}, {true, 0}}) == Approx(0.25));
    // several malformed regions inside one output can exceed the step count
    CHECK(format_penalty({{true, 2}, {true, 1}}) == 1.0);
    CHECK(format_penalty({{true, 3}}) == 1.0);
    CHECK(format_penalty({{true, 0}}) == 0.0);
}

TEST_CASE("perfect episode earns exactly one") {
    PenaltyBreakdown b = compute_breakdown({50, 60, 70}, {}, {env("a"), env("b", true), env("c")},
                                           {{true, 0}, {true, 0}, {true, 0}}, true, 100);
    CHECK(b.r_task == 1);
    CHECK(b.p_context == 0.0);
    CHECK(b.p_redundancy == 0.0);
    CHECK(b.p_format == 0.0);
    CHECK(b.r_total == 1.0);
    CHECK(b.steps == 3);
    CHECK(b.env_calls == 3);
    CHECK(b.attempt_steps == 3);
}

TEST_CASE("solved episode with a small overflow scores exactly 0.95") {
    PenaltyBreakdown b = compute_breakdown({110, 100}, {}, {env("a"), env("b")},
                                           {{true, 0}, {true, 0}}, true, 100);
    CHECK(b.r_total == Approx(0.95));
    CHECK(b.p_context == Approx(0.05));
}

TEST_CASE("finish without the goal earns no task reward") {
    PenaltyBreakdown b =
        compute_breakdown({10}, {}, {env("finish({\"success\": true})")}, {{true, 0}}, false, 100);
    CHECK(b.r_task == 0);
    CHECK(b.r_total == 0.0);
}

TEST_CASE("penalties clamp to the unit interval and total stays in range") {
    DetRng rng(0x7ea5ed);
    for (int round = 0; round < 300; ++round) {
        int steps = rng.range(1, 30);
        std::vector<int> c;
        std::vector<int> compressed;
        std::vector<CallRecord> calls;
        std::vector<StepFormat> fmt;
        for (int i = 0; i < steps; ++i) {
            c.push_back(rng.below(400));
            if (rng.chance(1, 6)) compressed.push_back(i);
            if (rng.chance(3, 4)) {
                CallRecord r;
                r.signature = "s" + std::to_string(rng.below(5));
                r.is_memory = rng.chance(1, 5);
                r.mutating = !r.is_memory && rng.chance(1, 3);
                calls.push_back(r);
            }
            fmt.push_back(StepFormat{rng.chance(4, 5), rng.below(3)});
        }
        bool success = rng.chance(1, 2);
        int tau = rng.range(20, 200);
        PenaltyBreakdown b = compute_breakdown(c, compressed, calls, fmt, success, tau);
        CHECK(b.p_context >= 0.0);
        CHECK(b.p_context <= 1.0);
        CHECK(b.p_redundancy >= 0.0);
        CHECK(b.p_redundancy <= 1.0);
        CHECK(b.p_format >= 0.0);
        CHECK(b.p_format <= 1.0);
        CHECK(b.r_total <= static_cast<double>(b.r_task));
        CHECK(b.r_total >= static_cast<double>(b.r_task) - 3.0);
        CHECK(b.r_total ==
              static_cast<double>(b.r_task) - b.p_context - b.p_redundancy - b.p_format);
    }
}

TEST_CASE("breakdown JSON round-trips exactly") {
    PenaltyBreakdown b = compute_breakdown({110, 40, 90}, {1}, {env("a"), env("a"), mem("r")},
                                           {{true, 1}, {true, 0}, {false, 0}}, true, 100);
    PenaltyBreakdown back = PenaltyBreakdown::from_json(b.to_json());
    CHECK(back == b);
    CHECK(back.to_json().dump() == b.to_json().dump());
}

TEST_CASE("live counters and from-scratch rescoring agree on chaotic episodes") {
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        auto ep = testutil::run_random_episode(seed);
        const TrajectoryLog& log = ep.result.trajectory;
        REQUIRE(log.has_terminal);
        PenaltyBreakdown rescored = episode_return(log);
        INFO("seed " << seed);
        CHECK(rescored == log.breakdown);
        CHECK(rescored.to_json().dump() == log.breakdown.to_json().dump());
    }
}

TEST_CASE("rescoring honors threshold overrides") {
    auto ep = testutil::run_random_episode(7, /*t_max=*/14, /*tau=*/150);
    const TrajectoryLog& log = ep.result.trajectory;
    PenaltyBreakdown loose = episode_return(log, log.goal, 1'000'000);
    CHECK(loose.p_context == 0.0);
    PenaltyBreakdown tight = episode_return(log, log.goal, 10);
    CHECK(tight.p_context >= loose.p_context);
    TrajectoryLog headless = log;
    headless.has_terminal = false;
    CHECK_THROWS_AS(episode_return(headless), StorageError);
}
