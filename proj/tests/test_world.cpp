#include <catch2/catch_amalgamated.hpp>

#include <regex>
#include <set>

#include "memex/rng.hpp"
#include "memex/world.hpp"

using namespace memex;

namespace {

// scripted solve used by goal tests: walks the world directly
std::vector<std::string> solve_plan(const GeneratedWorld& gw) {
    const WorldState& s = gw.state;
    const TaskSpec& task = gw.task;
    const WorldObject* obj = nullptr;
    for (const auto& o : s.objects)
        if (o.kind == task.object_kind) { obj = &o; break; }
    REQUIRE(obj != nullptr);
    const Receptacle* src = s.find_receptacle(obj->location);
    REQUIRE(src != nullptr);
    const Receptacle* dst = nullptr;
    for (const auto& r : s.receptacles)
        if (r.kind == task.target_kind) { dst = &r; break; }
    REQUIRE(dst != nullptr);

    std::vector<std::string> plan;
    std::string cur = s.agent_location;
    if (src->id != cur) {
        plan.push_back("go to " + src->id);
        cur = src->id;
    }
    if (src->openable) plan.push_back("open " + src->id);
    plan.push_back("pick up " + obj->id);
    if (task.tmpl != TaskTemplate::pick_and_place) {
        const Receptacle* svc = nullptr;
        for (const auto& r : s.receptacles)
            if (r.kind == service_kind_for(task.tmpl)) { svc = &r; break; }
        REQUIRE(svc != nullptr);
        if (svc->id != cur) {
            plan.push_back("go to " + svc->id);
            cur = svc->id;
        }
        const char* verb = task.tmpl == TaskTemplate::pick_clean_then_place ? "clean"
                           : task.tmpl == TaskTemplate::pick_heat_then_place ? "heat"
                                                                             : "cool";
        plan.push_back(std::string(verb) + " " + obj->id + " with " + svc->id);
    }
    if (dst->id != cur) plan.push_back("go to " + dst->id);
    if (dst->openable) plan.push_back("open " + dst->id);
    plan.push_back("put " + obj->id + " in/on " + dst->id);
    return plan;
}

}  // namespace

TEST_CASE("same seed generates the identical world, different seeds differ") {
    for (uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
        GeneratedWorld a = generate_world(seed);
        GeneratedWorld b = generate_world(seed);
        CHECK(world_to_json(a.state) == world_to_json(b.state));
        CHECK(a.task.instruction == b.task.instruction);
    }
    CHECK(world_to_json(generate_world(1).state) != world_to_json(generate_world(2).state));
}

TEST_CASE("every entity id uses the coordinate format") {
    std::regex id_re("^[a-z]+(_bar__(plus|minus)_[0-9]{2}_dot_[0-9]{2}){3}$");
    for (uint64_t seed = 0; seed < 50; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        std::set<std::string> seen;
        for (const auto& r : gw.state.receptacles) {
            CHECK(std::regex_match(r.id, id_re));
            CHECK(r.id.rfind(to_string(r.kind), 0) == 0);
            CHECK(seen.insert(r.id).second);  // unique
        }
        for (const auto& o : gw.state.objects) {
            CHECK(std::regex_match(o.id, id_re));
            CHECK(seen.insert(o.id).second);
        }
    }
}

TEST_CASE("generation respects the documented bounds and invariants") {
    int template_seen[4] = {0, 0, 0, 0};
    for (uint64_t seed = 0; seed < 200; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        const WorldState& s = gw.state;
        ++template_seen[static_cast<int>(gw.task.tmpl)];

        CHECK(s.receptacles.size() >= 6);
        CHECK(s.receptacles.size() <= 13);  // 12 plus the non-target fallback
        CHECK(s.objects.size() >= 4);
        CHECK(s.objects.size() <= 10);
        CHECK(s.inventory.empty());
        CHECK_FALSE(s.look_used);

        // agent starts on a countertop
        const Receptacle* at = s.find_receptacle(s.agent_location);
        REQUIRE(at != nullptr);
        CHECK(at->kind == ReceptacleKind::countertop);

        // the service appliance the template needs exists
        if (gw.task.tmpl != TaskTemplate::pick_and_place) {
            bool has_service = false;
            for (const auto& r : s.receptacles)
                if (r.kind == service_kind_for(gw.task.tmpl)) has_service = true;
            CHECK(has_service);
        }

        bool task_object_exists = false;
        for (const auto& o : s.objects) {
            CHECK_FALSE(o.clean);
            CHECK_FALSE(o.heated);
            CHECK_FALSE(o.cooled);
            const Receptacle* loc = s.find_receptacle(o.location);
            REQUIRE(loc != nullptr);  // all objects start on receptacles
            if (o.kind == gw.task.object_kind) {
                task_object_exists = true;
                CHECK(loc->kind != gw.task.target_kind);
            }
        }
        CHECK(task_object_exists);
        CHECK_FALSE(check_goal(s, gw.task));  // never pre-solved

        // openable receptacles start closed, surfaces open
        for (const auto& r : s.receptacles) {
            CHECK(r.openable == is_openable(r.kind));
            CHECK(r.open == !r.openable);
        }

        CHECK(gw.task.instruction.rfind("Your task is to: ", 0) == 0);
    }
    for (int t = 0; t < 4; ++t) CHECK(template_seen[t] > 20);
}

TEST_CASE("look works once and then refuses") {
    GeneratedWorld gw = generate_world(7);
    ActionResult first = execute_action(gw.state, "look");
    CHECK_FALSE(first.mutating);
    CHECK(first.observation.rfind("You look around the room. Locations:", 0) == 0);
    for (const auto& r : gw.state.receptacles)
        CHECK(first.observation.find(r.id) != std::string::npos);

    ActionResult second = execute_action(gw.state, "look");
    CHECK(second.observation == "You cannot look again.");
    CHECK_FALSE(second.mutating);
}

TEST_CASE("unknown or inadmissible commands do nothing") {
    GeneratedWorld gw = generate_world(9);
    std::string before = world_to_json(gw.state).dump();
    for (const std::string& cmd :
         {"dance", "", "go to nowhere", "go to countertop", "open countertop", "pick up the mug",
          "put mug on desk", "inventory", "look around", "LOOK"}) {
        ActionResult r = execute_action(gw.state, cmd);
        CHECK(r.observation == "Nothing happens.");
        CHECK_FALSE(r.mutating);
    }
    CHECK(world_to_json(gw.state).dump() == before);
}

TEST_CASE("action sequences are deterministic") {
    auto run = [](uint64_t seed) {
        GeneratedWorld gw = generate_world(seed);
        std::string transcript;
        for (const std::string& a : {"look", "go to nowhere", "look"})
            transcript += execute_action(gw.state, a).observation + "|";
        for (const auto& step : solve_plan(generate_world(seed)))
            transcript += execute_action(gw.state, step).observation + "|";
        return transcript + world_to_json(gw.state).dump();
    };
    for (uint64_t seed : {3ull, 14ull, 159ull}) CHECK(run(seed) == run(seed));
}

TEST_CASE("movement, opening and inventory rules") {
    // find a seed whose world has a closed drawer with an object inside
    for (uint64_t seed = 0; seed < 300; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        WorldState& s = gw.state;
        const WorldObject* inside = nullptr;
        for (const auto& o : s.objects) {
            const Receptacle* loc = s.find_receptacle(o.location);
            if (loc && loc->openable) { inside = &o; break; }
        }
        if (!inside) continue;
        std::string rec = inside->location;
        std::string obj = inside->id;

        // picking through a closed door fails
        ActionResult go = execute_action(s, "go to " + rec);
        CHECK(go.mutating);
        CHECK(go.observation.find("is closed") != std::string::npos);
        CHECK(go.observation.find("You arrive at " + rec) == 0);
        CHECK(execute_action(s, "pick up " + obj).observation == "Nothing happens.");
        CHECK(execute_action(s, "examine " + obj).observation == "Nothing happens.");

        ActionResult open = execute_action(s, "open " + rec);
        CHECK(open.mutating);
        CHECK(open.observation.find("You open the " + rec) == 0);
        CHECK(open.observation.find(obj) != std::string::npos);  // contents revealed
        CHECK(execute_action(s, "open " + rec).observation == "Nothing happens.");  // already open

        ActionResult pick = execute_action(s, "pick up " + obj);
        CHECK(pick.mutating);
        CHECK(s.inventory == obj);

        // hands are full now
        for (const auto& o : s.objects) {
            if (o.id == obj) continue;
            CHECK(execute_action(s, "pick up " + o.id).observation == "Nothing happens.");
        }

        // moving to the same place is a no-op
        CHECK(execute_action(s, "go to " + rec).observation == "Nothing happens.");

        ActionResult close = execute_action(s, "close " + rec);
        CHECK(close.observation == "You close the " + rec + ".");
        CHECK(close.mutating);

        // putting into the closed receptacle fails, reopening and putting works
        CHECK(execute_action(s, "put " + obj + " in/on " + rec).observation == "Nothing happens.");
        execute_action(s, "open " + rec);
        ActionResult put = execute_action(s, "put " + obj + " in/on " + rec);
        CHECK(put.observation == "You put the " + obj + " in/on the " + rec + ".");
        CHECK(put.mutating);
        CHECK(s.inventory.empty());
        return;  // one qualifying seed is enough
    }
    FAIL("no seed produced an object inside an openable receptacle");
}

TEST_CASE("service actions require holding the object at the right appliance") {
    for (uint64_t seed = 0; seed < 400; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        if (gw.task.tmpl != TaskTemplate::pick_clean_then_place) continue;
        WorldState& s = gw.state;
        std::vector<std::string> plan = solve_plan(gw);
        // run the plan up to (not including) the clean step
        size_t clean_at = 0;
        for (size_t i = 0; i < plan.size(); ++i)
            if (plan[i].rfind("clean ", 0) == 0) clean_at = i;
        const WorldObject* obj = nullptr;
        for (const auto& o : s.objects)
            if (o.kind == gw.task.object_kind) { obj = &o; break; }

        // cleaning before holding the object fails
        std::string sink;
        for (const auto& r : s.receptacles)
            if (r.kind == ReceptacleKind::sinkbasin) { sink = r.id; break; }
        CHECK(execute_action(s, "clean " + obj->id + " with " + sink).observation ==
              "Nothing happens.");

        for (size_t i = 0; i < clean_at; ++i)
            CHECK(execute_action(s, plan[i]).observation != "Nothing happens.");

        // heat at a sinkbasin fails; clean succeeds and is mutating once
        CHECK(execute_action(s, "heat " + obj->id + " with " + sink).observation ==
              "Nothing happens.");
        ActionResult clean = execute_action(s, plan[clean_at]);
        CHECK(clean.observation == "You clean the " + obj->id + " using the " + sink + ".");
        CHECK(clean.mutating);
        ActionResult again = execute_action(s, plan[clean_at]);
        CHECK(again.observation == clean.observation);
        CHECK_FALSE(again.mutating);  // no state change the second time
        return;
    }
    FAIL("no clean-template seed found");
}

TEST_CASE("scripted solves reach the goal for every template") {
    int solved[4] = {0, 0, 0, 0};
    for (uint64_t seed = 0; seed < 60; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        CHECK_FALSE(check_goal(gw.state, gw.task));
        for (const auto& step : solve_plan(gw)) {
            ActionResult r = execute_action(gw.state, step);
            CHECK(r.observation != "Nothing happens.");
        }
        CHECK(check_goal(gw.state, gw.task));
        ++solved[static_cast<int>(gw.task.tmpl)];
    }
    for (int t = 0; t < 4; ++t) CHECK(solved[t] > 0);
}

TEST_CASE("goal requires the template flag, not just placement") {
    for (uint64_t seed = 0; seed < 400; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        if (gw.task.tmpl != TaskTemplate::pick_heat_then_place) continue;
        std::vector<std::string> plan = solve_plan(gw);
        // skip the heat steps: go directly from pick to place
        WorldState& s = gw.state;
        for (const auto& step : plan) {
            if (step.rfind("heat ", 0) == 0) continue;
            execute_action(s, step);
        }
        CHECK_FALSE(check_goal(s, gw.task));  // placed but cold
        return;
    }
    FAIL("no heat-template seed found");
}

TEST_CASE("examine reports state flags without mutating") {
    for (uint64_t seed = 0; seed < 400; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        if (gw.task.tmpl != TaskTemplate::pick_cool_then_place) continue;
        WorldState& s = gw.state;
        std::vector<std::string> plan = solve_plan(gw);
        for (const auto& step : plan) {
            execute_action(s, step);
            if (step.rfind("cool ", 0) == 0) break;
        }
        const WorldObject* obj = nullptr;
        for (const auto& o : s.objects)
            if (o.kind == gw.task.object_kind) { obj = &o; break; }
        REQUIRE(s.inventory == obj->id);
        ActionResult ex = execute_action(s, "examine " + obj->id);
        CHECK(ex.observation == "This is " + obj->id + ". It is cold.");
        CHECK_FALSE(ex.mutating);
        return;
    }
    FAIL("no cool-template seed found");
}

TEST_CASE("world invariants hold under random valid and invalid actions") {
    DetRng rng(404);
    for (uint64_t seed = 0; seed < 20; ++seed) {
        GeneratedWorld gw = generate_world(seed);
        WorldState& s = gw.state;
        for (int step = 0; step < 200; ++step) {
            std::string action;
            int roll = rng.below(10);
            const Receptacle& r = rng.pick(s.receptacles);
            const WorldObject& o = rng.pick(s.objects);
            switch (roll) {
                case 0: action = "look"; break;
                case 1: action = "go to " + r.id; break;
                case 2: action = "open " + r.id; break;
                case 3: action = "close " + r.id; break;
                case 4: action = "pick up " + o.id; break;
                case 5: action = "put " + o.id + " in/on " + r.id; break;
                case 6: action = "clean " + o.id + " with " + r.id; break;
                case 7: action = "heat " + o.id + " with " + r.id; break;
                case 8: action = "examine " + o.id; break;
                default: action = "scramble " + r.id; break;
            }
            execute_action(s, action);

            // inventory and object locations stay consistent
            int held = 0;
            for (const auto& obj : s.objects) {
                if (obj.location == "inventory")
                    ++held;
                else
                    CHECK(s.find_receptacle(obj.location) != nullptr);
            }
            CHECK(held <= 1);
            CHECK((s.inventory.empty() ? 0 : 1) == held);
            CHECK(s.find_receptacle(s.agent_location) != nullptr);
        }
    }
}
