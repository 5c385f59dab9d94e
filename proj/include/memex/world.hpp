#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/rng.hpp"

namespace memex {

// Seeded household world. Deliberately stingy with information: the initial
// observation is just the task line, the command vocabulary is never listed,
// and "look" works exactly once per episode.

enum class ReceptacleKind {
    countertop,
    diningtable,
    desk,
    sidetable,
    shelf,
    drawer,
    cabinet,
    fridge,
    microwave,
    sinkbasin,
    garbagecan,
};

enum class ObjectKind { apple, book, bowl, butterknife, cup, mug, pen, plate, potato, tomato };

enum class TaskTemplate { pick_and_place, pick_clean_then_place, pick_heat_then_place, pick_cool_then_place };

inline const char* to_string(ReceptacleKind k) {
    switch (k) {
        case ReceptacleKind::countertop: return "countertop";
        case ReceptacleKind::diningtable: return "diningtable";
        case ReceptacleKind::desk: return "desk";
        case ReceptacleKind::sidetable: return "sidetable";
        case ReceptacleKind::shelf: return "shelf";
        case ReceptacleKind::drawer: return "drawer";
        case ReceptacleKind::cabinet: return "cabinet";
        case ReceptacleKind::fridge: return "fridge";
        case ReceptacleKind::microwave: return "microwave";
        case ReceptacleKind::sinkbasin: return "sinkbasin";
        default: return "garbagecan";
    }
}

inline const char* to_string(ObjectKind k) {
    switch (k) {
        case ObjectKind::apple: return "apple";
        case ObjectKind::book: return "book";
        case ObjectKind::bowl: return "bowl";
        case ObjectKind::butterknife: return "butterknife";
        case ObjectKind::cup: return "cup";
        case ObjectKind::mug: return "mug";
        case ObjectKind::pen: return "pen";
        case ObjectKind::plate: return "plate";
        case ObjectKind::potato: return "potato";
        default: return "tomato";
    }
}

inline const char* to_string(TaskTemplate t) {
    switch (t) {
        case TaskTemplate::pick_and_place: return "pick_and_place";
        case TaskTemplate::pick_clean_then_place: return "pick_clean_then_place";
        case TaskTemplate::pick_heat_then_place: return "pick_heat_then_place";
        default: return "pick_cool_then_place";
    }
}

inline bool is_openable(ReceptacleKind k) {
    return k == ReceptacleKind::drawer || k == ReceptacleKind::cabinet ||
           k == ReceptacleKind::fridge || k == ReceptacleKind::microwave;
}

struct Receptacle {
    std::string id;
    ReceptacleKind kind;
    bool openable = false;
    bool open = true;  // surfaces count as always open
};

struct WorldObject {
    std::string id;
    ObjectKind kind;
    std::string location;  // receptacle id, or "inventory"
    bool clean = false;
    bool heated = false;
    bool cooled = false;
};

struct TaskSpec {
    TaskTemplate tmpl;
    ObjectKind object_kind;
    ReceptacleKind target_kind;
    std::string instruction;
};

struct WorldState {
    std::vector<Receptacle> receptacles;
    std::vector<WorldObject> objects;
    std::string agent_location;
    std::string inventory;  // object id, empty when hands are free
    bool look_used = false;

    const Receptacle* find_receptacle(std::string_view id) const {
        for (const auto& r : receptacles)
            if (r.id == id) return &r;
        return nullptr;
    }
    Receptacle* find_receptacle(std::string_view id) {
        for (auto& r : receptacles)
            if (r.id == id) return &r;
        return nullptr;
    }
    const WorldObject* find_object(std::string_view id) const {
        for (const auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
    WorldObject* find_object(std::string_view id) {
        for (auto& o : objects)
            if (o.id == id) return &o;
        return nullptr;
    }
};

namespace detail {

// IDs look like sinkbasin_bar__plus_01_dot_13_bar__plus_00_dot_00_bar__minus_01_dot_33:
// a kind word plus three fixed-point coordinates.
inline std::string coordinate_id(const char* kind, DetRng& rng) {
    std::string id = kind;
    for (int c = 0; c < 3; ++c) {
        int whole = rng.below(3);
        int frac = rng.below(100);
        id += "_bar__";
        id += rng.chance(1, 2) ? "plus_" : "minus_";
        id += '0';
        id += static_cast<char>('0' + whole);
        id += "_dot_";
        id += static_cast<char>('0' + frac / 10);
        id += static_cast<char>('0' + frac % 10);
    }
    return id;
}

inline std::string fresh_id(const char* kind, DetRng& rng, std::set<std::string>& used) {
    for (;;) {
        std::string id = coordinate_id(kind, rng);
        if (used.insert(id).second) return id;
    }
}

}  // namespace detail

inline ReceptacleKind service_kind_for(TaskTemplate t) {
    switch (t) {
        case TaskTemplate::pick_clean_then_place: return ReceptacleKind::sinkbasin;
        case TaskTemplate::pick_heat_then_place: return ReceptacleKind::microwave;
        case TaskTemplate::pick_cool_then_place: return ReceptacleKind::fridge;
        default: return ReceptacleKind::countertop;  // unused for pick_and_place
    }
}

struct GeneratedWorld {
    WorldState state;
    TaskSpec task;
};

inline GeneratedWorld generate_world(uint64_t seed) {
    DetRng rng(seed);

    static const std::vector<ObjectKind> kAllObjects = {
        ObjectKind::apple, ObjectKind::book,   ObjectKind::bowl, ObjectKind::butterknife,
        ObjectKind::cup,   ObjectKind::mug,    ObjectKind::pen,  ObjectKind::plate,
        ObjectKind::potato, ObjectKind::tomato};
    static const std::vector<ReceptacleKind> kTargets = {
        ReceptacleKind::countertop, ReceptacleKind::diningtable, ReceptacleKind::desk,
        ReceptacleKind::sidetable,  ReceptacleKind::shelf,       ReceptacleKind::drawer,
        ReceptacleKind::cabinet};
    static const std::vector<ReceptacleKind> kAllReceptacles = {
        ReceptacleKind::countertop, ReceptacleKind::diningtable, ReceptacleKind::desk,
        ReceptacleKind::sidetable,  ReceptacleKind::shelf,       ReceptacleKind::drawer,
        ReceptacleKind::cabinet,    ReceptacleKind::fridge,      ReceptacleKind::microwave,
        ReceptacleKind::sinkbasin,  ReceptacleKind::garbagecan};

    TaskSpec task;
    task.tmpl = static_cast<TaskTemplate>(rng.below(4));
    task.object_kind = rng.pick(kAllObjects);
    task.target_kind = rng.pick(kTargets);

    // Required furniture first: a countertop to start on, one target, the
    // service appliance the template needs. Then random fill.
    std::vector<ReceptacleKind> kinds = {ReceptacleKind::countertop, task.target_kind};
    if (task.tmpl != TaskTemplate::pick_and_place) kinds.push_back(service_kind_for(task.tmpl));
    int n_receptacles = rng.range(6, 12);
    while (static_cast<int>(kinds.size()) < n_receptacles) kinds.push_back(rng.pick(kAllReceptacles));
    if (std::all_of(kinds.begin(), kinds.end(),
                    [&](ReceptacleKind k) { return k == task.target_kind; }))
        kinds.push_back(ReceptacleKind::drawer);

    GeneratedWorld out;
    std::set<std::string> used_ids;
    std::string start_id;
    for (ReceptacleKind kind : kinds) {
        Receptacle r;
        r.kind = kind;
        r.id = detail::fresh_id(to_string(kind), rng, used_ids);
        r.openable = is_openable(kind);
        r.open = !r.openable;  // everything openable starts closed
        if (start_id.empty() && kind == ReceptacleKind::countertop) start_id = r.id;
        out.state.receptacles.push_back(std::move(r));
    }
    rng.shuffle(out.state.receptacles);

    std::vector<std::string> non_target_ids;
    for (const auto& r : out.state.receptacles)
        if (r.kind != task.target_kind) non_target_ids.push_back(r.id);

    int n_objects = rng.range(4, 10);
    for (int i = 0; i < n_objects; ++i) {
        WorldObject o;
        o.kind = i == 0 ? task.object_kind : rng.pick(kAllObjects);
        o.id = detail::fresh_id(to_string(o.kind), rng, used_ids);
        // objects of the task kind never start on a target-kind receptacle,
        // so no task is solved before the agent moves
        if (o.kind == task.object_kind)
            o.location = rng.pick(non_target_ids);
        else
            o.location = rng.pick(out.state.receptacles).id;
        out.state.objects.push_back(std::move(o));
    }

    out.state.agent_location = start_id;
    out.state.inventory.clear();
    out.state.look_used = false;

    std::string obj_word = to_string(task.object_kind);
    std::string target_word = to_string(task.target_kind);
    switch (task.tmpl) {
        case TaskTemplate::pick_and_place:
            task.instruction = "Your task is to: put a " + obj_word + " in/on " + target_word + ".";
            break;
        case TaskTemplate::pick_clean_then_place:
            task.instruction =
                "Your task is to: put a clean " + obj_word + " in/on " + target_word + ".";
            break;
        case TaskTemplate::pick_heat_then_place:
            task.instruction =
                "Your task is to: put a hot " + obj_word + " in/on " + target_word + ".";
            break;
        case TaskTemplate::pick_cool_then_place:
            task.instruction =
                "Your task is to: put a cool " + obj_word + " in/on " + target_word + ".";
            break;
    }
    out.task = task;
    return out;
}

struct ActionResult {
    std::string observation;
    bool mutating = false;
};

namespace detail {

inline std::string contents_sentence(const WorldState& s, const Receptacle& r) {
    std::string prep = r.openable ? "In the " : "On the ";
    std::vector<std::string> here;
    for (const auto& o : s.objects)
        if (o.location == r.id) here.push_back(o.id);
    if (here.empty()) return prep + to_string(r.kind) + ", you see nothing.";
    std::string list;
    for (size_t i = 0; i < here.size(); ++i) {
        if (i) list += ", ";
        list += "a " + here[i];
    }
    return prep + to_string(r.kind) + ", you see " + list + ".";
}

inline bool accessible(const Receptacle& r) { return !r.openable || r.open; }

}  // namespace detail

// Single-command interface. Anything that does not match the (unlisted)
// grammar exactly gets the stock brush-off, same as an inadmissible command.
inline ActionResult execute_action(WorldState& s, std::string_view action) {
    static const ActionResult kNothing{"Nothing happens.", false};

    auto strip_prefix = [&](std::string_view prefix) -> std::string_view {
        if (action.substr(0, prefix.size()) == prefix) return action.substr(prefix.size());
        return std::string_view{};
    };

    if (action == "look") {
        if (s.look_used) return {"You cannot look again.", false};
        s.look_used = true;
        std::string obs = "You look around the room. Locations:";
        for (const auto& r : s.receptacles) obs += "\n" + r.id;
        return {obs, false};
    }

    if (auto rest = strip_prefix("go to "); !rest.empty()) {
        Receptacle* r = s.find_receptacle(rest);
        if (!r || s.agent_location == r->id) return kNothing;
        s.agent_location = r->id;
        std::string obs = "You arrive at " + r->id + ". ";
        if (!detail::accessible(*r))
            obs += "The " + std::string(to_string(r->kind)) + " is closed.";
        else
            obs += detail::contents_sentence(s, *r);
        return {obs, true};
    }

    if (auto rest = strip_prefix("open "); !rest.empty()) {
        Receptacle* r = s.find_receptacle(rest);
        if (!r || s.agent_location != r->id || !r->openable || r->open) return kNothing;
        r->open = true;
        return {"You open the " + r->id + ". " + detail::contents_sentence(s, *r), true};
    }

    if (auto rest = strip_prefix("close "); !rest.empty()) {
        Receptacle* r = s.find_receptacle(rest);
        if (!r || s.agent_location != r->id || !r->openable || !r->open) return kNothing;
        r->open = false;
        return {"You close the " + r->id + ".", true};
    }

    if (auto rest = strip_prefix("examine "); !rest.empty()) {
        if (const Receptacle* r = s.find_receptacle(rest)) {
            if (s.agent_location != r->id) return kNothing;
            if (!detail::accessible(*r))
                return {"The " + std::string(to_string(r->kind)) + " is closed.", false};
            return {detail::contents_sentence(s, *r), false};
        }
        if (const WorldObject* o = s.find_object(rest)) {
            bool in_hand = s.inventory == o->id;
            const Receptacle* at = s.find_receptacle(o->location);
            bool visible = in_hand || (at && at->id == s.agent_location && detail::accessible(*at));
            if (!visible) return kNothing;
            std::string obs = "This is " + o->id + ".";
            if (o->clean) obs += " It is clean.";
            if (o->heated) obs += " It is hot.";
            if (o->cooled) obs += " It is cold.";
            return {obs, false};
        }
        return kNothing;
    }

    if (auto rest = strip_prefix("pick up "); !rest.empty()) {
        WorldObject* o = s.find_object(rest);
        if (!o || !s.inventory.empty()) return kNothing;
        const Receptacle* at = s.find_receptacle(o->location);
        if (!at || at->id != s.agent_location || !detail::accessible(*at)) return kNothing;
        o->location = "inventory";
        s.inventory = o->id;
        return {"You pick up the " + o->id + " from the " + at->id + ".", true};
    }

    if (auto rest = strip_prefix("put "); !rest.empty()) {
        size_t sep = rest.find(" in/on ");
        if (sep == std::string_view::npos) return kNothing;
        std::string_view obj_id = rest.substr(0, sep);
        std::string_view rec_id = rest.substr(sep + 7);
        WorldObject* o = s.find_object(obj_id);
        Receptacle* r = s.find_receptacle(rec_id);
        if (!o || !r || s.inventory != o->id || s.agent_location != r->id ||
            !detail::accessible(*r))
            return kNothing;
        o->location = r->id;
        s.inventory.clear();
        return {"You put the " + o->id + " in/on the " + r->id + ".", true};
    }

    auto service = [&](std::string_view rest, ReceptacleKind required, bool WorldObject::*flag,
                       const char* verb) -> ActionResult {
        size_t sep = rest.find(" with ");
        if (sep == std::string_view::npos) return kNothing;
        WorldObject* o = s.find_object(rest.substr(0, sep));
        Receptacle* r = s.find_receptacle(rest.substr(sep + 6));
        if (!o || !r || s.inventory != o->id || s.agent_location != r->id || r->kind != required)
            return kNothing;
        bool changed = !(o->*flag);
        o->*flag = true;
        return {"You " + std::string(verb) + " the " + o->id + " using the " + r->id + ".",
                changed};
    };

    if (auto rest = strip_prefix("clean "); !rest.empty())
        return service(rest, ReceptacleKind::sinkbasin, &WorldObject::clean, "clean");
    if (auto rest = strip_prefix("heat "); !rest.empty())
        return service(rest, ReceptacleKind::microwave, &WorldObject::heated, "heat");
    if (auto rest = strip_prefix("cool "); !rest.empty())
        return service(rest, ReceptacleKind::fridge, &WorldObject::cooled, "cool");

    return kNothing;
}

inline bool check_goal(const WorldState& s, const TaskSpec& task) {
    for (const auto& o : s.objects) {
        if (o.kind != task.object_kind) continue;
        const Receptacle* at = s.find_receptacle(o.location);
        if (!at || at->kind != task.target_kind) continue;
        switch (task.tmpl) {
            case TaskTemplate::pick_and_place: return true;
            case TaskTemplate::pick_clean_then_place:
                if (o.clean) return true;
                break;
            case TaskTemplate::pick_heat_then_place:
                if (o.heated) return true;
                break;
            case TaskTemplate::pick_cool_then_place:
                if (o.cooled) return true;
                break;
        }
    }
    return false;
}

inline nlohmann::json world_to_json(const WorldState& s) {
    nlohmann::json j;
    j["agent_location"] = s.agent_location;
    j["inventory"] = s.inventory;
    j["look_used"] = s.look_used;
    j["receptacles"] = nlohmann::json::array();
    for (const auto& r : s.receptacles)
        j["receptacles"].push_back({{"id", r.id},
                                    {"kind", to_string(r.kind)},
                                    {"openable", r.openable},
                                    {"open", r.open}});
    j["objects"] = nlohmann::json::array();
    for (const auto& o : s.objects)
        j["objects"].push_back({{"id", o.id},
                                {"kind", to_string(o.kind)},
                                {"location", o.location},
                                {"clean", o.clean},
                                {"heated", o.heated},
                                {"cooled", o.cooled}});
    return j;
}

}  // namespace memex
