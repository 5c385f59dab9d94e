#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/errors.hpp"
#include "memex/trajectory.hpp"

namespace memex {

struct SegmentStep {
    std::string assistant;
    bool has_observation = false;
    std::string observation;

    bool operator==(const SegmentStep&) const = default;
};

// One training sample: a context prefix plus the (action, observation) tuples
// that lived in the window during that stretch of the episode.
struct SegmentRecord {
    std::string traj_id;
    int segment_index = 0;
    std::string group_id;
    double reward = 0.0;
    std::vector<std::string> prefix;  // [system, task] or [system, task, summary]
    std::vector<SegmentStep> steps;

    bool operator==(const SegmentRecord&) const = default;
};

// Splits an episode at its successful compressions: k compressions make k+1
// segments. The compression call closes its segment as the final tuple with
// the observation dropped, and the summary it produced opens the next
// segment's prefix. Every segment inherits the episode's terminal reward.
inline std::vector<SegmentRecord> segment_trajectory(const TrajectoryLog& log,
                                                     const std::string& group_id = "") {
    if (!log.has_terminal)
        throw SegmentationError("segment_trajectory: trajectory has no terminal record");
    for (size_t i = 0; i < log.steps.size(); ++i)
        if (log.steps[i].t != static_cast<int>(i) + 1)
            throw SegmentationError("segment_trajectory: non-contiguous step numbers");

    std::vector<SegmentRecord> out;
    SegmentRecord current;
    current.traj_id = log.traj_id;
    current.group_id = group_id;
    current.reward = log.breakdown.r_total;
    current.prefix = {log.system_prompt, log.task};

    auto close = [&](std::vector<std::string> next_prefix) {
        current.segment_index = static_cast<int>(out.size());
        out.push_back(current);
        current.steps.clear();
        current.prefix = std::move(next_prefix);
    };

    for (const StepRecord& s : log.steps) {
        if (s.compressed) {
            current.steps.push_back(SegmentStep{s.assistant, false, ""});
            close({log.system_prompt, log.task, s.summary});
        } else {
            current.steps.push_back(SegmentStep{s.assistant, s.has_observation, s.observation});
        }
    }
    close({});
    return out;
}

inline void export_segments(const std::vector<SegmentRecord>& segments, std::ostream& out) {
    for (const auto& seg : segments) {
        nlohmann::json j;
        j["type"] = "segment";
        j["traj_id"] = seg.traj_id;
        j["segment_index"] = seg.segment_index;
        j["group_id"] = seg.group_id;
        j["reward"] = seg.reward;
        j["prefix"] = seg.prefix;
        j["steps"] = nlohmann::json::array();
        for (const auto& st : seg.steps) {
            nlohmann::json sj;
            sj["assistant"] = st.assistant;
            if (st.has_observation)
                sj["observation"] = st.observation;
            else
                sj["observation"] = nullptr;
            j["steps"].push_back(std::move(sj));
        }
        out << j.dump() << "\n";
    }
}

inline void export_segments(const std::vector<SegmentRecord>& segments,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot open segment file '" + path.string() + "'");
    export_segments(segments, out);
    if (!out) throw StorageError("failed writing segment file '" + path.string() + "'");
}

inline std::vector<SegmentRecord> import_segments(std::istream& in,
                                                  const std::string& origin = "<stream>") {
    std::vector<SegmentRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object() || j.value("type", "") != "segment")
            throw StorageError("bad segment line at " + origin + ":" + std::to_string(lineno));
        try {
            SegmentRecord seg;
            seg.traj_id = j.at("traj_id").get<std::string>();
            seg.segment_index = j.at("segment_index").get<int>();
            seg.group_id = j.at("group_id").get<std::string>();
            seg.reward = j.at("reward").get<double>();
            seg.prefix = j.at("prefix").get<std::vector<std::string>>();
            for (const auto& sj : j.at("steps")) {
                SegmentStep st;
                st.assistant = sj.at("assistant").get<std::string>();
                st.has_observation = !sj.at("observation").is_null();
                if (st.has_observation) st.observation = sj.at("observation").get<std::string>();
                seg.steps.push_back(std::move(st));
            }
            out.push_back(std::move(seg));
        } catch (const nlohmann::json::exception& e) {
            throw StorageError("bad segment record at " + origin + ":" + std::to_string(lineno) +
                               ": " + e.what());
        }
    }
    return out;
}

inline std::vector<SegmentRecord> import_segments(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open segment file '" + path.string() + "'");
    return import_segments(in, path.string());
}

}  // namespace memex
