#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memex/errors.hpp"

namespace memex {

struct WriteEvent {
    int step = 0;
    std::string index;
    size_t bytes = 0;

    bool operator==(const WriteEvent&) const = default;
};

// Full-fidelity external archive D: index -> content, plus an append-only
// write log. Overwrites are last-writer-wins and every put is logged.
class ExperienceStore {
public:
    void put(const std::string& index, std::string content, int step = 0) {
        if (index.empty()) throw InvalidIndexError("put: index must be non-empty");
        write_log_.push_back(WriteEvent{step, index, content.size()});
        entries_[index] = std::move(content);
    }

    const std::string& get(const std::string& index) const {
        auto it = entries_.find(index);
        if (it == entries_.end())
            throw IndexNotFoundError(index, indices(),
                                     "get: index '" + index + "' not found");
        return it->second;
    }

    bool contains(const std::string& index) const { return entries_.count(index) > 0; }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    std::vector<std::string> indices() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& [k, _] : entries_) out.push_back(k);  // std::map: already sorted
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::vector<WriteEvent>& write_log() const { return write_log_; }

    bool operator==(const ExperienceStore&) const = default;

    // One {"index","content"} object per line; the write log goes to a
    // sibling "<path>.log" file so a round trip preserves it.
    void persist(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("persist: cannot open '" + path.string() + "'");
        for (const auto& [index, content] : entries_) {
            nlohmann::json line = {{"index", index}, {"content", content}};
            out << line.dump() << "\n";
        }
        if (!out) throw StorageError("persist: write failed for '" + path.string() + "'");

        std::filesystem::path log_path = path;
        log_path += ".log";
        std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
        if (!log) throw StorageError("persist: cannot open '" + log_path.string() + "'");
        for (const auto& ev : write_log_) {
            nlohmann::json line = {{"step", ev.step}, {"index", ev.index}, {"bytes", ev.bytes}};
            log << line.dump() << "\n";
        }
        if (!log) throw StorageError("persist: write failed for '" + log_path.string() + "'");
    }

    static ExperienceStore load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw StorageError("load: cannot open '" + path.string() + "'");
        ExperienceStore store;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (j.is_discarded() || !j.is_object() || !j.contains("index") ||
                !j.contains("content") || !j["index"].is_string() || !j["content"].is_string())
                throw StorageError("load: corrupt entry at " + path.string() + ":" +
                                   std::to_string(lineno));
            std::string index = j["index"].get<std::string>();
            if (index.empty())
                throw StorageError("load: empty index at " + path.string() + ":" +
                                   std::to_string(lineno));
            store.entries_[index] = j["content"].get<std::string>();
        }

        std::filesystem::path log_path = path;
        log_path += ".log";
        std::ifstream log(log_path, std::ios::binary);
        if (!log) throw StorageError("load: cannot open '" + log_path.string() + "'");
        lineno = 0;
        while (std::getline(log, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("step") ||
                !j.contains("index") || !j.contains("bytes") ||
                !j["step"].is_number_integer() || !j["index"].is_string() ||
                !j["bytes"].is_number_unsigned())
                throw StorageError("load: corrupt write log at " + log_path.string() + ":" +
                                   std::to_string(lineno));
            store.write_log_.push_back(WriteEvent{j["step"].get<int>(),
                                                  j["index"].get<std::string>(),
                                                  j["bytes"].get<size_t>()});
        }
        return store;
    }

private:
    std::map<std::string, std::string> entries_;
    std::vector<WriteEvent> write_log_;
};

}  // namespace memex
