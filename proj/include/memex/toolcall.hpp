#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace memex {

struct ToolCall {
    std::string name;
    nlohmann::json arguments;
    // Byte span of the whole region in the assistant output, tags included.
    size_t raw_begin = 0;
    size_t raw_end = 0;
};

enum class MalformClass { tag_mismatch, invalid_json, missing_field };

inline const char* to_string(MalformClass c) {
    switch (c) {
        case MalformClass::tag_mismatch: return "tag_mismatch";
        case MalformClass::invalid_json: return "invalid_json";
        default: return "missing_field";
    }
}

struct MalformedRegion {
    MalformClass cls;
    std::string detail;
    size_t raw_begin = 0;
    size_t raw_end = 0;
};

struct ParseOutcome {
    std::string thinking;                    // text outside tool-call regions, concatenated
    std::vector<ToolCall> calls;             // well-formed, in order of appearance
    std::vector<MalformedRegion> malformed;  // each region classified exactly once
};

// Scans assistant output for <tool_call>...</tool_call> regions. Every region
// is either a well-formed call or one malformed region; classification
// precedence is tag mismatch, then invalid JSON, then missing/invalid fields.
inline ParseOutcome parse_assistant_output(std::string_view text) {
    static constexpr std::string_view kOpen = "<tool_call>";
    static constexpr std::string_view kClose = "</tool_call>";

    ParseOutcome out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t open = text.find(kOpen, pos);
        size_t stray_close = text.find(kClose, pos);
        if (stray_close != std::string_view::npos &&
            (open == std::string_view::npos || stray_close < open)) {
            // close tag with no matching open
            out.thinking += text.substr(pos, stray_close - pos);
            out.malformed.push_back(MalformedRegion{MalformClass::tag_mismatch,
                                                    "unmatched </tool_call> tag", stray_close,
                                                    stray_close + kClose.size()});
            pos = stray_close + kClose.size();
            continue;
        }
        if (open == std::string_view::npos) {
            out.thinking += text.substr(pos);
            break;
        }
        out.thinking += text.substr(pos, open - pos);
        size_t body_begin = open + kOpen.size();
        size_t close = text.find(kClose, body_begin);
        if (close == std::string_view::npos) {
            // unterminated call swallows the rest of the output
            out.malformed.push_back(MalformedRegion{MalformClass::tag_mismatch,
                                                    "unterminated <tool_call> tag", open,
                                                    text.size()});
            pos = text.size();
            break;
        }
        size_t region_end = close + kClose.size();
        std::string_view body = text.substr(body_begin, close - body_begin);
        nlohmann::json j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            out.malformed.push_back(MalformedRegion{MalformClass::invalid_json,
                                                    "tool call body is not valid JSON", open,
                                                    region_end});
        } else if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
                   j["name"].get<std::string>().empty()) {
            out.malformed.push_back(MalformedRegion{MalformClass::missing_field,
                                                    "tool call needs a non-empty string 'name'",
                                                    open, region_end});
        } else if (!j.contains("arguments") || !j["arguments"].is_object()) {
            out.malformed.push_back(MalformedRegion{MalformClass::missing_field,
                                                    "tool call needs an object 'arguments'", open,
                                                    region_end});
        } else {
            out.calls.push_back(
                ToolCall{j["name"].get<std::string>(), j["arguments"], open, region_end});
        }
        pos = region_end;
    }
    return out;
}

// Equality key for redundancy detection: name plus arguments serialized with
// sorted keys (nlohmann's default object ordering) in compact form. Two calls
// that differ only in key order or whitespace map to the same signature.
inline std::string canonical_signature(const std::string& name, const nlohmann::json& arguments) {
    return name + "(" + arguments.dump() + ")";
}

inline std::string canonical_signature(const ToolCall& call) {
    return canonical_signature(call.name, call.arguments);
}

namespace detail {
// Compact-with-spaces JSON style used for emitted calls:
// {"name": "finish", "arguments": {"success": true}}
inline void dump_spaced(const nlohmann::json& j, std::string& out) {
    if (j.is_object()) {
        out += '{';
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) out += ", ";
            first = false;
            out += nlohmann::json(key).dump();
            out += ": ";
            dump_spaced(value, out);
        }
        out += '}';
    } else if (j.is_array()) {
        out += '[';
        bool first = true;
        for (const auto& value : j) {
            if (!first) out += ", ";
            first = false;
            dump_spaced(value, out);
        }
        out += ']';
    } else {
        out += j.dump();
    }
}
}  // namespace detail

inline std::string emit_call(const std::string& name, const nlohmann::json& arguments) {
    std::string out = "<tool_call>{\"name\": ";
    out += nlohmann::json(name).dump();
    out += ", \"arguments\": ";
    detail::dump_spaced(arguments, out);
    out += "}</tool_call>";
    return out;
}

inline std::string emit_call(const ToolCall& call) { return emit_call(call.name, call.arguments); }

}  // namespace memex
