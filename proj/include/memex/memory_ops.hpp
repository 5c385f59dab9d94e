#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memex/errors.hpp"
#include "memex/message.hpp"
#include "memex/store.hpp"
#include "memex/tokens.hpp"

namespace memex {

// Compact replacement for the working context: a status line plus an index
// map of (store index, one-line description) entries.
struct IndexedSummary {
    std::string status_text;
    std::vector<std::pair<std::string, std::string>> index_map;
};

inline std::string render_summary(const IndexedSummary& s) {
    if (s.index_map.empty()) return s.status_text;
    std::string out = s.status_text;
    if (!out.empty()) out += "\n";
    out += "Index map:";
    for (const auto& [index, description] : s.index_map) {
        out += "\n- " + index + " - " + description;
    }
    return out;
}

// Hard byte-level cut so the rendered summary never exceeds the budget.
// Trailing bytes of a split multi-byte UTF-8 sequence are dropped too.
inline std::string truncate_to_tokens(std::string text, int tau_sigma,
                                      int bytes_per_token = kBytesPerToken) {
    size_t budget = static_cast<size_t>(tau_sigma) * static_cast<size_t>(bytes_per_token);
    if (text.size() <= budget) return text;
    text.resize(budget);
    size_t i = text.size();
    while (i > 0 && (static_cast<unsigned char>(text[i - 1]) & 0xc0) == 0x80) --i;
    if (i > 0) {
        unsigned char lead = static_cast<unsigned char>(text[i - 1]);
        size_t expect = (lead & 0xe0) == 0xc0 ? 2 : (lead & 0xf0) == 0xe0 ? 3
                        : (lead & 0xf8) == 0xf0                          ? 4
                                                                         : 1;
        if (expect > 1 && text.size() - (i - 1) < expect) text.resize(i - 1);
    }
    return text;
}

enum class BlockMode { explicit_content, anchored };

// A unit of archived experience. Either carries its content verbatim, or
// names a span of the current conversation via three anchors; the mid anchor
// is a verification checkpoint that must land inside the span.
struct MemoryBlock {
    std::string index;
    BlockMode mode = BlockMode::explicit_content;
    std::string content;       // explicit_content
    std::string start_anchor;  // anchored
    std::string mid_anchor;
    std::string end_anchor;

    static MemoryBlock explicit_block(std::string index, std::string content) {
        MemoryBlock b;
        b.index = std::move(index);
        b.mode = BlockMode::explicit_content;
        b.content = std::move(content);
        return b;
    }

    static MemoryBlock anchored_block(std::string index, std::string start, std::string mid,
                                      std::string end) {
        MemoryBlock b;
        b.index = std::move(index);
        b.mode = BlockMode::anchored;
        b.start_anchor = std::move(start);
        b.mid_anchor = std::move(mid);
        b.end_anchor = std::move(end);
        return b;
    }
};

struct SpanResult {
    std::string text;
    bool ambiguous_start = false;  // start anchor matched more than once before the end
};

// Extracts the contiguous byte span [first start_anchor .. first end_anchor
// after it], inclusive of both anchors. The mid anchor must occur fully
// inside the span between the two; ambiguous starts are resolved to the first
// match and reported, not failed.
inline SpanResult extract_span(std::string_view document, std::string_view start_anchor,
                               std::string_view mid_anchor, std::string_view end_anchor) {
    if (start_anchor.empty())
        throw AnchorNotFoundError(Anchor::start, "extract_span: empty start anchor");
    if (mid_anchor.empty())
        throw MidAnchorVerificationError("extract_span: empty mid anchor");
    if (end_anchor.empty())
        throw AnchorNotFoundError(Anchor::end, "extract_span: empty end anchor");

    size_t start_pos = document.find(start_anchor);
    if (start_pos == std::string_view::npos)
        throw AnchorNotFoundError(Anchor::start,
                                  "extract_span: start anchor not found in document");
    size_t inner_begin = start_pos + start_anchor.size();
    size_t end_pos = document.find(end_anchor, inner_begin);
    if (end_pos == std::string_view::npos)
        throw AnchorNotFoundError(Anchor::end,
                                  "extract_span: end anchor not found after start anchor");
    size_t span_end = end_pos + end_anchor.size();

    size_t mid_pos = document.find(mid_anchor, inner_begin);
    if (mid_pos == std::string_view::npos || mid_pos + mid_anchor.size() > end_pos)
        throw MidAnchorVerificationError(
            "extract_span: mid anchor does not occur between start and end anchors");

    SpanResult out;
    out.text = std::string(document.substr(start_pos, span_end - start_pos));
    // count start-anchor occurrences that begin before the end anchor
    int occurrences = 0;
    for (size_t p = document.find(start_anchor); p != std::string_view::npos && p < end_pos;
         p = document.find(start_anchor, p + 1)) {
        if (++occurrences > 1) break;
    }
    out.ambiguous_start = occurrences > 1;
    return out;
}

// The document anchored blocks cut from: every message payload past the
// protected prefix' start, joined with newlines. Includes the prefix itself
// so anchors can reference the task text.
inline std::string serialize_for_anchors(const ContextWindow& window) {
    std::string doc;
    for (size_t i = 0; i < window.size(); ++i) {
        if (i) doc += "\n";
        doc += window.at(i).payload;
    }
    return doc;
}

struct ArchivedBlock {
    std::string index;
    size_t bytes = 0;
};

struct CompressOutcome {
    bool ok = false;
    std::string error;                   // failure cause when !ok
    std::vector<ArchivedBlock> archived; // in block order
    std::vector<std::string> warnings;   // e.g. ambiguous anchors
    std::string observation;             // success observation text
};

// Archives the given blocks into the store, then rewrites the window down to
// [m0, u, summary]. All-or-nothing: any bad block leaves window and store
// untouched and reports the cause instead.
inline CompressOutcome compress_experience(ContextWindow& window, ExperienceStore& store,
                                           const IndexedSummary& summary,
                                           const std::vector<MemoryBlock>& blocks, int tau_sigma,
                                           int step = 0) {
    CompressOutcome out;
    std::string document = serialize_for_anchors(window);

    // stage every write before touching real state
    std::vector<std::pair<std::string, std::string>> staged;
    for (const auto& block : blocks) {
        if (block.index.empty()) {
            out.error = "block has an empty index";
            return out;
        }
        if (block.mode == BlockMode::explicit_content) {
            staged.emplace_back(block.index, block.content);
            continue;
        }
        try {
            SpanResult span =
                extract_span(document, block.start_anchor, block.mid_anchor, block.end_anchor);
            if (span.ambiguous_start)
                out.warnings.push_back("block '" + block.index +
                                       "': start anchor is ambiguous; first match used");
            staged.emplace_back(block.index, std::move(span.text));
        } catch (const AnchorNotFoundError& e) {
            out.error = "block '" + block.index + "': " + std::string(anchor_name(e.which())) +
                        " anchor not found";
            out.warnings.clear();
            return out;
        } catch (const MidAnchorVerificationError&) {
            out.error = "block '" + block.index + "': mid anchor verification failed";
            out.warnings.clear();
            return out;
        }
    }

    for (auto& [index, content] : staged) {
        out.archived.push_back(ArchivedBlock{index, content.size()});
        store.put(index, std::move(content), step);
    }

    std::string rendered = truncate_to_tokens(render_summary(summary), tau_sigma);
    window.rewrite_working(Message::make(Role::assistant, MessageKind::indexed_summary, rendered));

    std::string indices = "[";
    for (size_t i = 0; i < out.archived.size(); ++i) {
        if (i) indices += ", ";
        indices += out.archived[i].index;
    }
    indices += "]";
    out.observation = "Compression complete. Archived " + std::to_string(out.archived.size()) +
                      " blocks: " + indices + ".";
    out.ok = true;
    return out;
}

struct ReadOutcome {
    bool hit = false;
    std::string observation;  // block content on hit, error text on miss
};

// Dereferences an index into the working context. A hit appends the stored
// content as a retrieved block; a miss appends an error observation listing
// the known indices and leaves the store untouched either way.
inline ReadOutcome read_experience(ContextWindow& window, const ExperienceStore& store,
                                   const std::string& index) {
    ReadOutcome out;
    if (store.contains(index)) {
        out.hit = true;
        out.observation = store.get(index);
        window.append(Message::make(Role::tool, MessageKind::retrieved_block, out.observation));
        return out;
    }
    std::string known = "[";
    bool first = true;
    for (const auto& k : store.indices()) {
        if (!first) known += ", ";
        first = false;
        known += k;
    }
    known += "]";
    out.observation = "Error: index '" + index + "' not found. Known: " + known;
    window.append(Message::make(Role::tool, MessageKind::tool_output, out.observation));
    return out;
}

}  // namespace memex
