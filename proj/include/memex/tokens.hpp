#pragma once

#include <string_view>

namespace memex {

// Stand-in tokenizer: ceil(bytes / bytes_per_token). Deterministic and
// monotone in length, which is all the accounting needs.
inline constexpr int kBytesPerToken = 4;

inline int count_tokens(std::string_view text, int bytes_per_token = kBytesPerToken) {
    return static_cast<int>((text.size() + static_cast<size_t>(bytes_per_token) - 1) /
                            static_cast<size_t>(bytes_per_token));
}

}  // namespace memex
