#pragma once

#include <cstdint>
#include <vector>

namespace memex {

// Deterministic splitmix64 generator. std::uniform_int_distribution is
// implementation-defined, so anything that must be bit-stable across
// toolchains (world generation, fuzz corpora) goes through this instead.
class DetRng {
public:
    explicit DetRng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0. Modulo bias is irrelevant here
    // (n is tiny against 2^64) and the simple form keeps results portable.
    int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }

    int range(int lo, int hi) { return lo + below(hi - lo + 1); }  // inclusive

    bool chance(int num, int den) { return below(den) < num; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(static_cast<int>(v.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = below(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace memex
