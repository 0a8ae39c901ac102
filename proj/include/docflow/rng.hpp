#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace docflow {

// Deterministic, platform-stable pseudo randomness. Every stochastic choice
// in the framework derives its stream from a (seed, label...) tuple so that
// runs are reproducible and independent of evaluation order.

inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Small counter-based generator; good enough for fault sampling and fixture
// synthesis, and bit-stable across platforms (unlike std distributions).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    // Uniform integer in [lo, hi] inclusive.
    int64_t next_int(int64_t lo, int64_t hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0); }

    bool chance(double p) { return next_double() < p; }

    template <typename Seq>
    std::size_t pick_index(const Seq& seq) {
        return static_cast<std::size_t>(next_below(seq.size()));
    }

private:
    uint64_t state_;
};

// Derive a child seed from a root seed plus string labels: rng streams for
// (seed, session, turn, step, role) never collide across roles.
inline uint64_t derive_seed(uint64_t root, std::initializer_list<std::string_view> labels) {
    uint64_t h = 0xcbf29ce484222325ULL ^ (root * 0x100000001b3ULL);
    for (auto l : labels) {
        h = fnv1a64(l, h);
        h = fnv1a64("\x1f", h);
    }
    uint64_t s = h;
    return splitmix64(s);
}

} // namespace docflow
