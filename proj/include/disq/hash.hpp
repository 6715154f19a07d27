#pragma once

#include <cstdint>
#include <string_view>

namespace disq {

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Two independent 64-bit streams, combined into a 128-bit fingerprint.
class Hasher128 {
public:
    void add(uint64_t v) {
        a_ = mix64(a_ ^ v);
        b_ = mix64(b_ + (v * 0xff51afd7ed558ccdull) + 0x632be59bd9b4e019ull);
    }
    void add(std::string_view s) {
        add(fnv1a(s));
        add(uint64_t(s.size()));
    }
    uint64_t hi() const { return a_; }
    uint64_t lo() const { return b_; }

private:
    uint64_t a_ = 0x243f6a8885a308d3ull;
    uint64_t b_ = 0x13198a2e03707344ull;
};

} // namespace disq
