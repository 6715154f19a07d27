#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace disq {

// Fixed-width bitstring, at most 64 bits. Position 0 is the leftmost bit and
// the stored integer is the big-endian reading of the string.
struct Bits {
    uint64_t v = 0;
    uint32_t n = 0;

    static constexpr uint32_t kMaxWidth = 64;

    Bits() = default;
    Bits(uint64_t value, uint32_t width);

    static Bits parse(std::string_view s);

    bool get(uint32_t i) const { return (v >> (n - 1 - i)) & 1u; }
    Bits prefix(uint32_t k) const;
    Bits suffix_from(uint32_t k) const;
    Bits slice(uint32_t from, uint32_t len) const;
    uint64_t value() const { return v; }
    std::string str() const;

    friend Bits concat(Bits a, Bits b);
    friend bool operator==(const Bits&, const Bits&) = default;
    friend auto operator<=>(const Bits& a, const Bits& b) {
        // lexicographic order of the strings
        if (a.n == b.n) return a.v <=> b.v;
        uint32_t m = a.n < b.n ? a.n : b.n;
        auto c = a.prefix(m).v <=> b.prefix(m).v;
        if (c != 0) return c;
        return a.n <=> b.n;
    }
};

Bits concat(Bits a, Bits b);

inline uint64_t low_mask(uint32_t k) { return k >= 64 ? ~0ull : ((1ull << k) - 1); }

} // namespace disq
