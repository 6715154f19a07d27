#include "disq/bits.hpp"

#include "disq/error.hpp"

namespace disq {

Bits::Bits(uint64_t value, uint32_t width) : v(value & low_mask(width)), n(width) {
    if (width > kMaxWidth)
        throw Error(ErrorKind::Invariant, "bitstring wider than 64 bits");
}

Bits Bits::parse(std::string_view s) {
    if (s.size() > kMaxWidth)
        throw Error(ErrorKind::Invariant, "bitstring wider than 64 bits");
    uint64_t v = 0;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw Error(ErrorKind::Invariant, "bad bitstring '" + std::string(s) + "'");
        v = (v << 1) | uint64_t(c == '1');
    }
    return Bits(v, uint32_t(s.size()));
}

Bits Bits::prefix(uint32_t k) const {
    if (k > n) throw Error(ErrorKind::Invariant, "prefix longer than bitstring");
    if (k == 0) return Bits(0, 0);
    return Bits(v >> (n - k), k);
}

Bits Bits::suffix_from(uint32_t k) const {
    if (k > n) throw Error(ErrorKind::Invariant, "suffix start beyond bitstring");
    return Bits(v & low_mask(n - k), n - k);
}

Bits Bits::slice(uint32_t from, uint32_t len) const {
    return suffix_from(from).prefix(len);
}

std::string Bits::str() const {
    std::string s(n, '0');
    for (uint32_t i = 0; i < n; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

Bits concat(Bits a, Bits b) {
    if (a.n + b.n > Bits::kMaxWidth)
        throw Error(ErrorKind::Invariant, "bitstring wider than 64 bits");
    uint64_t hi = b.n >= 64 ? 0 : (a.v << b.n);
    return Bits(hi | b.v, a.n + b.n);
}

} // namespace disq
