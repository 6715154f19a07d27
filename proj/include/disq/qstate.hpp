#pragma once

#include <array>
#include <complex>
#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "disq/bits.hpp"

namespace disq {

using cplx = std::complex<double>;

inline constexpr double kDropTol = 1e-12;
inline constexpr double kCompareTol = 1e-9;

struct Qubit {
    std::string loc;
    std::string var;
    int index = 0;

    std::string str() const;
    friend bool operator==(const Qubit&, const Qubit&) = default;
    friend auto operator<=>(const Qubit&, const Qubit&) = default;
};

struct Range {
    std::string var;
    int lo = 0;
    int hi = 0;

    int width() const { return hi - lo; }
    bool empty() const { return lo == hi; }
    std::string str() const;
    friend bool operator==(const Range&, const Range&) = default;
};

struct LocalLocus {
    std::vector<Range> ranges;

    int width() const;
    std::vector<Qubit> qubits(const std::string& loc) const;
    std::string str() const;
    // drops empty ranges and merges adjacent contiguous ranges of one array
    LocalLocus merged() const;
    friend bool operator==(const LocalLocus&, const LocalLocus&) = default;
};

struct Fragment {
    LocalLocus local;
    std::string loc;
    friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct Locus {
    std::vector<Fragment> fragments;

    static Locus from_qubits(const std::vector<Qubit>& qs);
    std::vector<Qubit> qubits() const;
    int width() const;
    bool empty() const { return width() == 0; }
    std::string str() const;
    // equality of the qubit sequences, independent of range splitting
    bool same_as(const Locus& o) const { return qubits() == o.qubits(); }
    friend bool operator==(const Locus&, const Locus&) = default;
};

class FrozenStack {
public:
    static constexpr size_t kCapacity = 4;

    size_t depth() const { return depth_; }
    bool empty() const { return depth_ == 0; }
    const Bits& top() const;
    const Bits& at(size_t i) const { return items_[i]; }  // 0 = bottom
    void push(Bits b);
    Bits pop();

    friend bool operator==(const FrozenStack& a, const FrozenStack& b);
    friend std::strong_ordering operator<=>(const FrozenStack& a, const FrozenStack& b);

private:
    std::array<Bits, kCapacity> items_{};
    uint8_t depth_ = 0;
};

struct BasisKet {
    cplx amp;
    Bits basis;
    FrozenStack frozen;
};

struct QuantumValue {
    std::vector<BasisKet> kets;
    uint32_t width = 0;

    static QuantumValue basis_state(Bits b);
    // a width-0 value holding one ket of amplitude 1
    static QuantumValue unit();
    static QuantumValue from_dense(const std::vector<cplx>& amps, uint32_t width);
    std::vector<cplx> to_dense() const;
    bool has_frozen() const;
};

QuantumValue canonicalize(QuantumValue v);
double norm2(const QuantumValue& v);
// Value equality after canonicalization, amplitudes within tol.
bool approx_equal(const QuantumValue& a, const QuantumValue& b, double tol = kCompareTol);

QuantumValue permute(const QuantumValue& v, uint32_t prefix_width, uint32_t w1, uint32_t w2);
// New position i holds old position perm[i]; perm is a permutation of [0, width).
QuantumValue reorder(const QuantumValue& v, const std::vector<uint32_t>& perm);
QuantumValue join(const QuantumValue& v1, const QuantumValue& v2);
std::optional<std::pair<QuantumValue, QuantumValue>> split(const QuantumValue& v, uint32_t w);
QuantumValue freeze(const QuantumValue& v, uint32_t n);
QuantumValue unfreeze(const QuantumValue& v, uint32_t n);

struct Entry {
    Locus locus;
    QuantumValue value;
};

struct QuantumState {
    std::vector<Entry> entries;

    std::optional<size_t> find(const Qubit& q) const;
    std::vector<Qubit> qubits() const;
    size_t qubit_count() const;
};

struct PrefixRewrite {
    QuantumState state;
    Locus locus;   // full locus of the rewritten entry, beginning with the target
    size_t entry = 0;
};

PrefixRewrite rewrite_to_prefix(const QuantumState& phi, const Locus& target);
// Permutes one entry so its qubits follow `order` (a permutation of the entry's qubits).
QuantumState reorder_entry(const QuantumState& phi, size_t entry, const std::vector<Qubit>& order);
std::vector<cplx> flatten(const QuantumState& phi, const std::vector<Qubit>& qubit_order);
// Sorts qubits inside each entry and the entries themselves; meaning unchanged.
QuantumState canonical_state(const QuantumState& phi);

nlohmann::json to_json(const QuantumValue& v);
nlohmann::json to_json(const QuantumState& phi);

} // namespace disq
