#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "disq/qstate.hpp"

namespace disq {

using GateRow = std::vector<std::pair<cplx, uint64_t>>;

struct Gate {
    std::string name;
    uint32_t arity = 0;
    std::vector<int64_t> params;
    std::function<GateRow(uint64_t)> action;

    // image of an arity-bit basis state, as (amplitude, output basis) pairs
    const GateRow& row(uint64_t in) const;
    std::string str() const;

private:
    friend std::shared_ptr<const Gate> make_gate(const std::string&, const std::vector<int64_t>&, uint32_t);
    std::vector<GateRow> table_;
};

using GatePtr = std::shared_ptr<const Gate>;

struct GateSpec {
    std::string name;
    size_t param_count = 0;
    // fixed arity, or 0 when the gate spans its whole locus
    uint32_t fixed_arity = 0;
    uint32_t min_width = 1;
    std::string doc;
};

const std::map<std::string, GateSpec>& builtin_catalog();
bool is_gate_name(const std::string& name);

// Instantiates a catalog gate for a locus of the given width; results are cached.
GatePtr make_gate(const std::string& name, const std::vector<int64_t>& params, uint32_t width);

QuantumValue apply_gate(const Gate& g, const QuantumValue& v);

// 2^n x 2^n matrix of the gate, row-major by output index.
std::vector<cplx> gate_matrix(const Gate& g);

} // namespace disq
