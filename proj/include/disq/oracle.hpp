#pragma once

#include <vector>

#include "disq/semantics.hpp"

namespace disq {

// Plain state-vector simulator over named qubits, used to cross-check the symbolic interpreter.
class DenseState {
public:
    DenseState() : amps_{1.0} {}
    explicit DenseState(const QuantumState& phi);

    const std::vector<Qubit>& qubits() const { return order_; }
    // Tensors fresh qubits onto the right.
    void add(const std::vector<Qubit>& qs, const std::vector<cplx>& v);
    void apply(const Gate& g, const std::vector<Qubit>& qs);
    // Projects onto `outcome`, renormalizes, drops the qubits; returns the outcome probability.
    double measure(const std::vector<Qubit>& qs, const Bits& outcome);
    std::vector<cplx> amplitudes(const std::vector<Qubit>& order) const;

private:
    uint32_t position(const Qubit& q) const;

    std::vector<Qubit> order_;
    std::vector<cplx> amps_;
};

struct OracleReport {
    double max_deviation = 0;       // amplitude distance up to global phase
    double max_prob_deviation = 0;  // measurement probabilities
    size_t steps = 0;
    std::vector<double> per_step;
};

// Replays every effect of the trace on a dense vector and compares after each step.
OracleReport oracle_check(const Trace& tr);

} // namespace disq
