#include <algorithm>
#include <cmath>

#include "disq/oracle.hpp"

namespace disq {

DenseState::DenseState(const QuantumState& phi) : order_(phi.qubits()), amps_(flatten(phi, phi.qubits())) {}

uint32_t DenseState::position(const Qubit& q) const {
    auto it = std::find(order_.begin(), order_.end(), q);
    if (it == order_.end()) throw Error(ErrorKind::UnknownQubit, "dense oracle has no qubit " + q.str());
    return uint32_t(it - order_.begin());
}

void DenseState::add(const std::vector<Qubit>& qs, const std::vector<cplx>& v) {
    if (v.size() != (size_t(1) << qs.size())) throw Error(ErrorKind::Invariant, "dense block has the wrong size");
    std::vector<cplx> out(amps_.size() * v.size());
    for (size_t i = 0; i < amps_.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) out[i * v.size() + j] = amps_[i] * v[j];
    amps_ = std::move(out);
    order_.insert(order_.end(), qs.begin(), qs.end());
}

void DenseState::apply(const Gate& g, const std::vector<Qubit>& qs) {
    if (qs.size() != g.arity) throw Error(ErrorKind::Gate, "gate " + g.str() + " on " + std::to_string(qs.size()) + " qubits");
    const uint32_t n = uint32_t(order_.size()), k = g.arity;
    std::vector<uint32_t> shift(k);
    uint64_t mask = 0;
    for (uint32_t i = 0; i < k; ++i) {
        shift[i] = n - 1 - position(qs[i]);
        mask |= uint64_t(1) << shift[i];
    }
    const auto m = gate_matrix(g);
    const uint64_t dim = uint64_t(1) << k;
    std::vector<cplx> out(amps_.size());
    for (uint64_t x = 0; x < amps_.size(); ++x) {
        if (amps_[x] == cplx(0)) continue;
        uint64_t in = 0;
        for (uint32_t i = 0; i < k; ++i) in = (in << 1) | ((x >> shift[i]) & 1);
        for (uint64_t o = 0; o < dim; ++o) {
            cplx z = m[o * dim + in];
            if (z == cplx(0)) continue;
            uint64_t y = x & ~mask;
            for (uint32_t i = 0; i < k; ++i) y |= ((o >> (k - 1 - i)) & 1) << shift[i];
            out[y] += z * amps_[x];
        }
    }
    amps_ = std::move(out);
}

double DenseState::measure(const std::vector<Qubit>& qs, const Bits& outcome) {
    const uint32_t n = uint32_t(order_.size()), k = uint32_t(qs.size());
    std::vector<uint32_t> shift(k);
    for (uint32_t i = 0; i < k; ++i) shift[i] = n - 1 - position(qs[i]);
    std::vector<Qubit> rest;
    std::vector<uint32_t> rest_shift;
    for (uint32_t p = 0; p < n; ++p)
        if (std::find(qs.begin(), qs.end(), order_[p]) == qs.end()) {
            rest.push_back(order_[p]);
            rest_shift.push_back(n - 1 - p);
        }
    double total = 0, hit = 0;
    std::vector<cplx> out(size_t(1) << rest.size());
    for (uint64_t x = 0; x < amps_.size(); ++x) {
        double w = std::norm(amps_[x]);
        total += w;
        uint64_t d = 0;
        for (uint32_t i = 0; i < k; ++i) d = (d << 1) | ((x >> shift[i]) & 1);
        if (d != outcome.value()) continue;
        hit += w;
        uint64_t y = 0;
        for (uint32_t s : rest_shift) y = (y << 1) | ((x >> s) & 1);
        out[y] = amps_[x];
    }
    if (hit > 0)
        for (auto& z : out) z /= std::sqrt(hit);
    amps_ = std::move(out);
    order_ = std::move(rest);
    return total > 0 ? hit / total : 0;
}

std::vector<cplx> DenseState::amplitudes(const std::vector<Qubit>& order) const {
    if (order.size() != order_.size()) throw Error(ErrorKind::Invariant, "dense readout with a different qubit set");
    const uint32_t n = uint32_t(order.size());
    std::vector<uint32_t> src(n);
    for (uint32_t i = 0; i < n; ++i) src[i] = n - 1 - position(order[i]);
    std::vector<cplx> out(amps_.size());
    for (uint64_t x = 0; x < amps_.size(); ++x) {
        uint64_t y = 0;
        for (uint32_t i = 0; i < n; ++i) y = (y << 1) | ((x >> src[i]) & 1);
        out[y] = amps_[x];
    }
    return out;
}

namespace {

double phase_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx ip = 0;
    for (size_t i = 0; i < a.size(); ++i) ip += std::conj(b[i]) * a[i];
    cplx ph = std::abs(ip) > 1e-15 ? ip / std::abs(ip) : cplx(1);
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - ph * b[i]));
    return m;
}

} // namespace

OracleReport oracle_check(const Trace& tr) {
    OracleReport rep;
    DenseState d(tr.start->state);
    for (const auto& s : tr.steps) {
        const Effect& e = s.t.effect;
        switch (e.kind) {
        case Effect::None: break;
        case Effect::Gate: d.apply(*e.gate, e.qubits); break;
        case Effect::Measure: {
            double p = d.measure(e.qubits, e.outcome);
            rep.max_prob_deviation = std::max(rep.max_prob_deviation, std::abs(p - e.prob));
            break;
        }
        case Effect::NewVar: {
            std::vector<cplx> z(size_t(1) << e.qubits.size());
            z[0] = 1;
            d.add(e.qubits, z);
            break;
        }
        case Effect::NewChan: {
            const double r = 1 / std::sqrt(2.0);
            for (size_t i = 0; i + 1 < e.qubits.size(); i += 2) d.add({e.qubits[i], e.qubits[i + 1]}, {r, 0, 0, r});
            break;
        }
        }
        const auto& phi = s.t.next->state;
        auto order = phi.qubits();
        double dev = phase_distance(flatten(phi, order), d.amplitudes(order));
        rep.per_step.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev);
        ++rep.steps;
    }
    return rep;
}

} // namespace disq
