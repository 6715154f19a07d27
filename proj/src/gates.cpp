#include "disq/gates.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "disq/error.hpp"

namespace disq {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

cplx root_of_unity(uint64_t k, uint64_t n) {
    // e^{2 pi i k / n}
    return std::polar(1.0, 2.0 * std::numbers::pi * double(k % n) / double(n));
}

uint64_t reverse_bits(uint64_t x, uint32_t n) {
    uint64_t r = 0;
    for (uint32_t i = 0; i < n; ++i) r = (r << 1) | ((x >> i) & 1u);
    return r;
}

bool bit(uint64_t x, uint32_t n, uint32_t i) { return (x >> (n - 1 - i)) & 1u; }

uint64_t flip(uint64_t x, uint32_t n, uint32_t i) { return x ^ (uint64_t(1) << (n - 1 - i)); }

// phase of SR(m) on a register of width w: wire k <= m gets RZ(m + 1 - k)
cplx sr_phase(uint64_t x, uint32_t w, int64_t m) {
    cplx z(1.0);
    for (uint32_t k = 0; k < w && int64_t(k) <= m; ++k)
        if (bit(x, w, k)) z *= root_of_unity(1, uint64_t(1) << (m + 1 - k));
    return z;
}

GateRow single(uint64_t out) { return {{cplx(1.0), out}}; }

std::function<GateRow(uint64_t)> action_for(const std::string& name, const std::vector<int64_t>& p, uint32_t n) {
    if (name == "H")
        return [](uint64_t x) {
            return GateRow{{cplx(kInvSqrt2), 0}, {cplx(x ? -kInvSqrt2 : kInvSqrt2), 1}};
        };
    if (name == "X") return [](uint64_t x) { return single(x ^ 1u); };
    if (name == "Z") return [](uint64_t x) { return GateRow{{cplx(x ? -1.0 : 1.0), x}}; };
    if (name == "CX") return [](uint64_t x) { return single(x & 2u ? x ^ 1u : x); };
    if (name == "CZ") return [](uint64_t x) { return GateRow{{cplx(x == 3 ? -1.0 : 1.0), x}}; };
    if (name == "RZ") {
        const int64_t m = p[0];
        return [m](uint64_t x) {
            return GateRow{{x ? root_of_unity(1, uint64_t(1) << m) : cplx(1.0), x}};
        };
    }
    if (name == "SR") {
        const int64_t m = p[0];
        return [m, n](uint64_t x) { return GateRow{{sr_phase(x, n, m), x}}; };
    }
    if (name == "CSR") {
        const int64_t m = p[0];
        return [m, n](uint64_t x) {
            cplx z = bit(x, n, 0) ? sr_phase(x & low_mask(n - 1), n - 1, m) : cplx(1.0);
            return GateRow{{z, x}};
        };
    }
    if (name == "QFT" || name == "QFTinv") {
        const bool inv = name == "QFTinv";
        return [n, inv](uint64_t x) {
            const uint64_t dim = uint64_t(1) << n;
            const double s = 1.0 / std::sqrt(double(dim));
            GateRow row;
            row.reserve(dim);
            for (uint64_t k = 0; k < dim; ++k) {
                // forward: |y> -> sum_k w^{y rev(k)} |k>; inverse is the adjoint
                uint64_t e = (inv ? reverse_bits(x, n) * k : x * reverse_bits(k, n)) % dim;
                if (inv) e = (dim - e) % dim;
                row.push_back({s * root_of_unity(e, dim), k});
            }
            return row;
        };
    }
    if (name == "MAJ")
        return [](uint64_t v) {
            // wires (x, y, t): CX t->y, CX t->x, CCX x,y->t
            if (bit(v, 3, 2)) v = flip(flip(v, 3, 1), 3, 0);
            if (bit(v, 3, 0) && bit(v, 3, 1)) v = flip(v, 3, 2);
            return single(v);
        };
    if (name == "UMA")
        return [](uint64_t v) {
            // wires (x, y, t): CCX x,y->t, CX t->x, CX x->y
            if (bit(v, 3, 0) && bit(v, 3, 1)) v = flip(v, 3, 2);
            if (bit(v, 3, 2)) v = flip(v, 3, 0);
            if (bit(v, 3, 0)) v = flip(v, 3, 1);
            return single(v);
        };
    if (name == "CU") {
        const uint64_t a = uint64_t(p[0]), modn = uint64_t(p[1]);
        return [a, modn, n](uint64_t x) {
            if (!bit(x, n, 0)) return single(x);
            const uint64_t y = x & low_mask(n - 1);
            if (y >= modn) return single(x);
            const uint64_t ctl = uint64_t(1) << (n - 1);
            return single(ctl | ((a * y) % modn));
        };
    }
    throw Error(ErrorKind::Gate, "unknown gate " + name);
}

} // namespace

const std::map<std::string, GateSpec>& builtin_catalog() {
    static const std::map<std::string, GateSpec> cat = {
        {"H", {"H", 0, 1, 1, "Hadamard"}},
        {"X", {"X", 0, 1, 1, "Pauli X"}},
        {"Z", {"Z", 0, 1, 1, "Pauli Z"}},
        {"CX", {"CX", 0, 2, 2, "controlled X, control first"}},
        {"CZ", {"CZ", 0, 2, 2, "controlled Z"}},
        {"RZ", {"RZ", 1, 1, 1, "phase e^{2 pi i / 2^m} on |1>"}},
        {"SR", {"SR", 1, 0, 1, "RZ(m+1), RZ(m), ..., RZ(1) down the register"}},
        {"CSR", {"CSR", 1, 0, 2, "controlled SR, control first"}},
        {"QFT", {"QFT", 0, 0, 1, "quantum Fourier transform without output reversal"}},
        {"QFTinv", {"QFTinv", 0, 0, 1, "inverse of QFT"}},
        {"MAJ", {"MAJ", 0, 3, 3, "Cuccaro majority"}},
        {"UMA", {"UMA", 0, 3, 3, "Cuccaro unmajority-and-add"}},
        {"CU", {"CU", 2, 0, 2, "controlled multiply by a mod N"}},
    };
    return cat;
}

bool is_gate_name(const std::string& name) { return builtin_catalog().count(name) != 0; }

const GateRow& Gate::row(uint64_t in) const {
    if (in < table_.size()) return table_[in];
    thread_local GateRow scratch;
    scratch = action(in);
    return scratch;
}

std::string Gate::str() const {
    std::string s = name;
    if (!params.empty()) {
        s += "(";
        for (size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + std::to_string(params[i]);
        s += ")";
    }
    return s;
}

GatePtr make_gate(const std::string& name, const std::vector<int64_t>& params, uint32_t width) {
    const auto& cat = builtin_catalog();
    auto it = cat.find(name);
    if (it == cat.end()) throw Error(ErrorKind::Gate, "unknown gate " + name);
    const auto& spec = it->second;
    if (params.size() != spec.param_count)
        throw Error(ErrorKind::Gate, name + " takes " + std::to_string(spec.param_count) + " parameter(s)");
    if (spec.fixed_arity && width != spec.fixed_arity)
        throw Error(ErrorKind::Gate, name + " needs a locus of width " + std::to_string(spec.fixed_arity) +
                                         ", got " + std::to_string(width));
    if (width < spec.min_width || width > 20)
        throw Error(ErrorKind::Gate, name + " cannot act on a locus of width " + std::to_string(width));
    if (name == "RZ" && (params[0] < 0 || params[0] > 62)) throw Error(ErrorKind::Gate, "RZ index out of range");
    if (name == "SR" && (params[0] < 0 || params[0] + 1 > int64_t(width)))
        throw Error(ErrorKind::Gate, "SR(" + std::to_string(params[0]) + ") needs at least " +
                                         std::to_string(params[0] + 1) + " qubits");
    if (name == "CSR" && (params[0] < 0 || params[0] + 2 > int64_t(width)))
        throw Error(ErrorKind::Gate, "CSR(" + std::to_string(params[0]) + ") needs at least " +
                                         std::to_string(params[0] + 2) + " qubits");
    if (name == "CU") {
        if (params[1] < 1 || params[0] < 0) throw Error(ErrorKind::Gate, "CU needs a >= 0 and N >= 1");
        if (width - 1 < 63 && uint64_t(params[1]) > (uint64_t(1) << (width - 1)))
            throw Error(ErrorKind::Gate, "CU modulus does not fit the target register");
        if (std::gcd(params[0], params[1]) != 1)
            throw Error(ErrorKind::Gate, "CU multiplier must be coprime to the modulus");
    }

    static std::mutex mu;
    static std::map<std::string, GatePtr> cache;
    std::string key = name + "/" + std::to_string(width);
    for (auto p : params) key += "/" + std::to_string(p);
    std::lock_guard<std::mutex> lock(mu);
    if (auto c = cache.find(key); c != cache.end()) return c->second;

    auto g = std::make_shared<Gate>();
    g->name = name;
    g->arity = width;
    g->params = params;
    g->action = action_for(name, params, width);
    if (width <= 10) {
        g->table_.resize(size_t(1) << width);
        for (uint64_t x = 0; x < g->table_.size(); ++x) g->table_[x] = g->action(x);
    }
    cache[key] = g;
    return g;
}

QuantumValue apply_gate(const Gate& g, const QuantumValue& v) {
    if (g.arity > v.width)
        throw Error(ErrorKind::Gate, g.name + " applied to a value narrower than its arity");
    QuantumValue out;
    out.width = v.width;
    out.kets.reserve(v.kets.size() * 2);
    const uint32_t rest = v.width - g.arity;
    for (const auto& k : v.kets) {
        const uint64_t in = k.basis.v >> rest;
        const uint64_t tail = k.basis.v & low_mask(rest);
        for (const auto& [a, o] : g.row(in))
            out.kets.push_back({k.amp * a, Bits((rest >= 64 ? 0 : (o << rest)) | tail, v.width), k.frozen});
    }
    return canonicalize(std::move(out));
}

std::vector<cplx> gate_matrix(const Gate& g) {
    const size_t dim = size_t(1) << g.arity;
    std::vector<cplx> m(dim * dim);
    for (uint64_t in = 0; in < dim; ++in)
        for (const auto& [a, o] : g.row(in)) m[o * dim + in] += a;
    return m;
}

} // namespace disq
