#include "disq/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "disq/error.hpp"

namespace disq {

std::string Qubit::str() const {
    return var + "[" + std::to_string(index) + "]@" + loc;
}

std::string Range::str() const {
    if (hi == lo + 1) return var + "[" + std::to_string(lo) + "]";
    return var + "[" + std::to_string(lo) + "," + std::to_string(hi) + ")";
}

int LocalLocus::width() const {
    int w = 0;
    for (const auto& r : ranges) w += r.width();
    return w;
}

std::vector<Qubit> LocalLocus::qubits(const std::string& loc) const {
    std::vector<Qubit> out;
    for (const auto& r : ranges)
        for (int i = r.lo; i < r.hi; ++i) out.push_back({loc, r.var, i});
    return out;
}

std::string LocalLocus::str() const {
    std::string s;
    for (const auto& r : ranges) {
        if (r.empty()) continue;
        if (!s.empty()) s += " ++ ";
        s += r.str();
    }
    return s;
}

LocalLocus LocalLocus::merged() const {
    LocalLocus out;
    for (const auto& r : ranges) {
        if (r.empty()) continue;
        if (!out.ranges.empty() && out.ranges.back().var == r.var && out.ranges.back().hi == r.lo)
            out.ranges.back().hi = r.hi;
        else
            out.ranges.push_back(r);
    }
    return out;
}

Locus Locus::from_qubits(const std::vector<Qubit>& qs) {
    Locus l;
    for (const auto& q : qs) {
        if (l.fragments.empty() || l.fragments.back().loc != q.loc)
            l.fragments.push_back({LocalLocus{}, q.loc});
        auto& rs = l.fragments.back().local.ranges;
        if (!rs.empty() && rs.back().var == q.var && rs.back().hi == q.index)
            rs.back().hi++;
        else
            rs.push_back({q.var, q.index, q.index + 1});
    }
    return l;
}

std::vector<Qubit> Locus::qubits() const {
    std::vector<Qubit> out;
    for (const auto& f : fragments) {
        auto qs = f.local.qubits(f.loc);
        out.insert(out.end(), qs.begin(), qs.end());
    }
    return out;
}

int Locus::width() const {
    int w = 0;
    for (const auto& f : fragments) w += f.local.width();
    return w;
}

std::string Locus::str() const {
    std::string s;
    for (const auto& f : fragments)
        for (const auto& r : f.local.ranges) {
            if (r.empty()) continue;
            if (!s.empty()) s += " ++ ";
            s += r.str() + "@" + f.loc;
        }
    return s.empty() ? "empty" : s;
}

const Bits& FrozenStack::top() const {
    if (depth_ == 0) throw Error(ErrorKind::Invariant, "frozen stack underflow");
    return items_[depth_ - 1];
}

void FrozenStack::push(Bits b) {
    if (depth_ == kCapacity) throw Error(ErrorKind::Invariant, "frozen stack overflow");
    items_[depth_++] = b;
}

Bits FrozenStack::pop() {
    if (depth_ == 0) throw Error(ErrorKind::Invariant, "frozen stack underflow");
    Bits b = items_[--depth_];
    items_[depth_] = Bits();
    return b;
}

bool operator==(const FrozenStack& a, const FrozenStack& b) {
    if (a.depth_ != b.depth_) return false;
    for (size_t i = 0; i < a.depth_; ++i)
        if (!(a.items_[i] == b.items_[i])) return false;
    return true;
}

std::strong_ordering operator<=>(const FrozenStack& a, const FrozenStack& b) {
    if (auto c = a.depth_ <=> b.depth_; c != 0) return c;
    for (size_t i = 0; i < a.depth_; ++i) {
        auto c = a.items_[i] <=> b.items_[i];
        if (c != 0) return c;
    }
    return std::strong_ordering::equal;
}

QuantumValue QuantumValue::basis_state(Bits b) {
    QuantumValue v;
    v.width = b.n;
    v.kets.push_back({cplx(1.0, 0.0), b, {}});
    return v;
}

QuantumValue QuantumValue::unit() { return basis_state(Bits(0, 0)); }

QuantumValue QuantumValue::from_dense(const std::vector<cplx>& amps, uint32_t width) {
    if (amps.size() != (size_t(1) << width))
        throw Error(ErrorKind::Invariant, "dense vector length does not match width");
    QuantumValue v;
    v.width = width;
    for (size_t i = 0; i < amps.size(); ++i)
        if (std::abs(amps[i]) >= kDropTol) v.kets.push_back({amps[i], Bits(i, width), {}});
    return v;
}

std::vector<cplx> QuantumValue::to_dense() const {
    if (has_frozen()) throw Error(ErrorKind::NotFlattenable, "value has frozen bases");
    std::vector<cplx> out(size_t(1) << width);
    for (const auto& k : kets) out[k.basis.v] += k.amp;
    return out;
}

bool QuantumValue::has_frozen() const {
    return std::any_of(kets.begin(), kets.end(), [](const BasisKet& k) { return !k.frozen.empty(); });
}

QuantumValue canonicalize(QuantumValue v) {
    auto key_less = [](const BasisKet& a, const BasisKet& b) {
        if (auto c = a.basis <=> b.basis; c != 0) return c < 0;
        return (a.frozen <=> b.frozen) < 0;
    };
    std::sort(v.kets.begin(), v.kets.end(), key_less);
    std::vector<BasisKet> out;
    out.reserve(v.kets.size());
    for (auto& k : v.kets) {
        if (!out.empty() && out.back().basis == k.basis && out.back().frozen == k.frozen)
            out.back().amp += k.amp;
        else
            out.push_back(k);
    }
    std::erase_if(out, [](const BasisKet& k) { return std::abs(k.amp) < kDropTol; });
    v.kets = std::move(out);
    return v;
}

double norm2(const QuantumValue& v) {
    double s = 0;
    for (const auto& k : v.kets) s += std::norm(k.amp);
    return s;
}

bool approx_equal(const QuantumValue& a, const QuantumValue& b, double tol) {
    if (a.width != b.width) return false;
    auto ca = canonicalize(a), cb = canonicalize(b);
    size_t i = 0, j = 0;
    while (i < ca.kets.size() || j < cb.kets.size()) {
        bool take_a = j == cb.kets.size() ||
                      (i < ca.kets.size() &&
                       (ca.kets[i].basis < cb.kets[j].basis ||
                        (ca.kets[i].basis == cb.kets[j].basis && ca.kets[i].frozen < cb.kets[j].frozen)));
        bool take_b = i == ca.kets.size() ||
                      (j < cb.kets.size() &&
                       (cb.kets[j].basis < ca.kets[i].basis ||
                        (cb.kets[j].basis == ca.kets[i].basis && cb.kets[j].frozen < ca.kets[i].frozen)));
        if (take_a) {
            if (std::abs(ca.kets[i].amp) > tol) return false;
            ++i;
        } else if (take_b) {
            if (std::abs(cb.kets[j].amp) > tol) return false;
            ++j;
        } else {
            if (std::abs(ca.kets[i].amp - cb.kets[j].amp) > tol) return false;
            ++i;
            ++j;
        }
    }
    return true;
}

QuantumValue reorder(const QuantumValue& v, const std::vector<uint32_t>& perm) {
    if (perm.size() != v.width) throw Error(ErrorKind::MalformedRewrite, "permutation size mismatch");
    bool identity = true;
    for (uint32_t i = 0; i < perm.size(); ++i) identity = identity && perm[i] == i;
    if (identity) return v;
    QuantumValue out;
    out.width = v.width;
    out.kets.reserve(v.kets.size());
    const uint32_t n = v.width;
    for (const auto& k : v.kets) {
        uint64_t b = 0;
        for (uint32_t i = 0; i < n; ++i) b = (b << 1) | ((k.basis.v >> (n - 1 - perm[i])) & 1u);
        out.kets.push_back({k.amp, Bits(b, n), k.frozen});
    }
    return canonicalize(std::move(out));
}

QuantumValue permute(const QuantumValue& v, uint32_t prefix_width, uint32_t w1, uint32_t w2) {
    if (uint64_t(prefix_width) + w1 + w2 > v.width)
        throw Error(ErrorKind::MalformedRewrite, "permutation segments exceed value width");
    std::vector<uint32_t> perm(v.width);
    std::iota(perm.begin(), perm.end(), 0u);
    uint32_t p = prefix_width;
    for (uint32_t i = 0; i < w2; ++i) perm[p++] = prefix_width + w1 + i;
    for (uint32_t i = 0; i < w1; ++i) perm[p++] = prefix_width + i;
    return reorder(v, perm);
}

QuantumValue join(const QuantumValue& v1, const QuantumValue& v2) {
    QuantumValue out;
    out.width = v1.width + v2.width;
    out.kets.reserve(v1.kets.size() * v2.kets.size());
    for (const auto& a : v1.kets)
        for (const auto& b : v2.kets) {
            if (a.frozen.depth() != b.frozen.depth())
                throw Error(ErrorKind::Invariant, "join of values with unequal frozen depths");
            FrozenStack fs;
            for (size_t i = 0; i < a.frozen.depth(); ++i) fs.push(concat(a.frozen.at(i), b.frozen.at(i)));
            out.kets.push_back({a.amp * b.amp, concat(a.basis, b.basis), fs});
        }
    return canonicalize(std::move(out));
}

std::optional<std::pair<QuantumValue, QuantumValue>> split(const QuantumValue& v, uint32_t w) {
    if (w > v.width) throw Error(ErrorKind::MalformedRewrite, "split point beyond value width");
    if (v.has_frozen()) return std::nullopt;
    auto c = canonicalize(v);
    const uint32_t rest = v.width - w;
    QuantumValue left, right;
    left.width = w;
    right.width = rest;
    if (c.kets.empty()) return std::nullopt;
    if (c.kets.size() == 1) {
        left.kets.push_back({c.kets[0].amp, c.kets[0].basis.prefix(w), {}});
        right.kets.push_back({cplx(1.0), c.kets[0].basis.suffix_from(w), {}});
        return std::make_pair(left, right);
    }
    // rank-1 test of the coefficient matrix M(prefix, suffix)
    std::map<uint64_t, std::map<uint64_t, cplx>> m;
    std::map<uint64_t, int> cols;
    size_t pivot = 0;
    for (size_t i = 0; i < c.kets.size(); ++i) {
        const auto& k = c.kets[i];
        m[k.basis.prefix(w).v][k.basis.suffix_from(w).v] = k.amp;
        cols[k.basis.suffix_from(w).v] = 0;
        if (std::abs(k.amp) > std::abs(c.kets[pivot].amp)) pivot = i;
    }
    const uint64_t p0 = c.kets[pivot].basis.prefix(w).v;
    const uint64_t s0 = c.kets[pivot].basis.suffix_from(w).v;
    const cplx a0 = c.kets[pivot].amp;
    auto at = [&](uint64_t p, uint64_t s) {
        auto it = m.find(p);
        if (it == m.end()) return cplx(0.0);
        auto jt = it->second.find(s);
        return jt == it->second.end() ? cplx(0.0) : jt->second;
    };
    std::map<uint64_t, cplx> u, wv;
    for (const auto& [p, row] : m) u[p] = at(p, s0);
    for (const auto& [s, _] : cols) wv[s] = at(p0, s) / a0;
    for (const auto& [p, up] : u)
        for (const auto& [s, ws] : wv)
            if (std::abs(at(p, s) - up * ws) > kCompareTol) return std::nullopt;
    double nu = 0;
    for (const auto& [p, up] : u) nu += std::norm(up);
    nu = std::sqrt(nu);
    for (const auto& [p, up] : u) left.kets.push_back({up / nu, Bits(p, w), {}});
    for (const auto& [s, ws] : wv) right.kets.push_back({ws * nu, Bits(s, rest), {}});
    return std::make_pair(canonicalize(left), canonicalize(right));
}

QuantumValue freeze(const QuantumValue& v, uint32_t n) {
    if (n > v.width) throw Error(ErrorKind::MalformedRewrite, "freeze wider than value");
    if (n == 0) return v;
    QuantumValue out;
    out.width = v.width - n;
    out.kets.reserve(v.kets.size());
    for (const auto& k : v.kets) {
        BasisKet nk{k.amp, k.basis.suffix_from(n), k.frozen};
        nk.frozen.push(k.basis.prefix(n));
        out.kets.push_back(nk);
    }
    return canonicalize(std::move(out));
}

QuantumValue unfreeze(const QuantumValue& v, uint32_t n) {
    if (n == 0) return v;
    QuantumValue out;
    out.width = v.width + n;
    out.kets.reserve(v.kets.size());
    for (const auto& k : v.kets) {
        BasisKet nk = k;
        if (nk.frozen.empty()) throw Error(ErrorKind::Invariant, "unfreeze on empty frozen stack");
        Bits top = nk.frozen.pop();
        if (top.n != n) throw Error(ErrorKind::Invariant, "unfreeze width mismatch");
        nk.basis = concat(top, k.basis);
        out.kets.push_back(nk);
    }
    return canonicalize(std::move(out));
}

std::optional<size_t> QuantumState::find(const Qubit& q) const {
    for (size_t i = 0; i < entries.size(); ++i)
        for (const auto& f : entries[i].locus.fragments) {
            if (f.loc != q.loc) continue;
            for (const auto& r : f.local.ranges)
                if (r.var == q.var && r.lo <= q.index && q.index < r.hi) return i;
        }
    return std::nullopt;
}

std::vector<Qubit> QuantumState::qubits() const {
    std::vector<Qubit> out;
    for (const auto& e : entries) {
        auto qs = e.locus.qubits();
        out.insert(out.end(), qs.begin(), qs.end());
    }
    return out;
}

size_t QuantumState::qubit_count() const {
    size_t n = 0;
    for (const auto& e : entries) n += size_t(e.locus.width());
    return n;
}

static std::vector<uint32_t> perm_for(const std::vector<Qubit>& from, const std::vector<Qubit>& to) {
    if (from.size() != to.size()) throw Error(ErrorKind::MalformedRewrite, "reorder changes qubit set");
    std::vector<uint32_t> perm(to.size());
    for (size_t i = 0; i < to.size(); ++i) {
        auto it = std::find(from.begin(), from.end(), to[i]);
        if (it == from.end())
            throw Error(ErrorKind::MalformedRewrite, "reorder names foreign qubit " + to[i].str());
        perm[i] = uint32_t(it - from.begin());
    }
    return perm;
}

QuantumState reorder_entry(const QuantumState& phi, size_t entry, const std::vector<Qubit>& order) {
    QuantumState out = phi;
    auto& e = out.entries.at(entry);
    auto perm = perm_for(e.locus.qubits(), order);
    e.value = reorder(e.value, perm);
    e.locus = Locus::from_qubits(order);
    return out;
}

PrefixRewrite rewrite_to_prefix(const QuantumState& phi, const Locus& target) {
    auto tq = target.qubits();
    std::vector<size_t> involved;
    for (size_t i = 0; i < tq.size(); ++i) {
        for (size_t j = 0; j < i; ++j)
            if (tq[j] == tq[i])
                throw Error(ErrorKind::MalformedRewrite, "target names qubit twice: " + tq[i].str());
        auto idx = phi.find(tq[i]);
        if (!idx) throw Error(ErrorKind::UnknownQubit, "qubit " + tq[i].str() + " is not in the state");
        if (std::find(involved.begin(), involved.end(), *idx) == involved.end()) involved.push_back(*idx);
    }
    if (involved.empty()) return {phi, target, 0};
    std::sort(involved.begin(), involved.end());

    QuantumState out;
    Entry merged;
    const size_t first = involved.front();
    for (size_t i = 0; i < phi.entries.size(); ++i) {
        bool inv = std::binary_search(involved.begin(), involved.end(), i);
        if (!inv) {
            out.entries.push_back(phi.entries[i]);
            continue;
        }
        if (i == first) {
            merged = phi.entries[i];
            continue;
        }
        auto qs = merged.locus.qubits();
        auto more = phi.entries[i].locus.qubits();
        qs.insert(qs.end(), more.begin(), more.end());
        merged.value = join(merged.value, phi.entries[i].value);
        merged.locus = Locus::from_qubits(qs);
    }
    size_t pos = 0;
    while (pos < out.entries.size() && pos < first) ++pos;
    out.entries.insert(out.entries.begin() + long(pos), merged);

    std::vector<Qubit> order = tq;
    for (const auto& q : merged.locus.qubits())
        if (std::find(tq.begin(), tq.end(), q) == tq.end()) order.push_back(q);
    if (order != merged.locus.qubits()) out = reorder_entry(out, pos, order);
    auto locus = out.entries[pos].locus;
    return {std::move(out), std::move(locus), pos};
}

std::vector<cplx> flatten(const QuantumState& phi, const std::vector<Qubit>& qubit_order) {
    const size_t n = qubit_order.size();
    if (n != phi.qubit_count())
        throw Error(ErrorKind::NotFlattenable, "qubit order does not enumerate the state");
    if (n > 26) throw Error(ErrorKind::NotFlattenable, "state too large to flatten");
    std::vector<std::vector<uint32_t>> pos(phi.entries.size());
    for (size_t e = 0; e < phi.entries.size(); ++e) {
        if (phi.entries[e].value.has_frozen())
            throw Error(ErrorKind::NotFlattenable, "state has frozen bases");
        for (const auto& q : phi.entries[e].locus.qubits()) {
            auto it = std::find(qubit_order.begin(), qubit_order.end(), q);
            if (it == qubit_order.end())
                throw Error(ErrorKind::NotFlattenable, "qubit " + q.str() + " missing from order");
            pos[e].push_back(uint32_t(it - qubit_order.begin()));
        }
    }
    std::vector<cplx> acc{cplx(1.0)};
    std::vector<uint64_t> idx{0};
    for (size_t e = 0; e < phi.entries.size(); ++e) {
        std::vector<cplx> nacc;
        std::vector<uint64_t> nidx;
        const auto& v = phi.entries[e].value;
        for (size_t a = 0; a < acc.size(); ++a)
            for (const auto& k : v.kets) {
                uint64_t b = idx[a];
                for (uint32_t i = 0; i < v.width; ++i)
                    if (k.basis.get(i)) b |= uint64_t(1) << (n - 1 - pos[e][i]);
                nacc.push_back(acc[a] * k.amp);
                nidx.push_back(b);
            }
        acc = std::move(nacc);
        idx = std::move(nidx);
    }
    std::vector<cplx> out(size_t(1) << n);
    for (size_t a = 0; a < acc.size(); ++a) out[idx[a]] += acc[a];
    return out;
}

QuantumState canonical_state(const QuantumState& phi) {
    QuantumState out;
    for (const auto& e : phi.entries) {
        if (e.locus.width() == 0) continue;
        auto qs = e.locus.qubits();
        auto sorted = qs;
        std::sort(sorted.begin(), sorted.end());
        Entry ne;
        ne.value = sorted == qs ? canonicalize(e.value) : reorder(e.value, perm_for(qs, sorted));
        ne.locus = Locus::from_qubits(sorted);
        out.entries.push_back(std::move(ne));
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const Entry& a, const Entry& b) {
        return a.locus.qubits().front() < b.locus.qubits().front();
    });
    return out;
}

nlohmann::json to_json(const QuantumValue& v) {
    nlohmann::json kets = nlohmann::json::array();
    for (const auto& k : v.kets) {
        nlohmann::json fr = nlohmann::json::array();
        for (size_t i = k.frozen.depth(); i-- > 0;) fr.push_back(k.frozen.at(i).str());
        kets.push_back({{"amp", {k.amp.real(), k.amp.imag()}}, {"basis", k.basis.str()}, {"frozen", fr}});
    }
    return kets;
}

nlohmann::json to_json(const QuantumState& phi) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : phi.entries) out.push_back({{"locus", e.locus.str()}, {"kets", to_json(e.value)}});
    return out;
}

} // namespace disq
