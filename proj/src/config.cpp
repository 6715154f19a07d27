#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "disq/hash.hpp"
#include "disq/semantics.hpp"

namespace disq {

std::string Prefix::str() const {
    if (kind == NewVar) return "new " + name + "[" + std::to_string(size) + "]";
    return "chan " + name + "[" + std::to_string(size) + "] with " + partner;
}

bool Membrane::all_nil() const {
    if (!prefixes.empty() || locked) return false;
    for (const auto& p : procs)
        if (p) return false;
    return true;
}

std::string Membrane::str() const {
    std::string s = loc + " {";
    for (const auto& p : prefixes) s += " " + p.str() + ".";
    for (size_t i = 0; i < procs.size(); ++i) s += (i ? " | " : " ") + print_proc(procs[i]);
    if (locked) s += std::string(procs.empty() ? " " : " | ") + "<" + print_proc(locked) + ">";
    return s + " }";
}

std::string ConfigKey::hex() const {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", (unsigned long long)hi, (unsigned long long)lo);
    return buf;
}

const Membrane* Config::find(const std::string& loc) const {
    for (const auto& m : membranes)
        if (m.loc == loc) return &m;
    return nullptr;
}

namespace {

// Divides out an entry-wise global phase so physically equal states compare equal.
QuantumValue normalize_phase(QuantumValue v) {
    double mx = 0;
    for (const auto& k : v.kets) mx = std::max(mx, std::abs(k.amp));
    if (mx == 0) return v;
    // the first ket of substantial weight fixes the phase; tiny amplitudes have unstable phases
    size_t ref = 0;
    while (std::abs(v.kets[ref].amp) < 0.5 * mx) ++ref;
    cplx a = v.kets[ref].amp;
    double m = std::abs(a);
    cplx ph = std::conj(a) / m;
    for (auto& k : v.kets) k.amp *= ph;
    v.kets[ref].amp = cplx(m, 0.0);
    return v;
}

void hash_state(Hasher128& h, const QuantumState& s, double quantum) {
    h.add(uint64_t(s.entries.size()));
    for (const auto& e : s.entries) {
        h.add(e.locus.str());
        h.add(uint64_t(e.value.kets.size()));
        for (const auto& k : e.value.kets) {
            h.add(k.basis.v);
            h.add(uint64_t(k.frozen.depth()));
            for (size_t i = 0; i < k.frozen.depth(); ++i) h.add(k.frozen.at(i).v);
            h.add(uint64_t(std::llround(k.amp.real() / quantum)));
            h.add(uint64_t(std::llround(k.amp.imag() / quantum)));
        }
    }
}

void hash_membranes(Hasher128& h, const std::vector<Membrane>& ms) {
    h.add(uint64_t(ms.size()));
    for (const auto& m : ms) {
        h.add(m.loc);
        for (const auto& p : m.prefixes) h.add(p.str());
        h.add(uint64_t(m.procs.size()));
        for (const auto& p : m.procs) h.add(print_proc(p));
        h.add(m.locked ? m.locked->text : std::string("-"));
    }
}

} // namespace

ConfigPtr make_config(QuantumState state, std::vector<Membrane> membranes) {
    auto c = std::make_shared<Config>();
    c->state = canonical_state(state);
    for (auto& e : c->state.entries) e.value = normalize_phase(std::move(e.value));
    for (auto& m : membranes)
        std::sort(m.procs.begin(), m.procs.end(),
                  [](const Proc& a, const Proc& b) { return print_proc(a) < print_proc(b); });
    std::sort(membranes.begin(), membranes.end(), [](const Membrane& a, const Membrane& b) { return a.loc < b.loc; });
    c->membranes = std::move(membranes);

    Hasher128 fine, coarse;
    hash_membranes(fine, c->membranes);
    hash_state(fine, c->state, 1e-10);
    hash_membranes(coarse, c->membranes);
    hash_state(coarse, c->state, 1e-7);
    c->key = {fine.hi(), fine.lo()};
    c->coarse = {coarse.hi(), coarse.lo()};
    return c;
}

nlohmann::json to_json(const Config& c) {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : c.membranes) ms.push_back(m.str());
    return {{"state", to_json(c.state)}, {"membranes", ms}};
}

ConfigPtr initial_config(const Program& p, const AmpBindings& amps) {
    std::map<std::string, Membrane> mems;
    std::map<std::string, std::map<std::string, int>> arrays;
    for (const auto& m : p.membranes) {
        if (mems.count(m.loc)) throw Error(ErrorKind::Type, "membrane " + m.loc + " declared twice");
        Membrane mem;
        mem.loc = m.loc;
        for (const auto& body : m.processes) mem.procs.push_back(lower(body));
        mems[m.loc] = std::move(mem);
        for (const auto& n : m.news) {
            if (arrays[m.loc].count(n.name))
                throw Error(ErrorKind::Type, "array " + n.name + " declared twice at " + m.loc);
            arrays[m.loc][n.name] = n.size;
        }
    }
    for (const auto& c : p.channels) {
        if (c.a == c.b) throw Error(ErrorKind::Type, "channel " + c.name + " connects " + c.a + " to itself");
        for (const auto* end : {&c.a, &c.b}) {
            if (!mems.count(*end)) throw Error(ErrorKind::Type, "channel " + c.name + " names unknown membrane " + *end);
            if (arrays[*end].count(c.name))
                throw Error(ErrorKind::Type, "channel " + c.name + " clashes with an array at " + *end);
            mems[*end].prefixes.push_back({Prefix::NewChan, c.name, c.size, end == &c.a ? c.b : c.a});
        }
    }

    QuantumState state;
    std::set<Qubit> covered;
    std::set<std::pair<std::string, std::string>> touched;
    for (const auto& d : p.inits) {
        Locus l = to_global_locus(d.locus);
        for (const auto& q : l.qubits()) {
            auto it = arrays.find(q.loc);
            if (it == arrays.end() || !it->second.count(q.var))
                throw Error(ErrorKind::Type, "init names " + q.str() + ", which no `new` declares");
            if (q.index < 0 || q.index >= it->second.at(q.var))
                throw Error(ErrorKind::Type, "init qubit " + q.str() + " out of range");
            if (!covered.insert(q).second) throw Error(ErrorKind::Type, "init covers " + q.str() + " twice");
            touched.insert({q.loc, q.var});
        }
        QuantumValue v = eval_ket(d.ket, amps);
        if (int(v.width) != l.width())
            throw Error(ErrorKind::Type, "init ket of width " + std::to_string(v.width) + " for locus " + l.str());
        state.entries.push_back({l, std::move(v)});
    }
    for (const auto& m : p.membranes) {
        for (const auto& n : m.news) {
            bool init_touched = touched.count({m.loc, n.name}) > 0;
            if (n.init) {
                if (init_touched) throw Error(ErrorKind::Type, "array " + n.name + " initialized twice");
                QuantumValue v = eval_ket(*n.init, amps);
                if (int(v.width) != n.size)
                    throw Error(ErrorKind::Type, "ket of width " + std::to_string(v.width) + " for " + n.name + "[" +
                                                     std::to_string(n.size) + "]");
                Locus l{{Fragment{LocalLocus{{Range{n.name, 0, n.size}}}, m.loc}}};
                state.entries.push_back({l, std::move(v)});
            } else if (init_touched) {
                for (int i = 0; i < n.size; ++i) {
                    Qubit q{m.loc, n.name, i};
                    if (covered.count(q)) continue;
                    state.entries.push_back({Locus::from_qubits({q}), QuantumValue::basis_state(Bits(0, 1))});
                }
            } else {
                mems[m.loc].prefixes.push_back({Prefix::NewVar, n.name, n.size, ""});
            }
        }
    }
    std::vector<Membrane> ms;
    for (auto& [loc, m] : mems) ms.push_back(std::move(m));
    return make_config(std::move(state), std::move(ms));
}

ConfigPtr load_config(const std::string& source, const AmpBindings& amps) {
    return initial_config(expand_rec(parse(source)), amps);
}

} // namespace disq
