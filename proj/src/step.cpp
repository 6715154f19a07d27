#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "disq/semantics.hpp"

namespace disq {

const char* to_string(Rule r) {
    switch (r) {
    case Rule::Self: return "S-Self";
    case Rule::Move: return "S-Move";
    case Rule::IfT: return "S-IFT";
    case Rule::IfF: return "S-IFF";
    case Rule::Mem: return "S-Mem";
    case Rule::End: return "S-End";
    case Rule::Rev: return "S-Rev";
    case Rule::Comm: return "S-Comm";
    case Rule::NewVar: return "S-NewVar";
    case Rule::NewChan: return "S-NewChan";
    }
    return "?";
}

namespace {

Value eval_closed(const ExprPtr& e, const SourcePos& pos) {
    ExprPtr f = fold(e);
    auto fv = free_vars(f);
    if (!fv.empty())
        throw Error(ErrorKind::Runtime, std::to_string(pos.line) + ":" + std::to_string(pos.col) +
                                            ": unbound classical variable " + fv.front());
    return eval(f);
}

// Localized view of one action's locus: the entry holding it, reordered as
// [non-local qubits, target, other local qubits].
struct Local {
    QuantumState state;
    size_t entry = 0;
    std::vector<Qubit> order;
    uint32_t nonlocal = 0;
    uint32_t width = 0;
};

Local localize(const QuantumState& phi, const std::string& loc, const LocalLocus& locus) {
    Locus target{{Fragment{locus, loc}}};
    auto rw = rewrite_to_prefix(phi, target);
    auto tq = target.qubits();
    std::vector<Qubit> order, rest;
    for (const auto& q : rw.locus.qubits()) {
        if (q.loc != loc) order.push_back(q);
        else if (std::find(tq.begin(), tq.end(), q) == tq.end()) rest.push_back(q);
    }
    Local out;
    out.nonlocal = uint32_t(order.size());
    out.width = uint32_t(tq.size());
    order.insert(order.end(), tq.begin(), tq.end());
    order.insert(order.end(), rest.begin(), rest.end());
    out.state = reorder_entry(rw.state, rw.entry, order);
    out.entry = rw.entry;
    out.order = std::move(order);
    return out;
}

} // namespace

std::vector<LocalOutcome> process_step(const QuantumState& phi, const std::string& loc, const Proc& p) {
    std::vector<LocalOutcome> out;
    if (!p) {
        out.push_back({std::nullopt, 1.0, phi, nullptr, Rule::Self, {}});
        return out;
    }
    switch (p->kind) {
    case ActKind::If: {
        bool b = eval_closed(p->expr, p->pos).truthy();
        out.push_back({std::nullopt, 1.0, phi, append(b ? p->then_p : p->else_p, p->next), b ? Rule::IfT : Rule::IfF, {}});
        return out;
    }
    case ActKind::Apply: {
        if (!p->gate) throw Error(ErrorKind::Gate, p->gate_error.empty() ? "invalid gate " + p->gate_name : p->gate_error);
        Local lc = localize(phi, loc, p->locus);
        Entry& e = lc.state.entries[lc.entry];
        QuantumValue v = freeze(e.value, lc.nonlocal);
        v = apply_gate(*p->gate, v);
        e.value = unfreeze(v, lc.nonlocal);
        Effect eff;
        eff.kind = Effect::Gate;
        eff.qubits = p->locus.qubits(loc);
        eff.gate = p->gate;
        out.push_back({std::nullopt, 1.0, std::move(lc.state), p->next, Rule::Move, std::move(eff)});
        return out;
    }
    case ActKind::Measure: {
        Local lc = localize(phi, loc, p->locus);
        const Entry& e = lc.state.entries[lc.entry];
        QuantumValue v = freeze(e.value, lc.nonlocal);
        const uint32_t m = lc.width;
        double total = norm2(v);
        if (total <= 0) throw Error(ErrorKind::Runtime, "measuring a zero vector");
        std::map<Bits, double> mass;
        for (const auto& k : v.kets) mass[k.basis.prefix(m)] += std::norm(k.amp);
        std::vector<Qubit> remaining(lc.order.begin(), lc.order.begin() + lc.nonlocal);
        remaining.insert(remaining.end(), lc.order.begin() + lc.nonlocal + m, lc.order.end());
        for (const auto& [d, w] : mass) {
            double prob = w / total;
            if (prob <= 0) continue;
            QuantumValue post;
            post.width = v.width - m;
            double scale = 1.0 / std::sqrt(w);
            for (const auto& k : v.kets)
                if (k.basis.prefix(m) == d) post.kets.push_back({k.amp * scale, k.basis.suffix_from(m), k.frozen});
            post = unfreeze(canonicalize(std::move(post)), lc.nonlocal);
            QuantumState ns = lc.state;
            if (remaining.empty()) {
                ns.entries.erase(ns.entries.begin() + long(lc.entry));
            } else {
                ns.entries[lc.entry] = {Locus::from_qubits(remaining), std::move(post)};
            }
            Effect eff;
            eff.kind = Effect::Measure;
            eff.qubits = p->locus.qubits(loc);
            eff.outcome = d;
            eff.prob = prob;
            out.push_back({d, prob, std::move(ns), subst(p->next, p->var, Value{d.v, int(m)}), Rule::Move, std::move(eff)});
        }
        return out;
    }
    case ActKind::Send:
    case ActKind::Recv: throw Error(ErrorKind::Runtime, "communication is not a local action");
    }
    return out;
}

std::vector<Transition> membrane_step(const ConfigPtr& cp) {
    const Config& c = *cp;
    std::vector<Transition> out;
    const auto& ms = c.membranes;

    auto with = [&](size_t i, Membrane m) {
        std::vector<Membrane> v = ms;
        v[i] = std::move(m);
        return v;
    };

    for (size_t i = 0; i < ms.size(); ++i) {
        const Membrane& m = ms[i];
        if (!m.prefixes.empty()) {
            const Prefix& h = m.prefixes.front();
            if (h.kind != Prefix::NewVar) continue;
            Membrane nm = m;
            nm.prefixes.erase(nm.prefixes.begin());
            QuantumState s = c.state;
            Locus l{{Fragment{LocalLocus{{Range{h.name, 0, h.size}}}, m.loc}}};
            s.entries.push_back({l, QuantumValue::basis_state(Bits(0, uint32_t(h.size)))});
            Transition t;
            t.choice = m.loc;
            t.rule = Rule::NewVar;
            t.label = {m.loc, std::nullopt, 1.0};
            t.next = make_config(std::move(s), with(i, std::move(nm)));
            t.effect.kind = Effect::NewVar;
            t.effect.qubits = l.qubits();
            out.push_back(std::move(t));
            continue;
        }
        if (m.airlocked()) {
            Membrane nm = m;
            nm.procs.push_back(nm.locked);
            nm.locked = nullptr;
            Transition t;
            t.choice = m.loc;
            t.rule = Rule::Rev;
            t.label = {m.loc, std::nullopt, 1.0};
            t.next = make_config(c.state, with(i, std::move(nm)));
            out.push_back(std::move(t));
            continue;
        }
        if (m.all_nil()) {
            std::vector<Membrane> v = ms;
            v.erase(v.begin() + long(i));
            Transition t;
            t.choice = m.loc + "/end";
            t.rule = Rule::End;
            t.label = {m.loc, std::nullopt, 1.0};
            t.next = make_config(c.state, std::move(v));
            out.push_back(std::move(t));
        }
        const double n = double(m.procs.size());
        for (size_t j = 0; j < m.procs.size(); ++j) {
            const Proc& p = m.procs[j];
            if (!p) {
                Transition t;
                t.choice = m.loc;
                t.rule = Rule::Self;
                t.proc = int(j);
                t.label = {m.loc, std::nullopt, 1.0 / n};
                t.next = cp;
                out.push_back(std::move(t));
                continue;
            }
            if (is_comm(p)) {
                Membrane nm = m;
                nm.procs.erase(nm.procs.begin() + long(j));
                nm.locked = p;
                Transition t;
                t.choice = m.loc;
                t.rule = Rule::Mem;
                t.proc = int(j);
                t.label = {m.loc, std::nullopt, 1.0 / n};
                t.next = make_config(c.state, with(i, std::move(nm)));
                out.push_back(std::move(t));
                continue;
            }
            for (auto& o : process_step(c.state, m.loc, p)) {
                Membrane nm = m;
                nm.procs[j] = o.next;
                Transition t;
                t.choice = m.loc;
                t.rule = o.rule;
                t.proc = int(j);
                t.label = {m.loc, std::nullopt, o.prob / n};
                if (o.obs) t.label.obs = Observation{p->site, m.loc, *o.obs};
                t.next = make_config(std::move(o.state), with(i, std::move(nm)));
                t.effect = std::move(o.effect);
                out.push_back(std::move(t));
            }
        }
    }

    for (size_t a = 0; a < ms.size(); ++a)
        for (size_t b = 0; b < ms.size(); ++b) {
            if (a == b) continue;
            const Membrane& ma = ms[a];
            const Membrane& mb = ms[b];
            // channel creation, once per unordered pair
            if (a < b && !ma.prefixes.empty() && !mb.prefixes.empty()) {
                const Prefix& pa = ma.prefixes.front();
                const Prefix& pb = mb.prefixes.front();
                if (pa.kind == Prefix::NewChan && pb.kind == Prefix::NewChan && pa.name == pb.name &&
                    pa.partner == mb.loc && pb.partner == ma.loc && pa.size == pb.size) {
                    std::vector<Membrane> v = ms;
                    v[a].prefixes.erase(v[a].prefixes.begin());
                    v[b].prefixes.erase(v[b].prefixes.begin());
                    QuantumState s = c.state;
                    Effect eff;
                    eff.kind = Effect::NewChan;
                    const double r = 1.0 / std::sqrt(2.0);
                    for (int j = 0; j < pa.size; ++j) {
                        Locus l{{Fragment{LocalLocus{{Range{pa.name, j, j + 1}}}, ma.loc},
                                 Fragment{LocalLocus{{Range{pa.name, j, j + 1}}}, mb.loc}}};
                        QuantumValue bell;
                        bell.width = 2;
                        bell.kets.push_back({cplx(r, 0), Bits(0, 2), {}});
                        bell.kets.push_back({cplx(r, 0), Bits(3, 2), {}});
                        s.entries.push_back({l, std::move(bell)});
                        eff.qubits.push_back({ma.loc, pa.name, j});
                        eff.qubits.push_back({mb.loc, pa.name, j});
                    }
                    Transition t;
                    t.choice = ma.loc + "." + mb.loc;
                    t.rule = Rule::NewChan;
                    t.label = {t.choice, std::nullopt, 1.0};
                    t.next = make_config(std::move(s), std::move(v));
                    t.effect = std::move(eff);
                    out.push_back(std::move(t));
                }
            }
            // classical communication, sender first
            if (ma.airlocked() && mb.airlocked() && ma.locked->kind == ActKind::Send &&
                mb.locked->kind == ActKind::Recv && ma.locked->chan == mb.locked->chan) {
                Value val = eval_closed(ma.locked->expr, ma.locked->pos);
                std::vector<Membrane> v = ms;
                v[a].procs.push_back(ma.locked->next);
                v[a].locked = nullptr;
                v[b].procs.push_back(subst(mb.locked->next, mb.locked->var, val));
                v[b].locked = nullptr;
                Transition t;
                t.choice = ma.loc + "." + mb.loc;
                t.rule = Rule::Comm;
                t.label = {t.choice, std::nullopt, 1.0};
                t.next = make_config(c.state, std::move(v));
                out.push_back(std::move(t));
            }
        }

    std::stable_sort(out.begin(), out.end(), [](const Transition& x, const Transition& y) {
        Bits bx = x.label.obs ? x.label.obs->bits : Bits();
        Bits by = y.label.obs ? y.label.obs->bits : Bits();
        return std::tie(x.label.choice, x.choice, x.rule, x.proc, bx) < std::tie(y.label.choice, y.choice, y.rule, y.proc, by);
    });
    return out;
}

} // namespace disq
