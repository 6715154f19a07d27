#include <algorithm>
#include <cmath>
#include <set>

#include "disq/typecheck.hpp"

namespace disq {

// ---- kinds ----

Kind kind_check(const KindEnv& omega, const ExprPtr& e) {
    if (!e) throw Error(ErrorKind::Kind, "missing expression");
    switch (e->op) {
    case ExprOp::Nat:
    case ExprOp::BitLit: return Kind::C;
    case ExprOp::Var: {
        auto it = omega.find(e->name);
        if (it == omega.end()) throw Error(ErrorKind::Kind, "unbound classical variable " + e->name);
        if (it->second.kind != Kind::C) throw Error(ErrorKind::Kind, "quantum variable " + e->name + " used as classical");
        return Kind::C;
    }
    case ExprOp::Not: kind_check(omega, e->a); return Kind::C;
    default:
        kind_check(omega, e->a);
        kind_check(omega, e->b);
        return Kind::C;
    }
}

// ---- types ----

const char* to_string(QType t) {
    switch (t) {
    case QType::Nor: return "Nor";
    case QType::Had: return "Had";
    case QType::EN: return "EN";
    }
    return "?";
}

bool subtype(QType a, QType b) { return a == b || b == QType::EN; }

std::string TypeEnv::str() const {
    std::string s;
    for (const auto& e : entries) s += (s.empty() ? "" : ", ") + e.locus.str() + " : " + to_string(e.type);
    return s.empty() ? "{}" : "{" + s + "}";
}

QType infer_type(const QuantumValue& v) {
    if (v.has_frozen()) return QType::EN;
    if (v.kets.size() == 1) return QType::Nor;
    if (v.width == 0 || v.width > 20 || v.kets.size() != (size_t(1) << v.width)) return QType::EN;
    const double mag = std::pow(2.0, -0.5 * v.width);
    for (const auto& k : v.kets)
        if (std::abs(std::abs(k.amp) - mag) > kCompareTol) return QType::EN;
    // canonical order puts basis j at index j; a uniform product has amp(j) amp(0)^(|j|-1) = prod amp(e_k)
    auto amp = [&](uint64_t j) { return v.kets[j].amp; };
    const cplx a0 = amp(0);
    for (uint64_t j = 1; j < v.kets.size(); ++j) {
        cplx lhs = amp(j), rhs = 1.0;
        int pop = 0;
        for (uint32_t k = 0; k < v.width; ++k)
            if ((j >> k) & 1) {
                rhs *= amp(uint64_t(1) << k);
                ++pop;
            }
        for (int p = 1; p < pop; ++p) lhs *= a0;
        if (std::abs(lhs - rhs) > 1e-9 * std::pow(mag, pop)) return QType::EN;
    }
    return QType::Had;
}

TypeEnv infer_env(const QuantumState& phi) {
    TypeEnv env;
    for (const auto& e : phi.entries) env.entries.push_back({e.locus, infer_type(e.value)});
    return env;
}

// ---- environment rewrites ----

namespace {

struct Seg {
    std::string loc;
    Range r;
};

std::vector<Seg> segments(const Locus& l) {
    std::vector<Seg> out;
    for (const auto& f : l.fragments)
        for (const auto& r : f.local.ranges) out.push_back({f.loc, r});
    return out;
}

Locus from_segments(const std::vector<Seg>& ss) {
    Locus l;
    for (const auto& s : ss) {
        if (l.fragments.empty() || l.fragments.back().loc != s.loc) l.fragments.push_back({LocalLocus{}, s.loc});
        l.fragments.back().local.ranges.push_back(s.r);
    }
    return l;
}

bool contains(const Seg& s, const Qubit& q) { return s.loc == q.loc && s.r.var == q.var && s.r.lo <= q.index && q.index < s.r.hi; }

std::optional<size_t> entry_of(const TypeEnv& env, const Qubit& q) {
    for (size_t i = 0; i < env.entries.size(); ++i)
        for (const auto& s : segments(env.entries[i].locus))
            if (contains(s, q)) return i;
    return std::nullopt;
}

} // namespace

std::string RewriteStep::str() const {
    switch (op) {
    case EmptyElim: return "empty-elim #" + std::to_string(entry);
    case SplitRange: return "split #" + std::to_string(entry) + " seg " + std::to_string(segment) + " at " + std::to_string(at);
    case Subtype: return std::string("subtype #") + std::to_string(entry) + " " + to_string(from) + " <= " + to_string(to);
    case Join: return "join #" + std::to_string(entry) + " <- #" + std::to_string(other);
    case Permute:
        return "permute #" + std::to_string(entry) + " (" + std::to_string(prefix_width) + "; " + std::to_string(w1) +
               " <-> " + std::to_string(w2) + ")";
    }
    return "?";
}

std::optional<RewriteTrace> env_rewrite(const TypeEnv& sigma, const Locus& goal) {
    RewriteTrace tr;
    TypeEnv env = sigma;
    auto gq = goal.qubits();
    if (gq.empty()) return tr;
    for (size_t i = 0; i < gq.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if (gq[i] == gq[j]) return std::nullopt;

    // drop empty ranges
    for (size_t i = 0; i < env.entries.size(); ++i) {
        auto ss = segments(env.entries[i].locus);
        auto n = ss.size();
        ss.erase(std::remove_if(ss.begin(), ss.end(), [](const Seg& s) { return s.r.empty(); }), ss.end());
        if (ss.size() != n) {
            env.entries[i].locus = from_segments(ss);
            tr.steps.push_back({RewriteStep::EmptyElim, i});
        }
    }

    // entries involved, in order of first use by the goal
    std::vector<size_t> involved;
    for (const auto& q : gq) {
        auto i = entry_of(env, q);
        if (!i) return std::nullopt;
        if (std::find(involved.begin(), involved.end(), *i) == involved.end()) involved.push_back(*i);
    }

    // join everything into the first involved entry, subtyping to EN as needed
    const size_t target = involved.front();
    if (involved.size() > 1) {
        for (size_t i : involved)
            if (env.entries[i].type != QType::EN && env.entries[i].type != QType::Nor) {
                tr.steps.push_back({RewriteStep::Subtype, i, 0, 0, 0, 0, 0, 0, env.entries[i].type, QType::EN});
                env.entries[i].type = QType::EN;
            }
        bool all_nor = true;
        for (size_t i : involved) all_nor = all_nor && env.entries[i].type == QType::Nor;
        if (!all_nor)
            for (size_t i : involved)
                if (env.entries[i].type == QType::Nor) {
                    tr.steps.push_back({RewriteStep::Subtype, i, 0, 0, 0, 0, 0, 0, QType::Nor, QType::EN});
                    env.entries[i].type = QType::EN;
                }
        // indices shift as entries are removed
        std::vector<size_t> rest(involved.begin() + 1, involved.end());
        size_t tgt = target;
        for (size_t k = 0; k < rest.size(); ++k) {
            size_t o = rest[k];
            RewriteStep st;
            st.op = RewriteStep::Join;
            st.entry = tgt;
            st.other = o;
            tr.steps.push_back(st);
            auto a = segments(env.entries[tgt].locus), b = segments(env.entries[o].locus);
            a.insert(a.end(), b.begin(), b.end());
            env.entries[tgt].locus = from_segments(a);
            env.entries.erase(env.entries.begin() + long(o));
            if (o < tgt) --tgt;
            for (size_t m = k + 1; m < rest.size(); ++m)
                if (rest[m] > o) --rest[m];
        }
        tr.entry = tgt;
    } else {
        tr.entry = target;
    }

    // split at the boundaries of the goal's ranges
    auto& entry = env.entries[tr.entry];
    auto ss = segments(entry.locus);
    for (const auto& g : segments(goal))
        for (int cut : {g.r.lo, g.r.hi})
            for (size_t idx = 0; idx < ss.size(); ++idx) {
                const Seg& x = ss[idx];
                if (x.loc != g.loc || x.r.var != g.r.var || cut <= x.r.lo || cut >= x.r.hi) continue;
                Seg left = x, right = x;
                left.r.hi = cut;
                right.r.lo = cut;
                ss[idx] = left;
                ss.insert(ss.begin() + long(idx) + 1, right);
                RewriteStep st;
                st.op = RewriteStep::SplitRange;
                st.entry = tr.entry;
                st.segment = idx;
                st.at = cut;
                tr.steps.push_back(st);
                break;
            }
    // every segment now lies inside one goal range or outside the goal; bubble the goal's segments leftward
    auto width = [](const Seg& s) { return uint32_t(s.r.width()); };
    size_t placed = 0;  // segments [0, placed) already hold the goal prefix
    size_t gi = 0;
    while (gi < gq.size()) {
        size_t idx = ss.size();
        for (size_t t = placed; t < ss.size(); ++t)
            if (contains(ss[t], gq[gi]) && ss[t].r.lo == gq[gi].index) idx = t;
        if (idx == ss.size()) return std::nullopt;
        while (idx > placed) {
            uint32_t pw = 0;
            for (size_t t = 0; t + 1 < idx; ++t) pw += width(ss[t]);
            RewriteStep st;
            st.op = RewriteStep::Permute;
            st.entry = tr.entry;
            st.segment = idx - 1;
            st.prefix_width = pw;
            st.w1 = width(ss[idx - 1]);
            st.w2 = width(ss[idx]);
            tr.steps.push_back(st);
            std::swap(ss[idx - 1], ss[idx]);
            --idx;
        }
        gi += size_t(ss[placed].r.width());
        ++placed;
    }
    entry.locus = from_segments(ss);
    tr.result = env;
    return tr;
}

QuantumState replay(const QuantumState& phi, const RewriteTrace& trace) {
    QuantumState s = phi;
    for (const auto& st : trace.steps) {
        switch (st.op) {
        case RewriteStep::EmptyElim: {
            auto ss = segments(s.entries.at(st.entry).locus);
            ss.erase(std::remove_if(ss.begin(), ss.end(), [](const Seg& x) { return x.r.empty(); }), ss.end());
            s.entries[st.entry].locus = from_segments(ss);
            break;
        }
        case RewriteStep::Subtype: break;
        case RewriteStep::SplitRange: {
            auto ss = segments(s.entries.at(st.entry).locus);
            if (st.segment >= ss.size()) throw Error(ErrorKind::MalformedRewrite, "split of a missing segment");
            Seg left = ss[st.segment], right = ss[st.segment];
            if (st.at <= left.r.lo || st.at >= left.r.hi) throw Error(ErrorKind::MalformedRewrite, "split point outside range");
            left.r.hi = st.at;
            right.r.lo = st.at;
            ss[st.segment] = left;
            ss.insert(ss.begin() + long(st.segment) + 1, right);
            s.entries[st.entry].locus = from_segments(ss);
            break;
        }
        case RewriteStep::Join: {
            Entry& a = s.entries.at(st.entry);
            const Entry& b = s.entries.at(st.other);
            auto sa = segments(a.locus), sb = segments(b.locus);
            sa.insert(sa.end(), sb.begin(), sb.end());
            a.value = join(a.value, b.value);
            a.locus = from_segments(sa);
            s.entries.erase(s.entries.begin() + long(st.other));
            break;
        }
        case RewriteStep::Permute: {
            Entry& e = s.entries.at(st.entry);
            auto ss = segments(e.locus);
            if (st.segment + 1 >= ss.size()) throw Error(ErrorKind::MalformedRewrite, "permutation of a missing segment");
            e.value = permute(e.value, st.prefix_width, st.w1, st.w2);
            std::swap(ss[st.segment], ss[st.segment + 1]);
            e.locus = from_segments(ss);
            break;
        }
        }
    }
    return s;
}

// ---- diagnostics ----

nlohmann::json to_json(const Diagnostic& d) {
    return {{"severity", d.severity}, {"rule", d.rule}, {"location", d.location}, {"message", d.message}};
}

bool CheckResult::ok() const {
    for (const auto& d : diagnostics)
        if (d.severity == "error") return false;
    return true;
}

std::vector<Diagnostic> check_wellformed(const TypeEnv& sigma, const QuantumState& phi) {
    std::vector<Diagnostic> out;
    auto bad = [&](const std::string& rule, const std::string& where, const std::string& msg) {
        out.push_back({"error", rule, where, msg});
    };
    std::set<Qubit> seen;
    for (const auto& e : phi.entries) {
        for (const auto& f : e.locus.fragments)
            for (const auto& r : f.local.ranges)
                if (r.lo > r.hi || r.lo < 0) bad("WF-Domain", e.locus.str(), "malformed range " + r.str());
        for (const auto& q : e.locus.qubits())
            if (!seen.insert(q).second) bad("WF-Domain", e.locus.str(), "qubit " + q.str() + " appears in two entries");
        if (e.value.width != uint32_t(e.locus.width()))
            bad("WF-Domain", e.locus.str(), "value width " + std::to_string(e.value.width) + " differs from locus width");
    }
    if (sigma.entries.size() != phi.entries.size()) bad("WF-Domain", "", "dom(Sigma) and dom(Phi) differ in size");
    for (const auto& te : sigma.entries) {
        const Entry* match = nullptr;
        for (const auto& e : phi.entries)
            if (e.locus.same_as(te.locus)) match = &e;
        if (!match) {
            bad("WF-Domain", te.locus.str(), "locus typed in Sigma but absent from Phi");
            continue;
        }
        const auto& v = match->value;
        if (v.has_frozen()) bad("WF-Frozen", te.locus.str(), "top-level value carries frozen bases");
        double n = norm2(v);
        if (std::abs(n - 1.0) > kCompareTol) bad("WF-Norm", te.locus.str(), "squared norm " + std::to_string(n) + " is not 1");
        QType actual = infer_type(v);
        if (!subtype(actual, te.type))
            bad("WF-" + std::string(to_string(te.type)), te.locus.str(),
                std::string("value of shape ") + to_string(actual) + " does not fit type " + to_string(te.type));
    }
    return out;
}

// ---- configuration checking ----

namespace {

struct ProcInfo {
    std::set<Qubit> footprint;
    bool has_mea = false;
};

class Checker {
public:
    Checker(const Config& c, std::vector<Diagnostic>& out) : c_(c), out_(out) {
        for (const auto& q : c.state.qubits()) quantum_[q.loc][q.var] = std::max(quantum_[q.loc][q.var], q.index + 1);
        for (const auto& m : c.membranes)
            for (const auto& p : m.prefixes) quantum_[m.loc][p.name] = std::max(quantum_[m.loc][p.name], p.size);
        env_ = infer_env(c.state);
    }

    void run() {
        for (const auto& m : c_.membranes) {
            std::vector<ProcInfo> infos;
            std::vector<Proc> procs = m.procs;
            if (m.locked) procs.push_back(m.locked);
            for (const auto& p : procs) {
                ProcInfo info;
                KindEnv omega = quantum_kinds(m.loc);
                std::set<Qubit> measured;
                walk(m.loc, p, omega, measured, info);
                infos.push_back(std::move(info));
            }
            check_partition(m.loc, infos);
        }
    }

private:
    KindEnv quantum_kinds(const std::string& loc) const {
        KindEnv k;
        if (auto it = quantum_.find(loc); it != quantum_.end())
            for (const auto& [v, n] : it->second) k[v] = {Kind::Q, n};
        return k;
    }

    bool quantum_anywhere(const std::string& var) const {
        for (const auto& [loc, arrs] : quantum_)
            if (arrs.count(var)) return true;
        return false;
    }

    std::string where(const std::string& loc, const SourcePos& p) const {
        return loc + ":" + std::to_string(p.line) + ":" + std::to_string(p.col);
    }

    void report(const std::string& rule, const std::string& loc, const SourcePos& p, const std::string& msg) {
        out_.push_back({"error", rule, where(loc, p), msg});
    }

    void bind(const std::string& rule, const std::string& loc, const ProcNode& n, KindEnv& omega) {
        if (auto it = omega.find(n.var); it != omega.end()) {
            if (it->second.kind == Kind::Q)
                report(rule, loc, n.pos, "binder " + n.var + " names a quantum array");
            else
                report(rule, loc, n.pos, "classical variable " + site_of(n.var) + " is bound twice");
        }
        omega[n.var] = {Kind::C, 0};
    }

    void classical(const std::string& rule, const std::string& loc, const ProcNode& n, const KindEnv& omega) {
        try {
            kind_check(omega, n.expr);
        } catch (const Error& e) {
            report(rule, loc, n.pos, e.what());
        }
    }

    void channel(const std::string& rule, const std::string& loc, const ProcNode& n) {
        if (quantum_anywhere(n.chan)) report(rule, loc, n.pos, "classical message over quantum name " + n.chan);
    }

    void locus(const std::string& rule, const std::string& loc, const ProcNode& n, ProcInfo& info) {
        auto here = quantum_.find(loc);
        bool all_present = true;
        for (const auto& q : n.locus.qubits(loc)) {
            bool local = here != quantum_.end() && here->second.count(q.var);
            if (!local) {
                std::string elsewhere;
                for (const auto& [l, arrs] : quantum_)
                    if (l != loc && arrs.count(q.var)) elsewhere = l;
                if (!elsewhere.empty())
                    report("T-Top", loc, n.pos, "qubit " + q.var + "[" + std::to_string(q.index) + "] lives in membrane " +
                                                    elsewhere + ", not " + loc);
                else
                    report("T-Top", loc, n.pos, "unknown quantum array " + q.var);
                all_present = false;
                continue;
            }
            if (q.index < 0 || q.index >= here->second.at(q.var)) {
                report(rule, loc, n.pos, "qubit " + q.str() + " out of range");
                all_present = false;
                continue;
            }
            info.footprint.insert(q);
            if (!c_.state.find(q)) all_present = false;
        }
        if (n.locus.width() == 0) report(rule, loc, n.pos, "empty locus");
        // where the qubits already exist, an environment rewrite must expose the locus
        if (all_present && n.locus.width() > 0) {
            Locus goal{{Fragment{n.locus, loc}}};
            if (!env_rewrite(env_, goal)) report("T-Par", loc, n.pos, "no rewrite brings " + goal.str() + " into scope");
        }
    }

    void walk(const std::string& loc, const Proc& p, KindEnv& omega, std::set<Qubit>& measured, ProcInfo& info) {
        for (Proc cur = p; cur; cur = cur->next) {
            const ProcNode& n = *cur;
            switch (n.kind) {
            case ActKind::Apply:
                locus("T-OP", loc, n, info);
                if (!n.gate) report("T-OP", loc, n.pos, n.gate_error.empty() ? "invalid gate " + n.gate_name : n.gate_error);
                for (const auto& q : n.locus.qubits(loc))
                    if (measured.count(q)) report("T-Mea", loc, n.pos, "qubit " + q.str() + " used after measurement");
                break;
            case ActKind::Measure:
                locus("T-Mea", loc, n, info);
                info.has_mea = true;
                for (const auto& q : n.locus.qubits(loc))
                    if (!measured.insert(q).second) report("T-Mea", loc, n.pos, "qubit " + q.str() + " measured twice");
                bind("T-Mea", loc, n, omega);
                break;
            case ActKind::Send:
                channel("T-Send", loc, n);
                classical("T-Send", loc, n, omega);
                break;
            case ActKind::Recv:
                channel("T-Rev", loc, n);
                bind("T-Rev", loc, n, omega);
                break;
            case ActKind::If: {
                classical("T-If", loc, n, omega);
                for (const Proc& b : {n.then_p, n.else_p}) {
                    KindEnv o = omega;
                    std::set<Qubit> m = measured;
                    walk(loc, b, o, m, info);
                    // qubits measured in either branch count as measured afterwards
                    measured.insert(m.begin(), m.end());
                }
                break;
            }
            }
        }
    }

    void check_partition(const std::string& loc, const std::vector<ProcInfo>& infos) {
        for (size_t i = 0; i < infos.size(); ++i) {
            if (!infos[i].has_mea) continue;
            for (size_t j = 0; j < infos.size(); ++j) {
                if (i == j || (infos[j].has_mea && j < i)) continue;
                for (const auto& q : infos[i].footprint)
                    if (infos[j].footprint.count(q)) {
                        out_.push_back({"error", "T-Mem", loc,
                                        "process " + std::to_string(i) + " measures and shares qubit " + q.str() +
                                            " with process " + std::to_string(j)});
                        break;
                    }
            }
        }
    }

    const Config& c_;
    std::vector<Diagnostic>& out_;
    std::map<std::string, std::map<std::string, int>> quantum_;
    TypeEnv env_;
};

} // namespace

CheckResult type_check_config(const Config& c) {
    CheckResult r;
    Checker(c, r.diagnostics).run();
    r.env = infer_env(c.state);
    auto wf = check_wellformed(r.env, c.state);
    r.diagnostics.insert(r.diagnostics.end(), wf.begin(), wf.end());
    return r;
}

CheckResult type_check(const Program& expanded, const AmpBindings& amps) {
    ConfigPtr c;
    try {
        c = initial_config(expanded, amps);
    } catch (const Error& e) {
        CheckResult r;
        r.diagnostics.push_back({"error", "init", "", e.what()});
        return r;
    }
    return type_check_config(*c);
}

CheckResult type_check_source(const std::string& source, const AmpBindings& amps) {
    Program p;
    try {
        p = expand_rec(parse(source));
    } catch (const ParseError& e) {
        CheckResult r;
        const std::string at = std::to_string(e.pos().line) + ":" + std::to_string(e.pos().col);
        std::string msg = e.what();
        if (msg.rfind(at + ": ", 0) == 0) msg.erase(0, at.size() + 2);
        r.diagnostics.push_back({"error", "parse", at, msg});
        return r;
    } catch (const Error& e) {
        CheckResult r;
        r.diagnostics.push_back({"error", e.kind() == ErrorKind::Kind ? "kind" : "expand", "", e.what()});
        return r;
    }
    return type_check(p, amps);
}

} // namespace disq
