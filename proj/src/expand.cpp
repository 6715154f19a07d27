#include <algorithm>
#include <map>
#include <set>

#include "disq/syntax.hpp"

namespace disq {

namespace {

using QList = std::vector<std::pair<std::string, int>>;

struct Binding {
    bool is_locus = false;
    QList qubits;
    ExprPtr expr;
};

using Env = std::map<std::string, Binding>;
using Renames = std::map<std::string, std::string>;

constexpr int kMaxCallDepth = 64;

[[noreturn]] void fail(const SourcePos& pos, const std::string& msg) {
    throw Error(ErrorKind::Expansion, std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg);
}

bool is_literal(const ExprPtr& e) { return e->op == ExprOp::Nat || e->op == ExprOp::BitLit; }

class Expander {
public:
    Expander(const Program& p) : prog_(p) {
        for (const auto& c : p.consts) {
            ExprPtr v = fold(subst_env(c.value, consts_, {}));
            if (!is_literal(v)) fail({}, "constant " + c.name + " is not closed");
            consts_[c.name] = Binding{false, {}, v};
        }
        for (const auto& m : p.membranes)
            for (const auto& n : m.news) sizes_[m.loc][n.name] = n.size;
        for (const auto& c : p.channels) {
            sizes_[c.a][c.name] = c.size;
            sizes_[c.b][c.name] = c.size;
        }
    }

    Program run() {
        Program out;
        out.channels = prog_.channels;
        for (const auto& d : prog_.inits) {
            InitDecl nd = d;
            nd.locus.clear();
            for (const auto& r : d.locus) {
                RangeExpr nr = r;
                auto [lo, hi] = bounds(r, d.pos, consts_, {}, r.loc);
                nr.lo = Expr::make_nat(uint64_t(lo));
                nr.hi = Expr::make_nat(uint64_t(hi));
                nd.locus.push_back(nr);
            }
            out.inits.push_back(std::move(nd));
        }
        for (const auto& m : prog_.membranes) {
            MembraneDecl nm;
            nm.loc = m.loc;
            nm.pos = m.pos;
            nm.news = m.news;
            mem_ = &m;
            for (const auto& body : m.processes) {
                stack_.clear();
                nm.processes.push_back(stmts(body, consts_, {}));
            }
            out.membranes.push_back(std::move(nm));
        }
        return out;
    }

private:
    const Program& prog_;
    const MembraneDecl* mem_ = nullptr;
    Env consts_;
    std::map<std::string, std::map<std::string, int>> sizes_;
    std::vector<std::string> stack_;
    int fresh_ = 0;

    std::optional<int> size_of(const std::string& loc, const std::string& var) const {
        auto it = sizes_.find(loc);
        if (it != sizes_.end()) {
            auto jt = it->second.find(var);
            if (jt != it->second.end()) return jt->second;
        }
        return std::nullopt;
    }

    bool is_quantum(const std::string& var) const { return mem_ && size_of(mem_->loc, var).has_value(); }

    static ExprPtr subst_env(const ExprPtr& e, const Env& env, const Renames& ren) {
        if (!e) return e;
        switch (e->op) {
        case ExprOp::Nat:
        case ExprOp::BitLit: return e;
        case ExprOp::Var: {
            auto r = ren.find(e->name);
            if (r != ren.end()) return Expr::make_var(r->second);
            auto b = env.find(e->name);
            if (b == env.end()) return e;
            if (b->second.is_locus) throw Error(ErrorKind::Kind, "quantum parameter " + e->name + " used as a classical value");
            return b->second.expr;
        }
        case ExprOp::Not: return Expr::make_not(subst_env(e->a, env, ren));
        default: return Expr::make_bin(e->op, subst_env(e->a, env, ren), subst_env(e->b, env, ren));
        }
    }

    static int64_t literal(const ExprPtr& e, const SourcePos& pos, const char* what) {
        ExprPtr f = fold(e);
        if (!is_literal(f)) fail(pos, std::string(what) + " is not a compile-time constant: " + print_expr(e));
        return int64_t(eval(f).v);
    }

    std::pair<int, int> bounds(const RangeExpr& r, const SourcePos& pos, const Env& env, const Renames& ren,
                               const std::string& loc) const {
        if (!r.lo) {
            auto n = size_of(loc, r.var);
            if (!n) fail(pos, "unknown quantum array " + r.var + " at " + loc);
            return {0, *n};
        }
        int lo = int(literal(subst_env(r.lo, env, ren), pos, "range bound"));
        int hi = r.hi ? int(literal(subst_env(r.hi, env, ren), pos, "range bound")) : lo + 1;
        if (hi < lo) fail(pos, "empty-reversed range " + r.var + "[" + std::to_string(lo) + "," + std::to_string(hi) + ")");
        auto n = size_of(loc, r.var);
        if (n && hi > *n) fail(pos, "range " + r.var + "[" + std::to_string(lo) + "," + std::to_string(hi) +
                                        ") exceeds size " + std::to_string(*n));
        return {lo, hi};
    }

    QList resolve(const LocusExpr& l, const SourcePos& pos, const Env& env, const Renames& ren) const {
        QList out;
        for (const auto& r : l) {
            auto b = env.find(r.var);
            if (b != env.end()) {
                if (!b->second.is_locus) fail(pos, "classical parameter " + r.var + " used as a locus");
                const QList& q = b->second.qubits;
                int lo = 0, hi = int(q.size());
                if (r.lo) {
                    lo = int(literal(subst_env(r.lo, env, ren), pos, "range bound"));
                    hi = r.hi ? int(literal(subst_env(r.hi, env, ren), pos, "range bound")) : lo + 1;
                }
                if (lo < 0 || hi < lo || hi > int(q.size()))
                    fail(pos, "slice of parameter " + r.var + " out of range");
                out.insert(out.end(), q.begin() + lo, q.begin() + hi);
                continue;
            }
            auto [lo, hi] = bounds(r, pos, env, ren, mem_->loc);
            for (int i = lo; i < hi; ++i) out.emplace_back(r.var, i);
        }
        return out;
    }

    static LocusExpr to_ranges(const QList& q) {
        LocusExpr l;
        for (size_t i = 0; i < q.size();) {
            size_t j = i + 1;
            while (j < q.size() && q[j].first == q[i].first && q[j].second == q[j - 1].second + 1) ++j;
            RangeExpr r;
            r.var = q[i].first;
            r.lo = Expr::make_nat(uint64_t(q[i].second));
            r.hi = Expr::make_nat(uint64_t(q[j - 1].second + 1));
            l.push_back(r);
            i = j;
        }
        return l;
    }

    Binding bind_arg(const Arg& a, const SourcePos& pos, const Env& env, const Renames& ren) const {
        if (a.is_locus) {
            // `u[j]` names a bit of a classical value when u is not quantum
            bool classical = a.locus.size() == 1 && a.locus[0].lo && !a.locus[0].hi && !is_quantum(a.locus[0].var) &&
                             !(env.count(a.locus[0].var) && env.at(a.locus[0].var).is_locus);
            if (classical) {
                ExprPtr e = Expr::make_bin(ExprOp::Index, Expr::make_var(a.locus[0].var), a.locus[0].lo);
                return Binding{false, {}, fold(subst_env(e, env, ren))};
            }
            return Binding{true, resolve(a.locus, pos, env, ren), nullptr};
        }
        if (a.expr->op == ExprOp::Var && !ren.count(a.expr->name)) {
            auto b = env.find(a.expr->name);
            if (b != env.end()) return b->second;
            if (is_quantum(a.expr->name)) {
                RangeExpr r;
                r.var = a.expr->name;
                return Binding{true, resolve({r}, pos, env, ren), nullptr};
            }
        }
        return Binding{false, {}, fold(subst_env(a.expr, env, ren))};
    }

    std::string channel(const std::string& chan, const SourcePos& pos, const Env& env) const {
        auto b = env.find(chan);
        if (b == env.end()) return chan;
        if (b->second.is_locus || b->second.expr->op != ExprOp::Var)
            throw Error(ErrorKind::Kind, std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + chan +
                                             " is not bound to a channel name");
        return b->second.expr->name;
    }

    const ProcDef* find_def(const std::string& name) const {
        for (const auto& d : mem_->defs)
            if (d.name == name) return &d;
        for (const auto& d : prog_.defs)
            if (d.name == name) return &d;
        return nullptr;
    }

    static void collect_binders(const std::vector<Stmt>& body, std::vector<std::string>& out) {
        for (const auto& s : body) {
            if (s.kind == StmtKind::Measure || s.kind == StmtKind::Recv) {
                if (std::find(out.begin(), out.end(), s.var) == out.end()) out.push_back(s.var);
            }
            if (s.kind == StmtKind::If) {
                collect_binders(s.then_body, out);
                collect_binders(s.else_body, out);
            }
        }
    }

    void call(const Stmt& s, const std::string& callee, const std::vector<Binding>& args, std::vector<Stmt>& out) {
        const ProcDef* d = find_def(callee);
        if (!d) fail(s.pos, "unknown process definition " + callee);
        if (d->params.size() != args.size())
            fail(s.pos, callee + " expects " + std::to_string(d->params.size()) + " arguments, got " +
                            std::to_string(args.size()));
        if (std::find(stack_.begin(), stack_.end(), callee) != stack_.end())
            fail(s.pos, "recursive definition " + callee);
        if (int(stack_.size()) >= kMaxCallDepth) fail(s.pos, "definitions nested too deeply");
        Env env = consts_;
        for (size_t i = 0; i < args.size(); ++i) env[d->params[i]] = args[i];
        std::vector<std::string> binders;
        collect_binders(d->body, binders);
        Renames ren;
        if (!binders.empty()) {
            int k = ++fresh_;
            for (const auto& b : binders) ren[b] = b + "__" + std::to_string(k);
        }
        stack_.push_back(callee);
        auto body = stmts(d->body, env, ren);
        stack_.pop_back();
        out.insert(out.end(), body.begin(), body.end());
    }

    std::vector<Stmt> stmts(const std::vector<Stmt>& body, const Env& env, const Renames& ren) {
        std::vector<Stmt> out;
        for (const auto& s : body) {
            Stmt n;
            n.kind = s.kind;
            n.pos = s.pos;
            switch (s.kind) {
            case StmtKind::Apply:
                n.locus = to_ranges(resolve(s.locus, s.pos, env, ren));
                n.gate.name = s.gate.name;
                for (const auto& p : s.gate.params)
                    n.gate.params.push_back(Expr::make_nat(uint64_t(literal(subst_env(p, env, ren), s.pos, "gate parameter"))));
                break;
            case StmtKind::Measure:
                n.locus = to_ranges(resolve(s.locus, s.pos, env, ren));
                n.var = ren.count(s.var) ? ren.at(s.var) : s.var;
                n.site = s.site;
                break;
            case StmtKind::Send:
                n.chan = channel(s.chan, s.pos, env);
                n.expr = fold(subst_env(s.expr, env, ren));
                break;
            case StmtKind::Recv:
                n.chan = channel(s.chan, s.pos, env);
                n.var = ren.count(s.var) ? ren.at(s.var) : s.var;
                n.site = s.site;
                break;
            case StmtKind::If:
                n.expr = fold(subst_env(s.expr, env, ren));
                n.then_body = stmts(s.then_body, env, ren);
                n.else_body = stmts(s.else_body, env, ren);
                n.has_else = s.has_else;
                break;
            case StmtKind::Skip: break;
            case StmtKind::Call: {
                std::vector<Binding> args;
                for (const auto& a : s.args) args.push_back(bind_arg(a, s.pos, env, ren));
                call(s, s.callee, args, out);
                continue;
            }
            case StmtKind::Rec: {
                int64_t lo = literal(subst_env(s.lo, env, ren), s.pos, "Rec bound");
                int64_t hi = literal(subst_env(s.hi, env, ren), s.pos, "Rec bound");
                std::vector<Binding> rest;
                for (const auto& a : s.args) rest.push_back(bind_arg(a, s.pos, env, ren));
                for (int64_t j = lo; j < hi; ++j) {
                    std::vector<Binding> args{Binding{false, {}, Expr::make_nat(uint64_t(j))}};
                    args.insert(args.end(), rest.begin(), rest.end());
                    call(s, s.callee, args, out);
                }
                continue;
            }
            }
            out.push_back(std::move(n));
        }
        return out;
    }
};

} // namespace

Program expand_rec(const Program& p) { return Expander(p).run(); }

static int literal_int(const ExprPtr& e) {
    if (!e) throw Error(ErrorKind::Expansion, "locus is not expanded");
    ExprPtr f = fold(e);
    if (f->op != ExprOp::Nat) throw Error(ErrorKind::Expansion, "non-literal range bound " + print_expr(e));
    return int(f->nat);
}

LocalLocus to_local_locus(const LocusExpr& l) {
    LocalLocus out;
    for (const auto& r : l) {
        int lo = literal_int(r.lo);
        int hi = r.hi ? literal_int(r.hi) : lo + 1;
        out.ranges.push_back(Range{r.var, lo, hi});
    }
    return out;
}

Locus to_global_locus(const LocusExpr& l) {
    Locus out;
    for (const auto& r : l) {
        if (r.loc.empty()) throw Error(ErrorKind::Expansion, "range " + r.var + " has no location");
        LocalLocus one = to_local_locus({r});
        if (!out.fragments.empty() && out.fragments.back().loc == r.loc)
            out.fragments.back().local.ranges.push_back(one.ranges[0]);
        else
            out.fragments.push_back(Fragment{one, r.loc});
    }
    return out;
}

std::vector<int64_t> gate_params(const GateExpr& g) {
    std::vector<int64_t> out;
    for (const auto& p : g.params) {
        ExprPtr f = fold(p);
        if (!is_literal(f)) throw Error(ErrorKind::Expansion, "non-literal gate parameter " + print_expr(p));
        out.push_back(int64_t(eval(f).v));
    }
    return out;
}

} // namespace disq
