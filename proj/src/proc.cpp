#include "disq/hash.hpp"
#include "disq/semantics.hpp"

namespace disq {

std::string print_action(const ProcNode& n) {
    switch (n.kind) {
    case ActKind::Apply: {
        std::string g = n.gate ? n.gate->str() : n.gate_name;
        if (!n.gate && !n.gate_params.empty()) {
            g += "(";
            for (size_t i = 0; i < n.gate_params.size(); ++i) g += (i ? ", " : "") + std::to_string(n.gate_params[i]);
            g += ")";
        }
        return n.locus.str() + " *= " + g;
    }
    case ActKind::Measure: return n.var + " = measure " + n.locus.str();
    case ActKind::Send: return n.chan + " ! " + print_expr(n.expr);
    case ActKind::Recv: return n.chan + " ? (" + n.var + ")";
    case ActKind::If:
        return "if " + print_expr(n.expr) + " { " + print_proc(n.then_p) + " } else { " + print_proc(n.else_p) + " }";
    }
    return "?";
}

std::string print_proc(const Proc& p) { return p ? p->text : "0"; }

Proc make_node(ProcNode n) {
    n.text = print_action(n) + "; " + print_proc(n.next);
    n.hash = fnv1a(n.text);
    return std::make_shared<const ProcNode>(std::move(n));
}

Proc lower(const std::vector<Stmt>& body) {
    Proc cur;
    for (auto it = body.rbegin(); it != body.rend(); ++it) {
        const Stmt& s = *it;
        ProcNode n;
        n.pos = s.pos;
        n.next = cur;
        switch (s.kind) {
        case StmtKind::Skip: continue;
        case StmtKind::Apply:
            n.kind = ActKind::Apply;
            n.locus = to_local_locus(s.locus).merged();
            n.gate_name = s.gate.name;
            n.gate_params = gate_params(s.gate);
            try {
                n.gate = make_gate(n.gate_name, n.gate_params, uint32_t(n.locus.width()));
            } catch (const Error& e) {
                n.gate_error = e.what();
            }
            break;
        case StmtKind::Measure:
            n.kind = ActKind::Measure;
            n.locus = to_local_locus(s.locus).merged();
            n.var = s.var;
            n.site = s.site.empty() ? site_of(s.var) : s.site;
            break;
        case StmtKind::Send:
            n.kind = ActKind::Send;
            n.chan = s.chan;
            n.expr = fold(s.expr);
            break;
        case StmtKind::Recv:
            n.kind = ActKind::Recv;
            n.chan = s.chan;
            n.var = s.var;
            n.site = s.site.empty() ? site_of(s.var) : s.site;
            break;
        case StmtKind::If:
            n.kind = ActKind::If;
            n.expr = fold(s.expr);
            n.then_p = lower(s.then_body);
            n.else_p = lower(s.else_body);
            break;
        case StmtKind::Call:
        case StmtKind::Rec:
            throw Error(ErrorKind::Expansion, "process still contains a call to " + s.callee);
        }
        cur = make_node(std::move(n));
    }
    return cur;
}

Proc append(const Proc& a, const Proc& b) {
    if (!a) return b;
    if (!b) return a;
    ProcNode n = *a;
    n.next = append(a->next, b);
    return make_node(std::move(n));
}

Proc subst(const Proc& p, const std::string& var, const Value& v) {
    if (!p) return p;
    ExprPtr val = v.to_expr();
    ProcNode n = *p;
    bool changed = false;
    if (n.expr) {
        auto e = fold(disq::subst(n.expr, var, val));
        if (!expr_equal(e, n.expr)) {
            n.expr = e;
            changed = true;
        }
    }
    if (n.kind == ActKind::If) {
        auto t = subst(n.then_p, var, v), f = subst(n.else_p, var, v);
        if (t != n.then_p || f != n.else_p) changed = true;
        n.then_p = t;
        n.else_p = f;
    }
    // a rebinding of var shadows the rest
    bool shadows = (n.kind == ActKind::Measure || n.kind == ActKind::Recv) && n.var == var;
    if (!shadows) {
        auto nx = subst(n.next, var, v);
        if (nx != n.next) changed = true;
        n.next = nx;
    }
    return changed ? make_node(std::move(n)) : p;
}

bool is_comm(const Proc& p) { return p && (p->kind == ActKind::Send || p->kind == ActKind::Recv); }

} // namespace disq
