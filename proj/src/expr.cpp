#include <cmath>
#include <cstdio>

#include "disq/syntax.hpp"

namespace disq {

ExprPtr Expr::make_nat(uint64_t v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Nat;
    e->nat = v;
    return e;
}

ExprPtr Expr::make_bits(Bits b) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::BitLit;
    e->bits = b;
    return e;
}

ExprPtr Expr::make_var(std::string n) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Var;
    e->name = std::move(n);
    return e;
}

ExprPtr Expr::make_bin(ExprOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr Expr::make_not(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Not;
    e->a = std::move(a);
    return e;
}

std::string Value::str() const { return width >= 0 ? Bits(v, uint32_t(width)).str() : std::to_string(v); }

ExprPtr Value::to_expr() const {
    return width >= 0 ? Expr::make_bits(Bits(v, uint32_t(width))) : Expr::make_nat(v);
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op) return false;
    switch (a->op) {
    case ExprOp::Nat: return a->nat == b->nat;
    case ExprOp::BitLit: return a->bits == b->bits;
    case ExprOp::Var: return a->name == b->name;
    default: return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    }
}

static const char* op_text(ExprOp op) {
    switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Mod: return "%";
    case ExprOp::Pow: return "^";
    case ExprOp::Eq: return "==";
    case ExprOp::Lt: return "<";
    default: return "?";
    }
}

std::string print_expr(const ExprPtr& e) {
    switch (e->op) {
    case ExprOp::Nat: return std::to_string(e->nat);
    case ExprOp::BitLit: return "0b" + e->bits.str();
    case ExprOp::Var: return e->name;
    case ExprOp::Not: return "!" + print_expr(e->a);
    case ExprOp::Index: return print_expr(e->a) + "[" + print_expr(e->b) + "]";
    default: return "(" + print_expr(e->a) + " " + op_text(e->op) + " " + print_expr(e->b) + ")";
    }
}

static Value apply_op(ExprOp op, Value x, Value y) {
    switch (op) {
    case ExprOp::Add: return {x.v + y.v, -1};
    case ExprOp::Sub:
        if (y.v > x.v) throw Error(ErrorKind::Runtime, "natural subtraction underflow");
        return {x.v - y.v, -1};
    case ExprOp::Mul: return {x.v * y.v, -1};
    case ExprOp::Mod:
        if (y.v == 0) throw Error(ErrorKind::Runtime, "modulo by zero");
        return {x.v % y.v, -1};
    case ExprOp::Pow: {
        uint64_t r = 1;
        for (uint64_t i = 0; i < y.v; ++i) r *= x.v;
        return {r, -1};
    }
    case ExprOp::Eq: return {x.v == y.v ? 1u : 0u, -1};
    case ExprOp::Lt: return {x.v < y.v ? 1u : 0u, -1};
    case ExprOp::Index: {
        if (x.width < 0) throw Error(ErrorKind::Runtime, "bit-indexing a number");
        if (y.v >= uint64_t(x.width)) throw Error(ErrorKind::Runtime, "bit index out of range");
        return {Bits(x.v, uint32_t(x.width)).get(uint32_t(y.v)) ? 1u : 0u, 1};
    }
    default: throw Error(ErrorKind::Runtime, "bad operator");
    }
}

Value eval(const ExprPtr& e) {
    switch (e->op) {
    case ExprOp::Nat: return {e->nat, -1};
    case ExprOp::BitLit: return {e->bits.v, int(e->bits.n)};
    case ExprOp::Var: throw Error(ErrorKind::Runtime, "unbound classical variable " + e->name);
    case ExprOp::Not: return {eval(e->a).truthy() ? 0u : 1u, -1};
    default: return apply_op(e->op, eval(e->a), eval(e->b));
    }
}

ExprPtr fold(const ExprPtr& e) {
    switch (e->op) {
    case ExprOp::Nat:
    case ExprOp::BitLit:
    case ExprOp::Var: return e;
    case ExprOp::Not: {
        auto a = fold(e->a);
        if (a->op == ExprOp::Nat || a->op == ExprOp::BitLit) return Expr::make_nat(eval(Expr::make_not(a)).v);
        return a == e->a ? e : Expr::make_not(a);
    }
    default: {
        auto a = fold(e->a), b = fold(e->b);
        bool lit = (a->op == ExprOp::Nat || a->op == ExprOp::BitLit) && (b->op == ExprOp::Nat || b->op == ExprOp::BitLit);
        if (lit) return eval(Expr::make_bin(e->op, a, b)).to_expr();
        if (a == e->a && b == e->b) return e;
        return Expr::make_bin(e->op, a, b);
    }
    }
}

static void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->op == ExprOp::Var) {
        for (const auto& n : out)
            if (n == e->name) return;
        out.push_back(e->name);
        return;
    }
    collect_vars(e->a, out);
    collect_vars(e->b, out);
}

std::vector<std::string> free_vars(const ExprPtr& e) {
    std::vector<std::string> out;
    collect_vars(e, out);
    return out;
}

ExprPtr subst(const ExprPtr& e, const std::string& var, const ExprPtr& val) {
    if (!e) return e;
    switch (e->op) {
    case ExprOp::Nat:
    case ExprOp::BitLit: return e;
    case ExprOp::Var: return e->name == var ? val : e;
    case ExprOp::Not: {
        auto a = subst(e->a, var, val);
        return a == e->a ? e : Expr::make_not(a);
    }
    default: {
        auto a = subst(e->a, var, val), b = subst(e->b, var, val);
        if (a == e->a && b == e->b) return e;
        return Expr::make_bin(e->op, a, b);
    }
    }
}

} // namespace disq
