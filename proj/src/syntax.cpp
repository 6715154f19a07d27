#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "disq/syntax.hpp"

namespace disq {

namespace {

std::string fmt_double(double d) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, d);
        if (std::strtod(buf, nullptr) == d) break;
    }
    return buf;
}

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, Num, Imag, BitLit, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

const std::set<std::string> kKeywords = {"const", "channel", "def",  "init", "membrane", "new",     "process",
                                         "if",    "else",    "skip", "Rec",  "measure",  "between"};

std::string describe(const Token& t) {
    switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Ident: return kKeywords.count(t.text) ? "keyword '" + t.text + "'" : "identifier '" + t.text + "'";
    case Tok::Num: return "number " + t.text;
    case Tok::Imag: return "imaginary " + t.text + "i";
    case Tok::BitLit: return "bit literal 0b" + t.text;
    case Tok::Punct: return "'" + t.text + "'";
    }
    return "?";
}

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto adv = [&](size_t k) {
        for (size_t j = 0; j < k; ++j) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto is_id = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        Token t;
        t.pos = {line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && is_id(s[j])) ++j;
            while (j < s.size() && s[j] == '\'') ++j;
            t.kind = Tok::Ident;
            t.text = s.substr(i, j - i);
            adv(j - i);
        } else if (c == '0' && i + 1 < s.size() && s[i + 1] == 'b') {
            size_t j = i + 2;
            while (j < s.size() && (s[j] == '0' || s[j] == '1')) ++j;
            if (j == i + 2 || (j < s.size() && is_id(s[j])))
                throw ParseError(t.pos, {"binary digits after 0b"}, "'" + s.substr(i, j + 1 - i) + "'");
            t.kind = Tok::BitLit;
            t.text = s.substr(i + 2, j - i - 2);
            adv(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    j = k;
                    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                }
            }
            t.text = s.substr(i, j - i);
            t.kind = Tok::Num;
            if (j < s.size() && s[j] == 'i' && !(j + 1 < s.size() && is_id(s[j + 1]))) {
                t.kind = Tok::Imag;
                ++j;
            }
            adv(j - i);
        } else {
            static const char* multi[] = {"++", "*=", "=="};
            t.kind = Tok::Punct;
            for (const char* m : multi) {
                if (s.compare(i, 2, m) == 0) t.text = m;
            }
            if (t.text.empty()) {
                static const std::string single = "()[]{},;=!?+-*/%^<>|@";
                if (single.find(c) == std::string::npos)
                    throw ParseError(t.pos, {"a token"}, std::string("character '") + c + "'");
                t.text = std::string(1, c);
            }
            adv(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.pos = {line, col};
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(lex(text)) {}

    Program program() {
        Program p;
        while (!at_end()) {
            const Token& t = peek();
            if (is_kw("const")) {
                next();
                ConstDecl c;
                c.name = ident();
                expect("=");
                c.value = expr();
                expect(";");
                p.consts.push_back(std::move(c));
            } else if (is_kw("channel")) {
                p.channels.push_back(channel());
            } else if (is_kw("def")) {
                p.defs.push_back(def());
            } else if (is_kw("init")) {
                next();
                InitDecl d;
                d.pos = t.pos;
                d.locus = locus(true);
                expect("=");
                d.ket = ket();
                expect(";");
                p.inits.push_back(std::move(d));
            } else if (is_kw("membrane")) {
                p.membranes.push_back(membrane());
            } else {
                fail({"const", "channel", "def", "init", "membrane"});
            }
        }
        return p;
    }

    KetLit ket_only() {
        KetLit k = ket();
        if (!at_end()) fail({"end of input"});
        return k;
    }

    AmpPtr amp_only() {
        AmpPtr a = amp_add();
        if (!at_end()) fail({"end of input"});
        return a;
    }

private:
    std::vector<Token> toks_;
    size_t i_ = 0;

    const Token& peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& next() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_punct(const char* p, size_t k = 0) const { return peek(k).kind == Tok::Punct && peek(k).text == p; }
    bool is_kw(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw ParseError(peek().pos, std::move(expected), describe(peek()));
    }

    void expect(const char* p) {
        if (!is_punct(p)) fail({std::string("'") + p + "'"});
        next();
    }

    void expect_kw(const char* w) {
        if (!is_kw(w)) fail({std::string("'") + w + "'"});
        next();
    }

    std::string ident() {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail({"identifier"});
        return next().text;
    }

    int natural() {
        if (peek().kind != Tok::Num || peek().text.find_first_of(".eE") != std::string::npos) fail({"natural number"});
        return std::stoi(next().text);
    }

    ChannelDecl channel() {
        ChannelDecl c;
        c.pos = peek().pos;
        expect_kw("channel");
        c.name = ident();
        expect("[");
        c.size = natural();
        expect("]");
        expect_kw("between");
        c.a = ident();
        expect(",");
        c.b = ident();
        expect(";");
        return c;
    }

    ProcDef def() {
        ProcDef d;
        d.pos = peek().pos;
        expect_kw("def");
        d.name = ident();
        expect("(");
        if (!is_punct(")")) {
            d.params.push_back(ident());
            while (is_punct(",")) {
                next();
                d.params.push_back(ident());
            }
        }
        expect(")");
        d.body = block();
        return d;
    }

    MembraneDecl membrane() {
        MembraneDecl m;
        m.pos = peek().pos;
        expect_kw("membrane");
        m.loc = ident();
        expect("{");
        while (!is_punct("}")) {
            if (is_kw("new")) {
                NewDecl n;
                n.pos = next().pos;
                n.name = ident();
                expect("[");
                n.size = natural();
                expect("]");
                if (is_punct("=")) {
                    next();
                    n.init = ket();
                }
                expect(";");
                m.news.push_back(std::move(n));
            } else if (is_kw("def")) {
                m.defs.push_back(def());
            } else if (is_kw("process")) {
                next();
                m.processes.push_back(block());
            } else {
                fail({"new", "def", "process", "'}'"});
            }
        }
        next();
        return m;
    }

    std::vector<Stmt> block() {
        expect("{");
        std::vector<Stmt> body;
        while (!is_punct("}")) {
            if (at_end()) fail({"'}'"});
            body.push_back(stmt());
        }
        next();
        return body;
    }

    Stmt stmt() {
        Stmt s;
        s.pos = peek().pos;
        if (is_kw("if")) {
            next();
            s.kind = StmtKind::If;
            s.expr = expr();
            s.then_body = block();
            if (is_kw("else")) {
                next();
                s.has_else = true;
                s.else_body = block();
            }
            return s;
        }
        if (is_kw("skip")) {
            next();
            expect(";");
            s.kind = StmtKind::Skip;
            return s;
        }
        if (is_kw("Rec")) {
            next();
            s.kind = StmtKind::Rec;
            expect("(");
            s.lo = expr();
            expect(",");
            s.hi = expr();
            expect(",");
            s.callee = ident();
            while (is_punct(",")) {
                next();
                s.args.push_back(arg());
            }
            expect(")");
            expect(";");
            return s;
        }
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text))
            fail({"statement", "'}'"});
        if (is_punct("=", 1)) {
            s.kind = StmtKind::Measure;
            s.var = ident();
            s.site = s.var;
            next();
            expect_kw("measure");
            s.locus = locus(false);
            expect(";");
            return s;
        }
        if (is_punct("!", 1)) {
            s.kind = StmtKind::Send;
            s.chan = ident();
            next();
            s.expr = expr();
            expect(";");
            return s;
        }
        if (is_punct("?", 1)) {
            s.kind = StmtKind::Recv;
            s.chan = ident();
            next();
            expect("(");
            s.var = ident();
            s.site = s.var;
            expect(")");
            expect(";");
            return s;
        }
        if (is_punct("(", 1)) {
            s.kind = StmtKind::Call;
            s.callee = ident();
            next();
            if (!is_punct(")")) {
                s.args.push_back(arg());
                while (is_punct(",")) {
                    next();
                    s.args.push_back(arg());
                }
            }
            expect(")");
            expect(";");
            return s;
        }
        s.kind = StmtKind::Apply;
        s.locus = locus(false);
        expect("*=");
        s.gate.name = ident();
        if (is_punct("(")) {
            next();
            s.gate.params.push_back(expr());
            while (is_punct(",")) {
                next();
                s.gate.params.push_back(expr());
            }
            expect(")");
        }
        expect(";");
        return s;
    }

    Arg arg() {
        Arg a;
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text) && (is_punct("[", 1) || is_punct("++", 1))) {
            a.is_locus = true;
            a.locus = locus(false);
        } else {
            a.expr = expr();
        }
        return a;
    }

    RangeExpr range(bool with_loc) {
        RangeExpr r;
        r.var = ident();
        if (is_punct("[")) {
            next();
            r.lo = expr();
            if (is_punct(",")) {
                next();
                r.hi = expr();
                expect(")");
            } else {
                expect("]");
            }
        } else if (with_loc) {
            fail({"'['"});
        }
        if (with_loc) {
            expect("@");
            r.loc = ident();
        }
        return r;
    }

    LocusExpr locus(bool with_loc) {
        LocusExpr l;
        l.push_back(range(with_loc));
        while (is_punct("++")) {
            next();
            l.push_back(range(with_loc));
        }
        return l;
    }

    // expressions, lowest precedence first
    ExprPtr expr() {
        ExprPtr a = additive();
        while (is_punct("==") || is_punct("=") || is_punct("<")) {
            // a bare '=' is only a comparison inside an expression
            ExprOp op = peek().text == "<" ? ExprOp::Lt : ExprOp::Eq;
            next();
            a = Expr::make_bin(op, a, additive());
        }
        return a;
    }

    ExprPtr additive() {
        ExprPtr a = multiplicative();
        while (is_punct("+") || is_punct("-")) {
            ExprOp op = peek().text == "+" ? ExprOp::Add : ExprOp::Sub;
            next();
            a = Expr::make_bin(op, a, multiplicative());
        }
        return a;
    }

    ExprPtr multiplicative() {
        ExprPtr a = power();
        while (is_punct("*") || is_punct("%")) {
            ExprOp op = peek().text == "*" ? ExprOp::Mul : ExprOp::Mod;
            next();
            a = Expr::make_bin(op, a, power());
        }
        return a;
    }

    ExprPtr power() {
        ExprPtr a = unary();
        if (is_punct("^")) {
            next();
            return Expr::make_bin(ExprOp::Pow, a, power());
        }
        return a;
    }

    ExprPtr unary() {
        if (is_punct("!")) {
            next();
            return Expr::make_not(unary());
        }
        ExprPtr a = atom();
        while (is_punct("[")) {
            next();
            ExprPtr i = expr();
            expect("]");
            a = Expr::make_bin(ExprOp::Index, a, i);
        }
        return a;
    }

    ExprPtr atom() {
        const Token& t = peek();
        if (t.kind == Tok::Num && t.text.find_first_of(".eE") == std::string::npos) {
            next();
            return Expr::make_nat(std::stoull(t.text));
        }
        if (t.kind == Tok::BitLit) {
            if (t.text.size() > Bits::kMaxWidth) fail({"bit literal of at most 64 bits"});
            next();
            return Expr::make_bits(Bits::parse(t.text));
        }
        if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
            next();
            return Expr::make_var(t.text);
        }
        if (is_punct("(")) {
            next();
            ExprPtr e = expr();
            expect(")");
            return e;
        }
        fail({"natural number", "bit literal", "identifier", "'('", "'!'"});
    }

    // ket literals
    KetLit ket() {
        KetLit k;
        if (is_punct("-") && is_punct("|", 1)) {
            next();
            KetTerm t = ket_term();
            t.coef = bin(AmpOp::Neg, num(1.0), nullptr);
            k.terms.push_back(std::move(t));
        } else {
            k.terms.push_back(ket_term());
        }
        while (is_punct("+") || is_punct("-")) {
            bool neg = peek().text == "-";
            next();
            KetTerm t = ket_term();
            if (neg) {
                auto n = std::make_shared<AmpExpr>();
                n->op = AmpOp::Neg;
                n->a = t.coef ? t.coef : num(1.0);
                t.coef = n;
            }
            k.terms.push_back(std::move(t));
        }
        return k;
    }

    KetTerm ket_term() {
        KetTerm t;
        if (!is_punct("|")) t.coef = amp_mul();
        expect("|");
        if (peek().kind != Tok::Num || peek().text.find_first_not_of("01") != std::string::npos) fail({"basis bits"});
        t.bits = next().text;
        if (t.bits.size() > Bits::kMaxWidth) fail({"basis of at most 64 bits"});
        expect(">");
        return t;
    }

    static AmpPtr num(double d) {
        auto a = std::make_shared<AmpExpr>();
        a->op = AmpOp::Num;
        a->num = d;
        return a;
    }

    static AmpPtr bin(AmpOp op, AmpPtr x, AmpPtr y) {
        auto a = std::make_shared<AmpExpr>();
        a->op = op;
        a->a = std::move(x);
        a->b = std::move(y);
        return a;
    }

    AmpPtr amp_add() {
        AmpPtr a = amp_mul();
        while (is_punct("+") || is_punct("-")) {
            AmpOp op = peek().text == "+" ? AmpOp::Add : AmpOp::Sub;
            next();
            a = bin(op, a, amp_mul());
        }
        return a;
    }

    AmpPtr amp_mul() {
        AmpPtr a = amp_unary();
        while (is_punct("*") || is_punct("/")) {
            AmpOp op = peek().text == "*" ? AmpOp::Mul : AmpOp::Div;
            next();
            a = bin(op, a, amp_unary());
        }
        return a;
    }

    AmpPtr amp_unary() {
        if (is_punct("-")) {
            next();
            return bin(AmpOp::Neg, amp_unary(), nullptr);
        }
        return amp_atom();
    }

    AmpPtr amp_atom() {
        const Token& t = peek();
        if (t.kind == Tok::Num) {
            next();
            return num(std::strtod(t.text.c_str(), nullptr));
        }
        if (t.kind == Tok::Imag) {
            next();
            auto a = std::make_shared<AmpExpr>();
            a->op = AmpOp::Imag;
            a->num = std::strtod(t.text.c_str(), nullptr);
            return a;
        }
        if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
            next();
            auto a = std::make_shared<AmpExpr>();
            if (t.text == "i") {
                a->op = AmpOp::Imag;
                a->num = 1.0;
            } else if (t.text == "sqrt" && is_punct("(")) {
                next();
                a->op = AmpOp::Sqrt;
                a->a = amp_add();
                expect(")");
            } else {
                a->op = AmpOp::Sym;
                a->sym = t.text;
            }
            return a;
        }
        if (is_punct("(")) {
            next();
            AmpPtr a = amp_add();
            expect(")");
            return a;
        }
        fail({"amplitude", "'|'"});
    }
};

// ---------------------------------------------------------------- printing

std::string print_amp(const AmpPtr& a) {
    switch (a->op) {
    case AmpOp::Num: return a->num < 0 ? "(" + fmt_double(a->num) + ")" : fmt_double(a->num);
    case AmpOp::Imag: return a->num < 0 ? "(" + fmt_double(a->num) + "i)" : fmt_double(a->num) + "i";
    case AmpOp::Sym: return a->sym;
    case AmpOp::Neg: return "(-" + print_amp(a->a) + ")";
    case AmpOp::Sqrt: return "sqrt(" + print_amp(a->a) + ")";
    case AmpOp::Add: return "(" + print_amp(a->a) + " + " + print_amp(a->b) + ")";
    case AmpOp::Sub: return "(" + print_amp(a->a) + " - " + print_amp(a->b) + ")";
    case AmpOp::Mul: return "(" + print_amp(a->a) + " * " + print_amp(a->b) + ")";
    case AmpOp::Div: return "(" + print_amp(a->a) + " / " + print_amp(a->b) + ")";
    }
    return "?";
}

bool amp_equal(const AmpPtr& a, const AmpPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    return a->num == b->num && a->sym == b->sym && amp_equal(a->a, b->a) && amp_equal(a->b, b->b);
}

void collect_syms(const AmpPtr& a, std::vector<std::string>& out) {
    if (!a) return;
    if (a->op == AmpOp::Sym) {
        for (const auto& s : out)
            if (s == a->sym) return;
        out.push_back(a->sym);
    }
    collect_syms(a->a, out);
    collect_syms(a->b, out);
}

std::string print_range(const RangeExpr& r) {
    std::string s = r.var;
    if (r.lo) {
        s += "[" + print_expr(r.lo);
        s += r.hi ? ", " + print_expr(r.hi) + ")" : "]";
    }
    if (!r.loc.empty()) s += "@" + r.loc;
    return s;
}

std::string print_arg(const Arg& a) { return a.is_locus ? print_locus(a.locus) : print_expr(a.expr); }

void print_def(std::ostringstream& os, const ProcDef& d, int indent) {
    std::string pad(indent, ' ');
    os << pad << "def " << d.name << "(";
    for (size_t i = 0; i < d.params.size(); ++i) os << (i ? ", " : "") << d.params[i];
    os << ") {\n" << print_stmts(d.body, indent + 2) << pad << "}\n";
}

bool locus_equal(const LocusExpr& a, const LocusExpr& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].var != b[i].var || a[i].loc != b[i].loc || !expr_equal(a[i].lo, b[i].lo) ||
            !expr_equal(a[i].hi, b[i].hi))
            return false;
    }
    return true;
}

bool ket_equal(const KetLit& a, const KetLit& b) {
    if (a.terms.size() != b.terms.size()) return false;
    for (size_t i = 0; i < a.terms.size(); ++i) {
        if (a.terms[i].bits != b.terms[i].bits || !amp_equal(a.terms[i].coef, b.terms[i].coef)) return false;
    }
    return true;
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

bool args_equal(const std::vector<Arg>& a, const std::vector<Arg>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_locus != b[i].is_locus) return false;
        if (a[i].is_locus ? !locus_equal(a[i].locus, b[i].locus) : !expr_equal(a[i].expr, b[i].expr)) return false;
    }
    return true;
}

bool stmt_equal(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case StmtKind::Apply: {
        if (!locus_equal(a.locus, b.locus) || a.gate.name != b.gate.name) return false;
        if (a.gate.params.size() != b.gate.params.size()) return false;
        for (size_t i = 0; i < a.gate.params.size(); ++i)
            if (!expr_equal(a.gate.params[i], b.gate.params[i])) return false;
        return true;
    }
    case StmtKind::Measure: return a.var == b.var && locus_equal(a.locus, b.locus);
    case StmtKind::Send: return a.chan == b.chan && expr_equal(a.expr, b.expr);
    case StmtKind::Recv: return a.chan == b.chan && a.var == b.var;
    case StmtKind::If:
        return expr_equal(a.expr, b.expr) && a.has_else == b.has_else && stmts_equal(a.then_body, b.then_body) &&
               stmts_equal(a.else_body, b.else_body);
    case StmtKind::Skip: return true;
    case StmtKind::Call: return a.callee == b.callee && args_equal(a.args, b.args);
    case StmtKind::Rec:
        return a.callee == b.callee && expr_equal(a.lo, b.lo) && expr_equal(a.hi, b.hi) && args_equal(a.args, b.args);
    }
    return false;
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!stmt_equal(a[i], b[i])) return false;
    return true;
}

bool def_equal(const ProcDef& a, const ProcDef& b) {
    return a.name == b.name && a.params == b.params && stmts_equal(a.body, b.body);
}

template <class T, class F>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, F f) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!f(a[i], b[i])) return false;
    return true;
}

} // namespace

// ---------------------------------------------------------------- amplitudes

cplx eval_amp(const AmpPtr& a, const AmpBindings& env) {
    switch (a->op) {
    case AmpOp::Num: return {a->num, 0.0};
    case AmpOp::Imag: return {0.0, a->num};
    case AmpOp::Sym: {
        auto it = env.find(a->sym);
        if (it == env.end()) throw Error(ErrorKind::Usage, "no value bound for amplitude symbol " + a->sym);
        return it->second;
    }
    case AmpOp::Neg: return -eval_amp(a->a, env);
    case AmpOp::Sqrt: return std::sqrt(eval_amp(a->a, env));
    case AmpOp::Add: return eval_amp(a->a, env) + eval_amp(a->b, env);
    case AmpOp::Sub: return eval_amp(a->a, env) - eval_amp(a->b, env);
    case AmpOp::Mul: return eval_amp(a->a, env) * eval_amp(a->b, env);
    case AmpOp::Div: {
        cplx d = eval_amp(a->b, env);
        if (std::abs(d) == 0.0) throw Error(ErrorKind::Usage, "division by zero in amplitude");
        return eval_amp(a->a, env) / d;
    }
    }
    return {};
}

QuantumValue eval_ket(const KetLit& k, const AmpBindings& env) {
    QuantumValue v;
    if (k.terms.empty()) throw Error(ErrorKind::Usage, "empty ket literal");
    v.width = uint32_t(k.terms.front().bits.size());
    for (const auto& t : k.terms) {
        if (t.bits.size() != v.width)
            throw Error(ErrorKind::Type, "ket terms of different widths: |" + k.terms.front().bits + "> and |" +
                                             t.bits + ">");
        BasisKet b;
        b.amp = t.coef ? eval_amp(t.coef, env) : cplx(1.0);
        b.basis = Bits::parse(t.bits);
        v.kets.push_back(b);
    }
    return canonicalize(std::move(v));
}

std::string print_ket(const KetLit& k) {
    std::string s;
    for (size_t i = 0; i < k.terms.size(); ++i) {
        if (i) s += " + ";
        if (k.terms[i].coef) s += print_amp(k.terms[i].coef);
        s += "|" + k.terms[i].bits + ">";
    }
    return s;
}

std::vector<std::string> ket_symbols(const KetLit& k) {
    std::vector<std::string> out;
    for (const auto& t : k.terms) collect_syms(t.coef, out);
    return out;
}

AmpBindings parse_amp_bindings(const std::string& text) {
    AmpBindings env;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Usage, "amplitude binding without '=': " + item);
        std::string name = item.substr(0, eq);
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        if (name.empty()) throw Error(ErrorKind::Usage, "amplitude binding without a name: " + item);
        AmpPtr a;
        try {
            a = Parser(item.substr(eq + 1)).amp_only();
        } catch (const ParseError& e) {
            throw Error(ErrorKind::Usage, "bad amplitude for " + name + ": " + e.what());
        }
        env[name] = eval_amp(a, {});
    }
    return env;
}

// ---------------------------------------------------------------- programs

Program parse(const std::string& text) { return Parser(text).program(); }

Program parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Usage, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string print_locus(const LocusExpr& l) {
    std::string s;
    for (size_t i = 0; i < l.size(); ++i) s += (i ? " ++ " : "") + print_range(l[i]);
    return s;
}

std::string print_gate(const GateExpr& g) {
    std::string s = g.name;
    if (!g.params.empty()) {
        s += "(";
        for (size_t i = 0; i < g.params.size(); ++i) s += (i ? ", " : "") + print_expr(g.params[i]);
        s += ")";
    }
    return s;
}

std::string print_stmts(const std::vector<Stmt>& body, int indent) {
    std::ostringstream os;
    std::string pad(indent, ' ');
    for (const auto& s : body) {
        os << pad;
        switch (s.kind) {
        case StmtKind::Apply: os << print_locus(s.locus) << " *= " << print_gate(s.gate) << ";\n"; break;
        case StmtKind::Measure: os << s.var << " = measure " << print_locus(s.locus) << ";\n"; break;
        case StmtKind::Send: os << s.chan << " ! " << print_expr(s.expr) << ";\n"; break;
        case StmtKind::Recv: os << s.chan << " ? (" << s.var << ");\n"; break;
        case StmtKind::Skip: os << "skip;\n"; break;
        case StmtKind::If:
            os << "if " << print_expr(s.expr) << " {\n" << print_stmts(s.then_body, indent + 2) << pad << "}";
            if (s.has_else) os << " else {\n" << print_stmts(s.else_body, indent + 2) << pad << "}";
            os << "\n";
            break;
        case StmtKind::Call:
            os << s.callee << "(";
            for (size_t i = 0; i < s.args.size(); ++i) os << (i ? ", " : "") << print_arg(s.args[i]);
            os << ");\n";
            break;
        case StmtKind::Rec:
            os << "Rec(" << print_expr(s.lo) << ", " << print_expr(s.hi) << ", " << s.callee;
            for (const auto& a : s.args) os << ", " << print_arg(a);
            os << ");\n";
            break;
        }
    }
    return os.str();
}

std::string print(const Program& p) {
    std::ostringstream os;
    for (const auto& c : p.consts) os << "const " << c.name << " = " << print_expr(c.value) << ";\n";
    for (const auto& c : p.channels)
        os << "channel " << c.name << "[" << c.size << "] between " << c.a << ", " << c.b << ";\n";
    for (const auto& d : p.defs) print_def(os, d, 0);
    for (const auto& d : p.inits) os << "init " << print_locus(d.locus) << " = " << print_ket(d.ket) << ";\n";
    for (const auto& m : p.membranes) {
        os << "membrane " << m.loc << " {\n";
        for (const auto& n : m.news) {
            os << "  new " << n.name << "[" << n.size << "]";
            if (n.init) os << " = " << print_ket(*n.init);
            os << ";\n";
        }
        for (const auto& d : m.defs) print_def(os, d, 2);
        for (const auto& body : m.processes) os << "  process {\n" << print_stmts(body, 4) << "  }\n";
        os << "}\n";
    }
    return os.str();
}

bool program_equal(const Program& a, const Program& b) {
    return all_equal(a.consts, b.consts,
                     [](const ConstDecl& x, const ConstDecl& y) {
                         return x.name == y.name && expr_equal(x.value, y.value);
                     }) &&
           all_equal(a.channels, b.channels,
                     [](const ChannelDecl& x, const ChannelDecl& y) {
                         return x.name == y.name && x.size == y.size && x.a == y.a && x.b == y.b;
                     }) &&
           all_equal(a.defs, b.defs, def_equal) &&
           all_equal(a.inits, b.inits,
                     [](const InitDecl& x, const InitDecl& y) {
                         return locus_equal(x.locus, y.locus) && ket_equal(x.ket, y.ket);
                     }) &&
           all_equal(a.membranes, b.membranes, [](const MembraneDecl& x, const MembraneDecl& y) {
               return x.loc == y.loc &&
                      all_equal(x.news, y.news,
                                [](const NewDecl& m, const NewDecl& n) {
                                    return m.name == n.name && m.size == n.size && m.init.has_value() == n.init.has_value() &&
                                           (!m.init || ket_equal(*m.init, *n.init));
                                }) &&
                      all_equal(x.defs, y.defs, def_equal) &&
                      all_equal(x.processes, y.processes, stmts_equal);
           });
}

std::string site_of(const std::string& var) {
    auto p = var.find("__");
    return p == std::string::npos ? var : var.substr(0, p);
}

} // namespace disq
