#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "disq/bits.hpp"
#include "disq/error.hpp"
#include "disq/qstate.hpp"

namespace disq {

// ---- classical expressions ----

enum class ExprOp { Nat, BitLit, Var, Add, Sub, Mul, Mod, Pow, Eq, Lt, Not, Index };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op = ExprOp::Nat;
    uint64_t nat = 0;
    Bits bits;
    std::string name;
    ExprPtr a, b;

    static ExprPtr make_nat(uint64_t v);
    static ExprPtr make_bits(Bits b);
    static ExprPtr make_var(std::string n);
    static ExprPtr make_bin(ExprOp op, ExprPtr a, ExprPtr b);
    static ExprPtr make_not(ExprPtr a);
};

// A classical value: a measured bitstring (width >= 0) or a natural number (width < 0).
struct Value {
    uint64_t v = 0;
    int width = -1;

    bool truthy() const { return v != 0; }
    std::string str() const;
    ExprPtr to_expr() const;
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
std::string print_expr(const ExprPtr& e);
// Folds closed subterms; leaves free variables in place.
ExprPtr fold(const ExprPtr& e);
// Evaluates a closed expression; throws Runtime error on free variables.
Value eval(const ExprPtr& e);
std::vector<std::string> free_vars(const ExprPtr& e);
ExprPtr subst(const ExprPtr& e, const std::string& var, const ExprPtr& val);

// ---- ket literals with symbolic amplitudes ----

enum class AmpOp { Num, Imag, Sym, Add, Sub, Mul, Div, Neg, Sqrt };

struct AmpExpr;
using AmpPtr = std::shared_ptr<const AmpExpr>;

struct AmpExpr {
    AmpOp op = AmpOp::Num;
    double num = 0;
    std::string sym;
    AmpPtr a, b;
};

struct KetTerm {
    AmpPtr coef;  // null means 1
    std::string bits;
};

struct KetLit {
    std::vector<KetTerm> terms;
};

using AmpBindings = std::map<std::string, cplx>;

cplx eval_amp(const AmpPtr& a, const AmpBindings& env);
QuantumValue eval_ket(const KetLit& k, const AmpBindings& env);
std::string print_ket(const KetLit& k);
std::vector<std::string> ket_symbols(const KetLit& k);
// Parses "z0=0.6,z1=0.8i" style bindings.
AmpBindings parse_amp_bindings(const std::string& text);

// ---- loci, gates, statements ----

struct RangeExpr {
    std::string var;
    ExprPtr lo;           // null for a bare array name
    ExprPtr hi;           // null for the x[j] sugar
    std::string loc;      // only inside init declarations
};

using LocusExpr = std::vector<RangeExpr>;

struct GateExpr {
    std::string name;
    std::vector<ExprPtr> params;
};

struct Arg {
    bool is_locus = false;
    LocusExpr locus;
    ExprPtr expr;
};

enum class StmtKind { Apply, Measure, Send, Recv, If, Skip, Call, Rec };

struct Stmt {
    StmtKind kind = StmtKind::Skip;
    SourcePos pos;
    LocusExpr locus;
    GateExpr gate;
    std::string var;    // Measure / Recv binder
    std::string site;   // source name of the binder (stable under hygienic renaming)
    std::string chan;   // Send / Recv
    ExprPtr expr;       // Send value, If condition
    std::vector<Stmt> then_body, else_body;
    bool has_else = false;
    std::string callee; // Call / Rec
    std::vector<Arg> args;
    ExprPtr lo, hi;     // Rec bounds
};

struct ProcDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<Stmt> body;
    SourcePos pos;
};

struct NewDecl {
    std::string name;
    int size = 0;
    std::optional<KetLit> init;
    SourcePos pos;
};

struct MembraneDecl {
    std::string loc;
    std::vector<NewDecl> news;
    std::vector<ProcDef> defs;
    std::vector<std::vector<Stmt>> processes;
    SourcePos pos;
};

struct ChannelDecl {
    std::string name;
    int size = 0;
    std::string a, b;
    SourcePos pos;
};

struct ConstDecl {
    std::string name;
    ExprPtr value;
};

struct InitDecl {
    LocusExpr locus;
    KetLit ket;
    SourcePos pos;
};

struct Program {
    std::vector<ConstDecl> consts;
    std::vector<ChannelDecl> channels;
    std::vector<ProcDef> defs;
    std::vector<InitDecl> inits;
    std::vector<MembraneDecl> membranes;
};

Program parse(const std::string& text);
Program parse_file(const std::string& path);
std::string print(const Program& p);
std::string print_stmts(const std::vector<Stmt>& body, int indent);
std::string print_locus(const LocusExpr& l);
std::string print_gate(const GateExpr& g);
bool program_equal(const Program& a, const Program& b);

// Inlines process definitions and Rec loops; binders of inlined bodies are renamed
// to `name__k` so each instance binds fresh names.
Program expand_rec(const Program& p);

// Literal-only conversions used after expansion.
LocalLocus to_local_locus(const LocusExpr& l);
Locus to_global_locus(const LocusExpr& l);
std::vector<int64_t> gate_params(const GateExpr& g);

// Strips a hygienic `__k` suffix.
std::string site_of(const std::string& var);

} // namespace disq
