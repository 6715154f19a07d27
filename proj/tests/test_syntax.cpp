#include <gtest/gtest.h>

#include <random>

#include "disq/syntax.hpp"

using namespace disq;

namespace {

const char* kTeleport = R"(
// teleport one qubit from l to r
channel c[1] between l, r;

membrane l {
  new x[2] = z0|00> + z1|11>;
  process {
    x[1] ++ c[0] *= CX;
    x[1] *= H;
    u = measure x[1];
    w = measure c'[0];
    a ! u;
    b ! w;
  }
}

membrane r {
  process {
    a ? (u);
    b ? (w);
    if u { c[0] *= Z; }
    if w == 1 { c[0] *= X; } else { skip; }
  }
}
)";

ExprPtr random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 10);
    switch (pick(rng)) {
    case 0: return Expr::make_nat(rng() % 50);
    case 1: return Expr::make_bits(Bits(rng() % 16, 4));
    case 2: return Expr::make_var(std::string(1, char('a' + rng() % 3)));
    case 3: return Expr::make_not(random_expr(rng, depth - 1));
    case 4: return Expr::make_bin(ExprOp::Index, Expr::make_var("m"), random_expr(rng, depth - 1));
    default: {
        static const ExprOp ops[] = {ExprOp::Add, ExprOp::Sub, ExprOp::Mul, ExprOp::Mod, ExprOp::Pow, ExprOp::Eq, ExprOp::Lt};
        return Expr::make_bin(ops[rng() % 7], random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    }
    }
}

Value eval_str(const std::string& e) {
    Program p = parse("const k = " + e + ";");
    return eval(p.consts.at(0).value);
}

} // namespace

TEST(Parse, TeleportShape) {
    Program p = parse(kTeleport);
    ASSERT_EQ(p.channels.size(), 1u);
    EXPECT_EQ(p.channels[0].a, "l");
    ASSERT_EQ(p.membranes.size(), 2u);
    const auto& l = p.membranes[0];
    ASSERT_EQ(l.news.size(), 1u);
    ASSERT_TRUE(l.news[0].init.has_value());
    EXPECT_EQ(ket_symbols(*l.news[0].init), (std::vector<std::string>{"z0", "z1"}));
    ASSERT_EQ(l.processes.size(), 1u);
    const auto& body = l.processes[0];
    ASSERT_EQ(body.size(), 6u);
    EXPECT_EQ(body[0].kind, StmtKind::Apply);
    EXPECT_EQ(print_locus(body[0].locus), "x[1] ++ c[0]");
    EXPECT_EQ(body[2].kind, StmtKind::Measure);
    EXPECT_EQ(body[3].locus[0].var, "c'");
    EXPECT_EQ(body[4].kind, StmtKind::Send);
    const auto& r = p.membranes[1].processes[0];
    EXPECT_EQ(r[0].kind, StmtKind::Recv);
    EXPECT_EQ(r[3].kind, StmtKind::If);
    EXPECT_TRUE(r[3].has_else);
    EXPECT_EQ(r[0].pos.line, 19);
}

TEST(Parse, PrintRoundTrip) {
    Program p = parse(kTeleport);
    std::string once = print(p);
    Program q = parse(once);
    EXPECT_TRUE(program_equal(p, q));
    EXPECT_EQ(print(q), once);
}

TEST(Parse, RoundTripRandomExpressions) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        ExprPtr e = random_expr(rng, 4);
        Program p = parse("const k = " + print_expr(e) + ";");
        ASSERT_TRUE(expr_equal(p.consts[0].value, e)) << print_expr(e);
    }
}

TEST(Parse, Precedence) {
    EXPECT_EQ(eval_str("1 + 2 * 3 ^ 2").v, 19u);
    EXPECT_EQ(eval_str("2 ^ 3 ^ 2").v, 512u);
    EXPECT_EQ(eval_str("10 - 3 - 2").v, 5u);
    EXPECT_EQ(eval_str("7 % 4 == 3").v, 1u);
    EXPECT_EQ(eval_str("7 ^ 4 % 15").v, 1u);
    EXPECT_EQ(eval_str("!0b00").v, 1u);
    Value bit = eval_str("0b101[1]");
    EXPECT_EQ(bit.v, 0u);
    EXPECT_EQ(bit.width, 1);
    EXPECT_EQ(eval_str("0b101[2]").v, 1u);
}

TEST(Parse, ErrorsNameExpectedTokens) {
    try {
        parse("membrane l {\n  process { x *= ; }\n}");
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.pos().line, 2);
        EXPECT_EQ(e.pos().col, 18);
        EXPECT_EQ(e.expected(), std::vector<std::string>{"identifier"});
        EXPECT_NE(std::string(e.what()).find("found ';'"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("membrane l { new x[2] }"), ParseError);
    EXPECT_THROW(parse("process { }"), ParseError);
    EXPECT_THROW(parse("membrane l { process { x[0] *= H } }"), ParseError);
    EXPECT_THROW(parse("membrane l { new x[1] = |2>; }"), ParseError);
    EXPECT_THROW(parse("const k = 0b;"), ParseError);
    EXPECT_THROW(parse("membrane l { process { if = 1; } }"), ParseError);
}

TEST(Ket, EvaluatesAmplitudes) {
    Program p = parse("membrane l { new x[2] = 0.6|00> - 0.8i|11> + sqrt(0.25)*(1+i)/2|01>; }");
    QuantumValue v = eval_ket(*p.membranes[0].news[0].init, {});
    ASSERT_EQ(v.kets.size(), 3u);
    EXPECT_EQ(v.kets[0].basis.str(), "00");
    EXPECT_NEAR(std::abs(v.kets[0].amp - cplx(0.6, 0)), 0, 1e-15);
    EXPECT_NEAR(std::abs(v.kets[1].amp - cplx(0.25, 0.25)), 0, 1e-15);
    EXPECT_NEAR(std::abs(v.kets[2].amp - cplx(0, -0.8)), 0, 1e-15);
}

TEST(Ket, SymbolsAndBindings) {
    AmpBindings env = parse_amp_bindings("z0=0.6, z1=0.8i,z2=-sqrt(0.5)");
    EXPECT_EQ(env.at("z0"), cplx(0.6, 0));
    EXPECT_EQ(env.at("z1"), cplx(0, 0.8));
    EXPECT_NEAR(env.at("z2").real(), -std::sqrt(0.5), 1e-15);
    Program p = parse("membrane l { new x[1] = z0|0> + z1|1>; }");
    QuantumValue v = eval_ket(*p.membranes[0].news[0].init, env);
    EXPECT_NEAR(norm2(v), 1.0, 1e-12);
    EXPECT_THROW(eval_ket(*p.membranes[0].news[0].init, {}), Error);
    EXPECT_THROW(parse_amp_bindings("z0"), Error);
    EXPECT_THROW(parse_amp_bindings("z0=q"), Error);
    Program bad = parse("membrane l { new x[2] = |0> + |11>; }");
    EXPECT_THROW(eval_ket(*bad.membranes[0].news[0].init, {}), Error);
}

TEST(Ket, PrintRoundTrip) {
    Program p = parse("membrane l { new x[2] = -|00> + (0.5 - 2i)*z|01> - sqrt(2)/2|10>; }");
    std::string s = print(p);
    EXPECT_TRUE(program_equal(p, parse(s))) << s;
}

TEST(Expand, RecUnrollsWithIndex) {
    Program p = parse(R"(
const n = 3;
def Step(j, q) { q[j] ++ q[n - j] *= CX; }
membrane l {
  new x[4];
  process { Rec(0, n, Step, x); }
}
)");
    Program e = expand_rec(p);
    const auto& body = e.membranes[0].processes[0];
    ASSERT_EQ(body.size(), 3u);
    EXPECT_EQ(to_local_locus(body[0].locus).str(), "x[0] ++ x[3]");
    EXPECT_EQ(to_local_locus(body[1].locus).str(), "x[1,3)");
    EXPECT_EQ(to_local_locus(body[2].locus).str(), "x[2] ++ x[1]");
    EXPECT_TRUE(e.defs.empty());
    EXPECT_TRUE(e.consts.empty());
}

TEST(Expand, HygienicBindersAndChannelParams) {
    Program p = parse(R"(
def Te(q, ch) { u = measure q; ch ! u; }
membrane l {
  new x[2];
  process { Te(x[0], a); Te(x[1], b); u = measure x; }
}
)");
    Program e = expand_rec(p);
    const auto& body = e.membranes[0].processes[0];
    ASSERT_EQ(body.size(), 5u);
    EXPECT_EQ(body[0].var, "u__1");
    EXPECT_EQ(body[0].site, "u");
    EXPECT_EQ(body[1].chan, "a");
    EXPECT_EQ(print_expr(body[1].expr), "u__1");
    EXPECT_EQ(body[2].var, "u__2");
    EXPECT_EQ(body[3].chan, "b");
    EXPECT_EQ(body[4].var, "u");
    EXPECT_EQ(to_local_locus(body[4].locus).str(), "x[0,2)");
    EXPECT_EQ(site_of("u__12"), "u");
    EXPECT_EQ(site_of("c'"), "c'");
}

TEST(Expand, LocusParameterSlicing) {
    Program p = parse(R"(
def Maj(q) { q[2] ++ q[1] *= CX; q *= MAJ; }
channel c[2] between l, r;
membrane l {
  new y[3];
  def Local(z) { Maj(y[0] ++ z ++ y[2]); }
  process { Local(c[1]); }
}
membrane r { process { skip; } }
)");
    Program e = expand_rec(p);
    const auto& body = e.membranes[0].processes[0];
    ASSERT_EQ(body.size(), 2u);
    EXPECT_EQ(to_local_locus(body[0].locus).str(), "y[2] ++ c[1]");
    EXPECT_EQ(to_local_locus(body[1].locus).str(), "y[0] ++ c[1] ++ y[2]");
}

TEST(Expand, ClassicalBitArgument) {
    Program p = parse(R"(
def Fix(b, q) { if b { q *= X; } }
membrane l {
  new x[1];
  process { m = measure x; Fix(m[0], x); }
}
)");
    Program e = expand_rec(p);
    const auto& body = e.membranes[0].processes[0];
    ASSERT_EQ(body.size(), 2u);
    EXPECT_EQ(body[1].kind, StmtKind::If);
    EXPECT_EQ(print_expr(body[1].expr), "m[0]");
}

TEST(Expand, Errors) {
    auto expect_kind = [](const char* src, ErrorKind k) {
        try {
            expand_rec(parse(src));
            ADD_FAILURE() << "no error for " << src;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), k) << e.what();
        }
    };
    expect_kind("def A() { A(); } membrane l { process { A(); } }", ErrorKind::Expansion);
    expect_kind("def A(q) { q *= H; } membrane l { new x[1]; process { A(); } }", ErrorKind::Expansion);
    expect_kind("membrane l { process { B(); } }", ErrorKind::Expansion);
    expect_kind("def S(j) { skip; } membrane l { process { a ? (k); Rec(0, k, S); } }", ErrorKind::Expansion);
    expect_kind("membrane l { new x[2]; process { x[0,3) *= H; } }", ErrorKind::Expansion);
    expect_kind("def A(q) { a ! q; } membrane l { new x[1]; process { A(x); } }", ErrorKind::Kind);
    expect_kind("def A(q) { q ! 1; } membrane l { process { A(3); } }", ErrorKind::Kind);
    expect_kind("def A(j) { j *= H; } membrane l { process { A(1); } }", ErrorKind::Expansion);
}

TEST(Expand, InitDeclarations) {
    Program p = parse(R"(
const n = 2;
membrane l { new x[2]; }
membrane r { new y[2]; }
init x[0,n)@l ++ y[1]@r = |001> + |110>;
)");
    Program e = expand_rec(p);
    ASSERT_EQ(e.inits.size(), 1u);
    EXPECT_EQ(to_global_locus(e.inits[0].locus).str(), "x[0,2)@l ++ y[1]@r");
}
