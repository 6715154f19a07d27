#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "disq/error.hpp"
#include "disq/qstate.hpp"
#include "support.hpp"

using namespace disq;
using namespace disq::testing;

namespace {

QuantumValue make(std::initializer_list<std::pair<cplx, const char*>> kets) {
    QuantumValue v;
    for (const auto& [a, b] : kets) {
        v.kets.push_back({a, Bits::parse(b), {}});
        v.width = uint32_t(std::string(b).size());
    }
    return v;
}

const double r2 = 1.0 / std::sqrt(2.0);

QuantumValue bell() { return make({{r2, "00"}, {r2, "11"}}); }

// sum_{j,m} 1/2 |j j m m>
QuantumValue jjmm() {
    return make({{0.5, "0000"}, {0.5, "0011"}, {0.5, "1100"}, {0.5, "1111"}});
}

} // namespace

TEST(Bits, ParseAndSlices) {
    auto b = Bits::parse("10110");
    EXPECT_EQ(b.value(), 22u);
    EXPECT_EQ(b.str(), "10110");
    EXPECT_EQ(b.prefix(2).str(), "10");
    EXPECT_EQ(b.suffix_from(2).str(), "110");
    EXPECT_EQ(concat(Bits::parse("01"), Bits::parse("1")).str(), "011");
    EXPECT_TRUE(Bits::parse("01") < Bits::parse("10"));
    EXPECT_TRUE(Bits::parse("0") < Bits::parse("00"));
}

TEST(Locus, StringAndQubits) {
    auto l = Locus::from_qubits({{"l", "x", 0}, {"l", "x", 1}, {"r", "c", 0}});
    EXPECT_EQ(l.str(), "x[0,2)@l ++ c[0]@r");
    EXPECT_EQ(l.width(), 3);
    LocalLocus split{{{"x", 0, 1}, {"x", 1, 3}, {"x", 3, 3}}};
    EXPECT_EQ(split.merged().str(), "x[0,3)");
    EXPECT_EQ(split.width(), 3);
}

TEST(Canonicalize, MergesDuplicates) {
    auto v = canonicalize(make({{0.5, "0"}, {0.5, "0"}}));
    ASSERT_EQ(v.kets.size(), 1u);
    EXPECT_NEAR(std::abs(v.kets[0].amp - cplx(1.0)), 0.0, 1e-15);
}

TEST(Canonicalize, DropsZeroAmplitudes) {
    auto v = canonicalize(make({{1.0, "0"}, {0.0, "1"}}));
    ASSERT_EQ(v.kets.size(), 1u);
    EXPECT_EQ(v.kets[0].basis.str(), "0");
}

TEST(Canonicalize, BellUnchangedAndOrderIndependent) {
    auto v = canonicalize(bell());
    EXPECT_TRUE(approx_equal(v, bell(), 0.0));
    auto rev = make({{r2, "11"}, {r2, "00"}});
    auto c = canonicalize(rev);
    ASSERT_EQ(c.kets.size(), 2u);
    EXPECT_EQ(c.kets[0].basis.str(), "00");
    EXPECT_EQ(canonicalize(c).kets.size(), 2u);
}

TEST(Permute, RedArrowRewrite) {
    // prefix 1, swap widths (1,1): |j j m m> -> |j m j m>
    auto p = permute(jjmm(), 1, 1, 1);
    auto expect = make({{0.5, "0000"}, {0.5, "0101"}, {0.5, "1010"}, {0.5, "1111"}});
    EXPECT_TRUE(approx_equal(p, expect));
}

TEST(Permute, EmptySwapIsIdentity) {
    std::mt19937_64 rng(1);
    auto v = random_value(rng, 3);
    EXPECT_TRUE(approx_equal(permute(v, 1, 0, 2), v, 0.0));
}

TEST(Permute, InvolutionAgainstDenseOracle) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        auto v = random_value(rng, 3);
        auto a = permute(v, 0, 1, 2);
        // oracle: segment swap of (q0 | q1 q2) gives qubit order (1,2,0)
        EXPECT_LT(max_abs_diff(a.to_dense(), permute_dense(v.to_dense(), {1, 2, 0})), 1e-12);
        auto b = permute(a, 0, 2, 1);
        EXPECT_TRUE(approx_equal(b, v));
    }
}

TEST(Permute, OverflowIsMalformed) {
    EXPECT_THROW(permute(bell(), 1, 1, 1), Error);
}

TEST(Join, NorWithBell) {
    auto j = join(make({{1.0, "1"}}), bell());
    EXPECT_TRUE(approx_equal(j, make({{r2, "100"}, {r2, "111"}})));
}

TEST(Join, TwoBellPairs) {
    EXPECT_TRUE(approx_equal(join(bell(), bell()), jjmm()));
}

TEST(Join, UnitIsIdentity) {
    EXPECT_TRUE(approx_equal(join(QuantumValue::unit(), bell()), bell()));
    EXPECT_TRUE(approx_equal(join(bell(), QuantumValue::unit()), bell()));
}

TEST(Join, AssociativeAndMatchesKronecker) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        auto a = random_value(rng, 1), b = random_value(rng, 2), c = random_value(rng, 2);
        EXPECT_TRUE(approx_equal(join(join(a, b), c), join(a, join(b, c))));
        EXPECT_LT(max_abs_diff(join(a, b).to_dense(), kron(a.to_dense(), b.to_dense())), 1e-12);
    }
}

TEST(Join, UnequalFrozenDepthRejected) {
    auto a = freeze(bell(), 1);
    EXPECT_THROW(join(a, make({{1.0, "0"}})), Error);
}

TEST(Split, BasisState) {
    auto s = split(make({{1.0, "101"}}), 1);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->first.kets[0].basis.str(), "1");
    EXPECT_EQ(s->second.kets[0].basis.str(), "01");
}

TEST(Split, BellNotSeparable) { EXPECT_FALSE(split(bell(), 1)); }

TEST(Split, RankOneProduct) {
    auto v = make({{r2, "00"}, {r2, "10"}});
    auto s = split(v, 1);
    ASSERT_TRUE(s);
    EXPECT_TRUE(approx_equal(s->first, make({{r2, "0"}, {r2, "1"}})));
    EXPECT_TRUE(approx_equal(s->second, make({{1.0, "0"}})));
}

TEST(Split, InverseOfJoinOnRandomProducts) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        auto a = random_value(rng, 2), b = random_value(rng, 2, 0.6);
        auto s = split(join(a, b), 2);
        ASSERT_TRUE(s);
        EXPECT_TRUE(approx_equal(join(s->first, s->second), join(a, b)));
        // first component equals a up to a global phase
        EXPECT_LT(max_diff_up_to_phase(s->first.to_dense(), a.to_dense()), 1e-9);
    }
}

TEST(Freeze, OneStepApplication) {
    // relay membrane u after both channels exist with the u-local qubits moved last
    QuantumState phi;
    phi.entries.push_back(
        {Locus::from_qubits({{"l", "c", 0}, {"u", "c", 0}, {"u", "cp", 0}, {"r", "cp", 0}}), jjmm()});
    auto moved = reorder_entry(phi, 0, {{"l", "c", 0}, {"r", "cp", 0}, {"u", "cp", 0}, {"u", "c", 0}});
    auto f = freeze(moved.entries[0].value, 2);
    EXPECT_EQ(f.width, 2u);
    // expect sum 1/2 |m j> with frozen |j m>
    ASSERT_EQ(f.kets.size(), 4u);
    for (const auto& k : f.kets) {
        ASSERT_EQ(k.frozen.depth(), 1u);
        Bits fr = k.frozen.top();
        EXPECT_EQ(k.basis.get(0), fr.get(1));
        EXPECT_EQ(k.basis.get(1), fr.get(0));
        EXPECT_NEAR(k.amp.real(), 0.5, 1e-15);
    }
}

TEST(Freeze, ZeroIsIdentityAndRoundTrip) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        auto v = random_value(rng, 4, 0.7);
        EXPECT_TRUE(approx_equal(freeze(v, 0), v, 0.0));
        for (uint32_t k = 0; k <= 4; ++k) EXPECT_TRUE(approx_equal(unfreeze(freeze(v, k), k), v, 0.0));
        auto nested = freeze(freeze(v, 1), 2);
        EXPECT_TRUE(approx_equal(unfreeze(unfreeze(nested, 2), 1), v, 0.0));
    }
}

TEST(Unfreeze, RestoresLineFour) {
    auto v = make({{0.5, "0000"}, {0.5, "0101"}, {0.5, "1110"}, {0.5, "1011"}});
    EXPECT_TRUE(approx_equal(unfreeze(freeze(v, 2), 2), v, 0.0));
}

TEST(Unfreeze, EmptyStackIsError) {
    EXPECT_THROW(unfreeze(bell(), 1), Error);
    EXPECT_THROW(unfreeze(freeze(bell(), 1), 2), Error);
}

TEST(RewriteToPrefix, FigFourMerge) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits({{"l", "c", 0}, {"u", "c", 0}}), bell()});
    phi.entries.push_back({Locus::from_qubits({{"u", "cp", 0}, {"r", "cp", 0}}), bell()});
    auto target = Locus::from_qubits({{"u", "cp", 0}, {"u", "c", 0}});
    auto res = rewrite_to_prefix(phi, target);
    ASSERT_EQ(res.state.entries.size(), 1u);
    EXPECT_EQ(res.locus.str(), "cp[0]@u ++ c[0]@u ++ c[0]@l ++ cp[0]@r");
    for (const auto& k : res.state.entries[0].value.kets) EXPECT_NEAR(std::abs(k.amp), 0.5, 1e-15);
    auto order = phi.qubits();
    EXPECT_LT(max_abs_diff(flatten(phi, order), flatten(res.state, order)), 1e-12);
}

TEST(RewriteToPrefix, AlreadyPrefixedUnchanged) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "x", 0, 2)), bell()});
    auto res = rewrite_to_prefix(phi, Locus::from_qubits({{"l", "x", 0}}));
    EXPECT_EQ(res.state.entries[0].locus, phi.entries[0].locus);
    EXPECT_TRUE(approx_equal(res.state.entries[0].value, bell(), 0.0));
}

TEST(RewriteToPrefix, UnknownQubit) {
    QuantumState phi;
    EXPECT_THROW(rewrite_to_prefix(phi, Locus::from_qubits({{"l", "x", 0}})), Error);
}

TEST(RewriteToPrefix, RandomStatesAgainstDenseOracle) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 30; ++t) {
        QuantumState phi;
        phi.entries.push_back({Locus::from_qubits(qubits_of("l", "a", 0, 2)), random_value(rng, 2)});
        phi.entries.push_back({Locus::from_qubits(qubits_of("l", "b", 0, 3)), random_value(rng, 3, 0.5)});
        phi.entries.push_back({Locus::from_qubits(qubits_of("r", "c", 0, 1)), random_value(rng, 1)});
        auto all = phi.qubits();
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<Qubit> target(all.begin(), all.begin() + 1 + long(rng() % 4));
        auto res = rewrite_to_prefix(phi, Locus::from_qubits(target));
        auto lq = res.locus.qubits();
        for (size_t i = 0; i < target.size(); ++i) EXPECT_EQ(lq[i], target[i]);
        auto order = phi.qubits();
        EXPECT_LT(max_abs_diff(flatten(phi, order), flatten(res.state, order)), 1e-9);
        double total = 1;
        for (const auto& e : res.state.entries) total *= norm2(e.value);
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Flatten, BellPair) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "x", 0, 2)), bell()});
    auto v = flatten(phi, qubits_of("l", "x", 0, 2));
    EXPECT_LT(max_abs_diff(v, {r2, 0, 0, r2}), 1e-15);
}

TEST(Flatten, TwoBellPairsIsKronecker) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "x", 0, 2)), bell()});
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "y", 0, 2)), bell()});
    auto order = qubits_of("l", "x", 0, 2);
    auto more = qubits_of("l", "y", 0, 2);
    order.insert(order.end(), more.begin(), more.end());
    std::vector<cplx> b{r2, 0, 0, r2};
    EXPECT_LT(max_abs_diff(flatten(phi, order), kron(b, b)), 1e-15);
}

TEST(Flatten, LineFiveState) {
    QuantumState phi;
    auto locus = Locus::from_qubits({{"l", "c", 0}, {"u", "cp", 0}, {"u", "c", 0}, {"r", "cp", 0}});
    phi.entries.push_back({locus, make({{0.5, "0100"}, {0.5, "0001"}, {0.5, "1010"}, {0.5, "1111"}})});
    auto v = flatten(phi, locus.qubits());
    std::vector<cplx> expect(16);
    for (int i : {0b0100, 0b0001, 0b1010, 0b1111}) expect[size_t(i)] = 0.5;
    EXPECT_LT(max_abs_diff(v, expect), 1e-15);
}

TEST(Flatten, FrozenIsError) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "x", 0, 1)), freeze(bell(), 1)});
    EXPECT_THROW(flatten(phi, qubits_of("l", "x", 0, 1)), Error);
}

TEST(CanonicalState, SortsQubitsPreservingMeaning) {
    std::mt19937_64 rng(7);
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits({{"r", "y", 1}, {"l", "x", 0}, {"r", "y", 0}}), random_value(rng, 3)});
    phi.entries.push_back({Locus::from_qubits({{"l", "a", 2}}), random_value(rng, 1)});
    auto c = canonical_state(phi);
    EXPECT_EQ(c.entries[0].locus.str(), "a[2]@l");
    EXPECT_EQ(c.entries[1].locus.str(), "x[0]@l ++ y[0,2)@r");
    auto order = phi.qubits();
    EXPECT_LT(max_abs_diff(flatten(phi, order), flatten(c, order)), 1e-12);
}

TEST(Json, DumpFormat) {
    QuantumState phi;
    phi.entries.push_back({Locus::from_qubits(qubits_of("l", "x", 0, 2)), bell()});
    auto j = to_json(phi);
    EXPECT_EQ(j[0]["locus"], "x[0,2)@l");
    EXPECT_EQ(j[0]["kets"][1]["basis"], "11");
    EXPECT_NEAR(j[0]["kets"][0]["amp"][0].get<double>(), r2, 1e-15);
    EXPECT_TRUE(j[0]["kets"][0]["frozen"].empty());
}
