#include <gtest/gtest.h>

#include <random>

#include "disq/oracle.hpp"
#include "disq/typecheck.hpp"
#include "generators.hpp"
#include "support.hpp"

using namespace disq;
using namespace disq::testing;

TEST(Dense, GateMatchesKroneckerOracle) {
    std::mt19937_64 rng(3);
    auto a = random_vector(rng, 2), b = random_vector(rng, 1);
    DenseState d;
    d.add(qubits_of("l", "x", 0, 2), a);
    d.add(qubits_of("l", "y", 0, 1), b);
    // H on y[0] only
    d.apply(*make_gate("H", {}, 1), {{"l", "y", 0}});
    const double r = 1 / std::sqrt(2.0);
    std::vector<cplx> hb{r * (b[0] + b[1]), r * (b[0] - b[1])};
    auto want = kron(a, hb);
    auto order = d.qubits();
    EXPECT_LT(max_abs_diff(d.amplitudes(order), want), 1e-12);
}

TEST(Dense, ReadoutPermutes) {
    std::mt19937_64 rng(4);
    auto v = random_vector(rng, 3);
    DenseState d;
    auto qs = qubits_of("l", "x", 0, 3);
    d.add(qs, v);
    std::vector<Qubit> rev{qs[2], qs[0], qs[1]};
    EXPECT_LT(max_abs_diff(d.amplitudes(rev), permute_dense(v, {2, 0, 1})), 1e-12);
}

TEST(Dense, MeasurementProjects) {
    DenseState d;
    const double r = 1 / std::sqrt(2.0);
    d.add(qubits_of("l", "x", 0, 2), {r, 0, 0, r});
    EXPECT_NEAR(d.measure({{"l", "x", 1}}, Bits(1, 1)), 0.5, 1e-12);
    ASSERT_EQ(d.qubits().size(), 1u);
    auto v = d.amplitudes(d.qubits());
    EXPECT_NEAR(std::abs(v[1]), 1.0, 1e-12);
}

TEST(Oracle, TeleportLockstep) {
    auto c = load_config(corpus_text("teleport.disq"), parse_amp_bindings("z0=0.6,z1=0.8i"));
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto rep = oracle_check(run_random(c, seed, 300));
        EXPECT_LT(rep.max_deviation, 1e-9);
        EXPECT_LT(rep.max_prob_deviation, 1e-9);
    }
}

TEST(Oracle, RandomLocalProgramsLockstep) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        auto src = random_local_program(rng, 6);
        auto chk = type_check_source(src);
        ASSERT_TRUE(chk.ok()) << src << (chk.diagnostics.empty() ? "" : chk.diagnostics[0].message);
        auto c = load_config(src);
        auto tr = run_random(c, uint64_t(i), 500);
        EXPECT_EQ(tr.stop, "terminated") << src;
        auto rep = oracle_check(tr);
        EXPECT_LT(rep.max_deviation, 1e-9) << src;
        EXPECT_LT(rep.max_prob_deviation, 1e-9) << src;
    }
}

TEST(Oracle, RandomDistributedProgramsCheckAndProgress) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 40; ++i) {
        auto src = random_distributed_program(rng);
        auto chk = type_check_source(src);
        ASSERT_TRUE(chk.ok()) << src << (chk.diagnostics.empty() ? "" : to_json(chk.diagnostics[0]).dump());
        auto c = load_config(src);
        auto tr = run_random(c, uint64_t(i), 50);
        for (const auto& s : tr.steps) {
            if (!s.t.next->terminated()) EXPECT_FALSE(membrane_step(s.t.next).empty()) << src;
            ASSERT_TRUE(type_check_config(*s.t.next).ok()) << src;
        }
        auto rep = oracle_check(tr);
        EXPECT_LT(rep.max_deviation, 1e-9) << src;
    }
}
