#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "disq/error.hpp"
#include "disq/semantics.hpp"
#include "support.hpp"

using namespace disq;
using namespace disq::testing;

namespace {

ConfigPtr teleport() { return load_config(corpus_text("teleport.disq"), parse_amp_bindings("z0=0.6,z1=0.8i")); }

// Every choice at c offers a distribution.
void expect_stochastic(const Config& c, const std::vector<Transition>& ts) {
    std::map<std::string, double> mass;
    for (const auto& t : ts) mass[t.choice] += t.label.prob;
    for (const auto& [choice, p] : mass) EXPECT_NEAR(p, 1.0, 1e-12) << choice << " in " << to_json(c).dump();
}

void expect_normalized(const QuantumState& s) {
    for (const auto& e : s.entries) EXPECT_NEAR(norm2(e.value), 1.0, 1e-9) << e.locus.str();
}

// Takes the first non-stuttering move until nothing moves.
ConfigPtr finish(ConfigPtr c) {
    for (int guard = 0; guard < 100; ++guard) {
        const Transition* pick = nullptr;
        auto ts = membrane_step(c);
        for (const auto& t : ts)
            if (!t.stutter(*c)) {
                pick = &t;
                break;
            }
        if (!pick) return c;
        c = pick->next;
    }
    return c;
}

} // namespace

TEST(Config, InitialTeleport) {
    auto c = teleport();
    ASSERT_EQ(c->membranes.size(), 2u);
    EXPECT_EQ(c->membranes[0].loc, "l");
    ASSERT_EQ(c->membranes[0].prefixes.size(), 1u);
    EXPECT_EQ(c->membranes[0].prefixes[0].str(), "chan c[1] with r");
    ASSERT_EQ(c->state.entries.size(), 1u);
    EXPECT_EQ(c->state.entries[0].locus.str(), "x[0,2)@l");
}

TEST(Config, KeyIgnoresGlobalPhaseAndProcessOrder) {
    auto a = load_config("membrane l { new x[1] = |0> + |1>; process { x[0] *= H; } process { skip; } }");
    auto b = load_config("membrane l { new x[1] = 0.8i|0> + 0.8i|1>; process { skip; } process { x[0] *= H; } }");
    auto s = [](const ConfigPtr& c) {
        QuantumState st = c->state;
        return make_config(st, c->membranes);
    };
    EXPECT_EQ(s(a)->key, s(a)->key);
    // unnormalized inputs differ in magnitude, so scale b to a first
    QuantumState st = b->state;
    for (auto& k : st.entries[0].value.kets) k.amp /= 0.8;
    EXPECT_EQ(make_config(st, b->membranes)->key, a->key);
}

TEST(Config, RejectsBadDeclarations) {
    EXPECT_THROW(load_config("membrane l { process { skip; } } membrane l { process { skip; } }"), Error);
    EXPECT_THROW(load_config("channel c[1] between l, q; membrane l { process { skip; } }"), Error);
    EXPECT_THROW(load_config("channel c[1] between l, r; membrane l { new c[1]; process { skip; } } "
                             "membrane r { process { skip; } }"),
                 Error);
    EXPECT_THROW(load_config("init x[0,2)@l = |0>; membrane l { new x[2]; process { skip; } }"), Error);
}

TEST(Config, InitCoversAndPadsArrays) {
    auto c = load_config("init x[1]@l ++ y[0]@r = |11>;\n"
                         "membrane l { new x[2]; process { skip; } }\n"
                         "membrane r { new y[1]; process { skip; } }");
    EXPECT_EQ(c->state.qubit_count(), 3u);
    EXPECT_TRUE(c->membranes[0].prefixes.empty());
    auto e = c->state.find(Qubit{"l", "x", 0});
    ASSERT_TRUE(e);
    EXPECT_EQ(c->state.entries[*e].value.kets[0].basis.str(), "0");
}

TEST(Step, SendRecvScript) {
    auto c = load_config(corpus_text("sendrecv.disq"));
    auto tr = run_script(c, {"l#1", "r#1", "l.r", "l", "r"});
    ASSERT_EQ(tr.steps.size(), 5u);
    EXPECT_EQ(tr.steps[0].t.rule, Rule::Mem);
    EXPECT_EQ(tr.steps[2].t.rule, Rule::Comm);
    EXPECT_EQ(tr.steps[3].t.rule, Rule::End);
    EXPECT_NEAR(tr.steps.back().path_prob, 0.25, 1e-12);
    EXPECT_EQ(tr.stop, "terminated");
    EXPECT_TRUE(tr.last()->terminated());
}

TEST(Step, SendRecvExhaustiveContainsScriptedPath) {
    auto c = load_config(corpus_text("sendrecv.disq"));
    auto leaves = run_exhaustive(c, 8);
    bool found = false;
    for (const auto& lf : leaves) {
        std::vector<std::string> rules;
        for (const auto& t : lf.path) rules.push_back(to_string(t.rule));
        if (rules == std::vector<std::string>{"S-Mem", "S-Mem", "S-Comm", "S-End", "S-End"} &&
            lf.path[0].label.choice == "l") {
            found = true;
            EXPECT_NEAR(lf.prob, 0.25, 1e-12);
            EXPECT_TRUE(lf.terminated);
        }
        for (const auto& t : lf.path) EXPECT_FALSE(t.rule == Rule::Self);
    }
    EXPECT_TRUE(found);
}

TEST(Step, ReceivedValueIsSubstituted) {
    auto c = load_config("membrane l { process { a ! 2 + 3; } }\n"
                         "membrane r { new q[1]; process { a ? (y); if y == 5 { q[0] *= X; } } }");
    auto tr = run_script(c, {"r", "l", "r", "l.r"});
    const Membrane* r = tr.last()->find("r");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->procs.size(), 1u);
    EXPECT_EQ(print_proc(r->procs[0]), "if 1 { q[0] *= X; 0 } else { 0 }; 0");
}

TEST(Step, RelayOnlyChannelCreationIsEnabled) {
    auto c = load_config(corpus_text("relay.disq"));
    auto ts = membrane_step(c);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].choice, "l.u");
    EXPECT_EQ(ts[0].rule, Rule::NewChan);
    const auto& s = ts[0].next->state;
    ASSERT_EQ(s.entries.size(), 1u);
    EXPECT_EQ(s.entries[0].locus.str(), "c[0]@l ++ c[0]@u");
    // afterwards u still waits on c' with r; only l may move on its own
    std::set<std::string> choices;
    for (const auto& t : membrane_step(ts[0].next)) choices.insert(t.choice);
    EXPECT_EQ(choices, (std::set<std::string>{"l", "l/end", "r.u"}));
}

TEST(Step, NewChanCreatesOneBellPairPerIndex) {
    auto c = load_config("channel c[3] between l, r; membrane l { process { skip; } } membrane r { process { skip; } }");
    auto ts = membrane_step(c);
    ASSERT_EQ(ts.size(), 1u);
    const auto& s = ts[0].next->state;
    ASSERT_EQ(s.entries.size(), 3u);
    for (const auto& e : s.entries) {
        EXPECT_EQ(e.value.width, 2u);
        ASSERT_EQ(e.value.kets.size(), 2u);
        EXPECT_EQ(e.value.kets[0].basis.str(), "00");
        EXPECT_EQ(e.value.kets[1].basis.str(), "11");
    }
}

TEST(Step, TeleportFirstMeasurementIsFair) {
    auto c = teleport();
    auto tr = run_script(c, {"l.r", "l", "l"});
    auto ts = membrane_step(tr.last());
    std::vector<double> ps;
    for (const auto& t : ts)
        if (t.label.obs) {
            EXPECT_EQ(t.label.obs->site, "u");
            EXPECT_EQ(t.label.obs->loc, "l");
            ps.push_back(t.label.prob);
        }
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_NEAR(ps[0], 0.5, 1e-12);
    EXPECT_NEAR(ps[1], 0.5, 1e-12);
}

TEST(Step, TeleportScriptedMovesEntanglement) {
    auto c = teleport();
    for (const char* u : {"0", "1"})
        for (const char* w : {"0", "1"}) {
            auto tr = run_script(c, {"l.r", "l", "l", std::string("l:") + u, std::string("l:") + w, "l", "r", "l.r",
                                     "l", "r", "l.r"});
            auto last = finish(tr.last());
            ASSERT_TRUE(last->terminated());
            std::vector<Qubit> order{{"l", "x", 0}, {"r", "c", 0}};
            auto got = flatten(last->state, order);
            std::vector<cplx> want{0.6, 0, 0, cplx(0, 0.8)};
            EXPECT_LT(max_diff_up_to_phase(got, want), 1e-9) << u << w;
            EXPECT_EQ(last->state.qubit_count(), 2u);
        }
}

TEST(Step, TeleportRandomRunsAgree) {
    auto c = teleport();
    std::vector<Qubit> order{{"l", "x", 0}, {"r", "c", 0}};
    std::vector<cplx> want{0.6, 0, 0, cplx(0, 0.8)};
    for (uint64_t seed = 1; seed <= 40; ++seed) {
        auto tr = run_random(c, seed, 400);
        ASSERT_EQ(tr.stop, "terminated") << seed;
        ConfigPtr fin = tr.last();
        EXPECT_LT(max_diff_up_to_phase(flatten(fin->state, order), want), 1e-9) << seed;
        for (const auto& s : tr.steps) expect_normalized(s.t.next->state);
    }
}

TEST(Step, ChoicesAreDistributionsAlongRandomRuns) {
    for (const char* f : {"teleport.disq", "sendrecv.disq", "relay.disq"}) {
        auto c = load_config(corpus_text(f), parse_amp_bindings("z0=0.6,z1=0.8i"));
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            auto tr = run_random(c, seed, 200);
            ConfigPtr cur = c;
            for (const auto& s : tr.steps) {
                expect_stochastic(*cur, membrane_step(cur));
                cur = s.t.next;
            }
        }
    }
}

TEST(Step, MembraneStepIsDeterministic) {
    auto c = teleport();
    auto tr = run_random(c, 7, 30);
    ConfigPtr cur = c;
    for (const auto& s : tr.steps) {
        auto a = membrane_step(cur), b = membrane_step(cur);
        ASSERT_EQ(a.size(), b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].label.str(), b[i].label.str());
            EXPECT_EQ(a[i].next->key, b[i].next->key);
        }
        cur = s.t.next;
    }
}

TEST(Step, MeasurementOutcomesSumToOne) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto v = random_vector(rng, 3);
        std::string src = "membrane l { new x[3] = " + ket_literal(v, 3) + "; process { m = measure x[0] ++ x[2]; } }";
        auto c = load_config(src);
        auto ts = membrane_step(c);
        double total = 0;
        for (const auto& t : ts) {
            total += t.label.prob;
            expect_normalized(t.next->state);
            // independent check: marginal of bits 0 and 2
            double want = 0;
            Bits d = t.label.obs->bits;
            for (uint64_t i = 0; i < 8; ++i)
                if ((((i >> 2) & 1) << 1 | (i & 1)) == d.value()) want += std::norm(v[i]);
            EXPECT_NEAR(t.label.prob, want, 1e-9);
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(Step, InvalidGateFailsAtRuntime) {
    auto c = load_config("membrane l { new x[2] = |00>; process { x[0] *= CX; } }");
    EXPECT_THROW(membrane_step(c), Error);
}

TEST(Step, MaxLocalEntanglement) {
    auto c = teleport();
    EXPECT_EQ(max_local_entanglement(c->state, "l"), 2);
    auto tr = run_script(c, {"l.r", "l"});
    EXPECT_EQ(max_local_entanglement(tr.last()->state, "l"), 3);
    EXPECT_EQ(max_local_entanglement(tr.last()->state, "r"), 1);
}
