#include <gtest/gtest.h>

#include <numeric>

#include "hvsim/dqp.hpp"
#include "support.hpp"

using namespace hvsim;

namespace {

const std::array<TheoryId, 3> kIndifferent = {TheoryId::Dieks, TheoryId::Flow, TheoryId::Schrodinger};

CVector final_amplitudes(const CircuitSequence& c) {
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(c.dim()));
    psi(0) = 1.0;
    for (const auto& s : c.steps) psi = compile_step(s, c.qubits) * psi;
    return psi;
}

TruthTable permutation_table(int n, std::uint64_t offset, int m) {
    std::vector<std::uint64_t> t(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < t.size(); ++x) t[x] = (x * 5 + 3) % t.size() + offset;
    return TruthTable(n, m, t);
}

TruthTable point_table(int n, std::uint64_t marked) {
    std::vector<std::uint64_t> t(std::size_t{1} << n, 0);
    t[marked] = 1;
    return TruthTable(n, 1, t);
}

std::vector<Gate> hadamards_except(int l, int skip) {
    std::vector<Gate> g;
    for (int q = 0; q < l; ++q)
        if (q != skip) g.push_back(Gate::hadamard(q));
    return g;
}

double verdict_accuracy(const TruthTable& p0, const TruthTable& p1, TheoryId id, Verdict want, std::size_t runs,
                        std::uint64_t seed) {
    std::size_t correct = 0;
    for (std::size_t r = 0; r < runs; ++r)
        correct += statistical_difference(p0, p1, id, 1, derive_rng(seed, r)()).verdict == want;
    return static_cast<double>(correct) / static_cast<double>(runs);
}

}  // namespace

// ---------------------------------------------------------------- tables and hashing

TEST(Dqp, TruthTableValidation) {
    EXPECT_THROW(TruthTable(2, 1, {0, 1, 0}), Error);
    EXPECT_THROW(TruthTable(1, 1, {0, 2}), Error);
    TruthTable t(2, 2, {0, 3, 0, 1});
    EXPECT_EQ(t.marked(), (std::vector<std::uint64_t>{1, 3}));
}

TEST(Dqp, VariationDistanceExamples) {
    TruthTable p = permutation_table(3, 0, 4);
    EXPECT_EQ(variation_distance(p, p), 0.0);
    EXPECT_NEAR(variation_distance(TruthTable(1, 1, {0, 1}), TruthTable(1, 1, {0, 0})), 0.5, 1e-15);
    EXPECT_NEAR(variation_distance(p, permutation_table(3, 8, 4)), 1.0, 1e-15);
    try {
        variation_distance(TruthTable(1, 1, {0, 1}), TruthTable(1, 2, {0, 1}));
        FAIL() << "expected WidthMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WidthMismatch);
    }
}

TEST(Dqp, PromiseCheck) {
    EXPECT_NO_THROW(require_promise(TruthTable(1, 1, {0, 1}), TruthTable(1, 1, {1, 0})));
    TruthTable a(2, 2, {0, 1, 2, 3}), b(2, 2, {0, 1, 0, 1});
    ASSERT_NEAR(variation_distance(a, b), 0.5, 1e-15);
    try {
        require_promise(a, b);
        FAIL() << "expected PromiseUnverifiable";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PromiseUnverifiable);
    }
}

TEST(Dqp, AffineHashIsAffine) {
    Rng rng = derive_rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 1 + static_cast<int>(uniform_below(rng, 6));
        int k = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n + 1)));
        AffineHash h = vv_draw(n, k, rng);
        std::uint64_t x = uniform_below(rng, std::uint64_t{1} << n), y = uniform_below(rng, std::uint64_t{1} << n);
        EXPECT_EQ(h(x) ^ h(y), h.linear(x ^ y));
        EXPECT_LT(h(x), std::uint64_t{1} << k);
    }
    AffineHash a = vv_draw(4, 3, 9), b = vv_draw(4, 3, 9);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.offset, b.offset);
}

TEST(Dqp, SingletonAlwaysIsolated) {
    EXPECT_EQ(vv_isolation_rate({5}, 4, 3, 1000, 2), 1.0);
}

TEST(Dqp, IsolationRateInWindow) {
    const int n = 5;
    for (int k = 2; k <= n + 1; ++k) {
        for (std::size_t size : {std::size_t{1} << (k - 2), std::size_t{1} << (k - 1)}) {
            std::vector<std::uint64_t> subset(size);
            std::iota(subset.begin(), subset.end(), std::uint64_t{3});
            for (auto& x : subset) x %= (std::uint64_t{1} << n);
            std::sort(subset.begin(), subset.end());
            subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
            if (subset.size() != size) continue;
            EXPECT_GE(vv_isolation_rate(subset, n, k, 10000, static_cast<std::uint64_t>(k)), 0.23)
                << "k " << k << " |A| " << size;
        }
    }
}

// ---------------------------------------------------------------- juggle

TEST(Dqp, JuggleCircuitShape) {
    CircuitSequence one = juggle_circuit(1, 1, 3);
    ASSERT_EQ(one.steps.size(), 3u);
    EXPECT_TRUE(one.steps[0].gates.empty());
    EXPECT_EQ(juggle_circuit(4, 32, 3).steps.size(), 96u);
    EXPECT_EQ(default_attempts(4), 32u);
    CircuitSequence two = juggle_circuit(2, 5, 4);
    for (std::size_t a = 0; a < 5; ++a) {
        CMatrix prod = CMatrix::Identity(4, 4);
        for (std::size_t s = 0; s < 3; ++s) prod = compile_step(two.steps[3 * a + s], 2) * prod;
        EXPECT_LE((prod - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Dqp, JuggleRestoresStateBetweenAttempts) {
    CircuitSequence c = pair_state_circuit(3, 2, 7);
    CVector before = final_amplitudes(c);
    Rng rng = derive_rng(5);
    for (auto& s : juggle_steps({0, 1, 2}, 4, rng)) c.steps.push_back(s);
    EXPECT_LE((final_amplitudes(c) - before).norm(), 1e-10);
}

TEST(Dqp, PairStatePreparation) {
    for (bool minus : {false, true}) {
        CVector psi = final_amplitudes(pair_state_circuit(3, 1, 6, minus));
        EXPECT_NEAR(std::abs(psi(1)), kInvSqrt2, 1e-12);
        EXPECT_NEAR(std::abs(psi(6)), kInvSqrt2, 1e-12);
        EXPECT_NEAR(std::real(psi(1) * std::conj(psi(6))), minus ? -0.5 : 0.5, 1e-12);
    }
}

TEST(Dqp, SingleAttemptIsIndependentOfStart) {
    for (TheoryId id : kIndifferent) {
        for (int l = 1; l <= 3; ++l) {
            const BasisIndex top = (BasisIndex{1} << l) - 1;
            for (int i = 0; i < l; ++i) {
                BasisIndex a = 0, b = qubit_mask(i, l) | (top & 1 & (i != l - 1 ? 1 : 0));
                CircuitSequence c = pair_state_circuit(l, a, b);
                const std::size_t prep = c.steps.size();
                c.steps.push_back(UnitaryStep::from_gates(hadamards_except(l, i)));
                c.steps.push_back(UnitaryStep::from_gates({Gate::hadamard(i)}));
                c.steps.push_back(UnitaryStep::from_gates(hadamards_except(l, -1)));
                auto d = chain(c, id);
                // law of v_prep then three steps
                RMatrix s = d.stochastic_matrix(prep + 3) * d.stochastic_matrix(prep + 2) * d.stochastic_matrix(prep + 1);
                RVector p0 = d.born(prep);
                double same = 0.0;
                for (BasisIndex v : {a, b})
                    same += p0(static_cast<Eigen::Index>(v)) * s(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v));
                EXPECT_NEAR(same, 0.5, 1e-9) << to_string(id) << " l " << l << " i " << i;
            }
        }
    }
}

TEST(Dqp, JuggleRecoversBothStates) {
    for (TheoryId id : {TheoryId::Flow, TheoryId::Schrodinger}) {
        for (bool minus : {false, true}) {
            std::size_t failures = 0;
            const std::size_t runs = 200;
            for (std::size_t r = 0; r < runs; ++r) {
                Rng rng = derive_rng(r, 31);
                BasisIndex a = uniform_below(rng, 16), b = a;
                while (b == a) b = uniform_below(rng, 16);
                JuggleOutcome o = run_juggle(pair_state_circuit(4, a, b, minus), id, r);
                EXPECT_LE(o.recovered.size(), 2u);
                EXPECT_EQ(o.attempts, 32u);
                if (!o.success) ++failures;
                else EXPECT_EQ(o.recovered, (std::vector<BasisIndex>{std::min(a, b), std::max(a, b)}));
            }
            EXPECT_LE(static_cast<double>(failures) / runs, 0.035) << to_string(id) << " minus " << minus;
        }
    }
}

TEST(Dqp, JuggleRejectsBadSupport) {
    CircuitSequence c{2, {UnitaryStep::from_gates({Gate::hadamard(0), Gate::hadamard(1)})}};
    try {
        run_juggle(c, TheoryId::Flow, 1);
        FAIL() << "expected BadSupport";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BadSupport);
    }
}

// ---------------------------------------------------------------- statistical difference

TEST(Dqp, SzkCircuitUncomputesToZero) {
    Rng rng = derive_rng(6);
    SzkOptions opts;
    opts.calls = 2;
    SzkCircuit c = szk_circuit(permutation_table(2, 0, 2), permutation_table(2, 0, 2), rng, opts);
    EXPECT_EQ(c.layout.qubits(), 1 + 2 + 2 + 3);
    EXPECT_EQ(c.calls.size(), 2u);
    for (const auto& call : c.calls) {
        EXPECT_GE(call.k, 2);
        EXPECT_LE(call.k, 3);
    }
    CVector psi = final_amplitudes(c.circuit);
    EXPECT_NEAR(std::abs(psi(0)), 1.0, 1e-10);
}

TEST(Dqp, IdenticalPermutationsAreClose) {
    TruthTable p = permutation_table(3, 0, 3);
    for (TheoryId id : {TheoryId::Flow, TheoryId::Schrodinger})
        EXPECT_GE(verdict_accuracy(p, p, id, Verdict::Close, 50, 41), 2.0 / 3) << to_string(id);
}

TEST(Dqp, DisjointPermutationsAreFar) {
    TruthTable p0 = permutation_table(3, 0, 4), p1 = permutation_table(3, 8, 4);
    for (TheoryId id : {TheoryId::Flow, TheoryId::Schrodinger})
        EXPECT_GE(verdict_accuracy(p0, p1, id, Verdict::Far, 50, 42), 2.0 / 3) << to_string(id);
}

TEST(Dqp, GraphSamplerEncoding) {
    EXPECT_EQ(graph_sampler(4).table, (std::vector<std::uint64_t>{4, 2, 4, 1, 2, 1, 4, 4}));
    EXPECT_EQ(graph_sampler(1).table, (std::vector<std::uint64_t>{1, 1, 2, 2, 4, 4, 1, 2}));
    EXPECT_EQ(graph_sampler(6).table, (std::vector<std::uint64_t>{6, 6, 5, 5, 3, 3, 6, 5}));
    EXPECT_NEAR(variation_distance(graph_sampler(4), graph_sampler(1)), 0.25, 1e-15);
    EXPECT_NEAR(variation_distance(graph_sampler(4), graph_sampler(6)), 1.0, 1e-15);
}

TEST(Dqp, IsomorphicGraphsAreClose) {
    TruthTable g0 = graph_sampler(4), g1 = graph_sampler(1);
    EXPECT_EQ(statistical_difference(g0, g1, TheoryId::Flow, 1, 1).distance, 0.25);
    EXPECT_GE(verdict_accuracy(g0, g1, TheoryId::Flow, Verdict::Close, 50, 43), 2.0 / 3);
}

// ---------------------------------------------------------------- search

TEST(Dqp, GroverPreparation) {
    TruthTable f3 = point_table(3, 5);
    CVector psi = final_amplitudes(grover_prepare(3, f3, 0));
    EXPECT_NEAR(std::abs(psi(5)), std::pow(2.0, -1.5), 1e-12);
    CircuitSequence two = grover_prepare(2, point_table(2, 2), 1);
    EXPECT_EQ(two.query_count(), 1u);
    EXPECT_NEAR(std::norm(final_amplitudes(two)(2)), 1.0, 1e-12);
    EXPECT_EQ(grover_prepare(3, f3, 4).query_count(), 4u);
}

TEST(Dqp, SearchTargetState) {
    auto [alpha, beta] = search_target_amplitudes(3);
    EXPECT_NEAR(alpha, 0.5, 1e-15);
    EXPECT_NEAR(beta, 0.25, 1e-15);
    EXPECT_NEAR(std::pow(alpha + beta, 2) + 7 * beta * beta, 1.0, 1e-15);
    EXPECT_EQ(grover_iterations(3), 1u);
    EXPECT_EQ(grover_iterations(6), 2u);
}

TEST(Dqp, SearchRejectsBadTables) {
    try {
        grover_prepare(3, TruthTable(3, 1, {0, 1, 1, 0, 0, 0, 0, 0}), 1);
        FAIL() << "expected NotUniqueMarked";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotUniqueMarked);
    }
    EXPECT_THROW(search(4, point_table(4, 1), TheoryId::Flow, 1), Error);
}

TEST(Dqp, SearchQueryAccounting) {
    TruthTable f = point_table(6, 37);
    Rng rng = derive_rng(7);
    SearchCircuit sc = search_circuit(6, f, rng);
    EXPECT_EQ(sc.circuit.query_count(), sc.grover_queries);
    EXPECT_EQ(sc.layout.qubits(), 10);
    EXPECT_EQ(sc.shifts.size(), 4u * 4u * 6u);
    SearchResult r = search(6, f, TheoryId::Flow, 7);
    EXPECT_EQ(r.queries, r.grover_queries + r.probes);
    EXPECT_LE(r.probes, 4u);
    if (r.found) EXPECT_EQ(r.item, 37u);
}

TEST(Dqp, SearchSmallInstance) {
    // Eight items under the flow theory: success in at least two thirds of
    // 100 seeded runs with at most 40 queries each.
    std::size_t found = 0, worst = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        Rng rng = derive_rng(7, r);
        const std::uint64_t x = uniform_below(rng, 8);
        SearchResult res = search(3, point_table(3, x), TheoryId::Flow, rng());
        found += res.found;
        worst = std::max(worst, res.queries);
    }
    EXPECT_LE(worst, 40u);
    EXPECT_GE(static_cast<double>(found) / 100.0, 2.0 / 3) << found << " of 100";
}
