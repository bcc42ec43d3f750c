#include <gtest/gtest.h>

#include <set>

#include "hvsim/core.hpp"
#include "support.hpp"

using namespace hvsim;

namespace {

CMatrix identity(std::size_t n) { return CMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)); }

bool block_condition(const CMatrix& u, const std::vector<std::size_t>& block) {
    std::set<std::size_t> in(block.begin(), block.end());
    for (Eigen::Index j = 0; j < u.rows(); ++j)
        for (Eigen::Index i = 0; i < u.cols(); ++i)
            if (in.count(static_cast<std::size_t>(i)) != in.count(static_cast<std::size_t>(j)) &&
                std::abs(u(j, i)) > 0.0)
                return false;
    return true;
}

}  // namespace

TEST(Core, EmptyStepIsIdentity) {
    EXPECT_TRUE(compile_step(UnitaryStep::from_gates({}), 2).isApprox(identity(4), 0.0));
}

TEST(Core, HadamardMatrix) {
    CMatrix h = compile_step(UnitaryStep::from_gates({Gate::hadamard(0)}), 1);
    CMatrix want(2, 2);
    want << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
    EXPECT_LE((h - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Core, OracleSwapsWhenFIsOne) {
    CMatrix u = compile_step(UnitaryStep::from_gates({Gate::oracle({0, 1}, {0}, {1})}), 2);
    CMatrix want = CMatrix::Zero(4, 4);
    want(0, 0) = want(1, 1) = 1;
    want(3, 2) = want(2, 3) = 1;
    EXPECT_TRUE(u.isApprox(want, 0.0));
}

TEST(Core, BigEndianQubitOrder) {
    CMatrix x0 = compile_step(UnitaryStep::from_gates({Gate::x(0)}), 2);
    EXPECT_EQ(std::abs(x0(2, 0)), 1.0);
    std::vector<int> reg{2, 0};
    EXPECT_EQ(extract_register(0b011, reg, 3), 0b10u);
    EXPECT_EQ(deposit_register(0, reg, 3, 0b01), 0b100u);
}

TEST(Core, RotationTakesPlusToOne) {
    PureState plus(CVector::Constant(2, kInvSqrt2));
    PureState out = hvsim::apply(rotation_matrix(std::numbers::pi / 4), plus);
    EXPECT_NEAR(std::abs(out.amplitudes()(0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.amplitudes()(1)), 1.0, 1e-15);
}

TEST(Core, BellBorn) {
    CVector a = CVector::Zero(4);
    a(0) = a(3) = kInvSqrt2;
    RVector p = born(PureState(a));
    EXPECT_NEAR(p(0), 0.5, 1e-15);
    EXPECT_NEAR(p(1), 0.0, 1e-15);
    EXPECT_NEAR(p(2), 0.0, 1e-15);
    EXPECT_NEAR(p(3), 0.5, 1e-15);
}

TEST(Core, BlocksOfIdentityTensorHadamard) {
    CMatrix u = kron(identity(2), hadamard_matrix());
    auto blocks = detect_blocks(u, 0.0).blocks;
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(blocks[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(blocks[1], (std::vector<std::size_t>{2, 3}));
}

TEST(Core, RejectsBadInput) {
    EXPECT_THROW(PureState(CVector::Constant(2, 1.0)), Error);
    EXPECT_THROW(validate_gate(Gate::hadamard(3), 2), Error);
    EXPECT_THROW(validate_gate(Gate::cnot(1, 1), 2), Error);
    CMatrix bad = CMatrix::Ones(2, 2);
    EXPECT_THROW(require_unitary(bad), Error);
    CircuitSequence c{1, {UnitaryStep::from_matrix(bad)}};
    EXPECT_THROW(c.validate(), Error);
}

TEST(Core, AdjointUndoesStep) {
    Rng rng = derive_rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Gate> gates;
        for (int g = 0; g < 6; ++g) gates.push_back(hvsim::testing::random_gate(3, rng));
        UnitaryStep s = UnitaryStep::from_gates(gates);
        CMatrix prod = compile_step(s.adjoint(), 3) * compile_step(s, 3);
        EXPECT_LE((prod - identity(8)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CoreProperty, CompiledStepsAreUnitary) {
    Rng rng = derive_rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        int l = 1 + static_cast<int>(uniform_below(rng, 6));
        std::vector<Gate> gates;
        std::size_t count = 1 + uniform_below(rng, 12);
        for (std::size_t g = 0; g < count; ++g) gates.push_back(hvsim::testing::random_gate(l, rng));
        CMatrix u = compile_step(UnitaryStep::from_gates(gates), l);
        EXPECT_LE(unitarity_defect(u), kUnitaryTol) << "rep " << rep;
        PureState psi = random_pure_state(u.rows(), rng);
        EXPECT_NEAR(born(hvsim::apply(u, psi)).sum(), 1.0, 10 * kNormTol);
    }
}

TEST(CoreProperty, BlocksArePartitionAndMinimal) {
    Rng rng = derive_rng(12);
    for (int rep = 0; rep < 60; ++rep) {
        std::size_t dim = std::size_t{2} << uniform_below(rng, 3);  // 2, 4, 8
        CMatrix u;
        if (rep % 2 == 0) {
            std::vector<std::vector<std::size_t>> planted;
            u = hvsim::testing::random_block_unitary(dim, rng, planted);
        } else {
            int l = dim == 2 ? 1 : (dim == 4 ? 2 : 3);
            std::vector<Gate> gates;
            for (int g = 0; g < 2; ++g) gates.push_back(hvsim::testing::random_gate(l, rng));
            u = compile_step(UnitaryStep::from_gates(gates), l);
        }
        auto part = detect_blocks(u, kRawBlockTol);
        std::vector<int> seen(dim, 0);
        for (const auto& b : part.blocks) {
            ASSERT_FALSE(b.empty());
            for (auto x : b) ++seen[x];
            EXPECT_TRUE(block_condition(u, b));
        }
        for (auto s : seen) EXPECT_EQ(s, 1);
        for (std::size_t a = 0; a < part.size(); ++a)
            for (std::size_t b = a + 1; b < part.size(); ++b) {
                auto merged = part.blocks[a];
                merged.insert(merged.end(), part.blocks[b].begin(), part.blocks[b].end());
                EXPECT_TRUE(block_condition(u, merged));
            }
        // no proper nonempty subset of a block is itself a block
        for (const auto& b : part.blocks) {
            if (b.size() > 8) continue;
            for (std::uint32_t mask = 1; mask + 1 < (1u << b.size()); ++mask) {
                std::vector<std::size_t> sub;
                for (std::size_t k = 0; k < b.size(); ++k)
                    if (mask >> k & 1u) sub.push_back(b[k]);
                EXPECT_FALSE(block_condition(u, sub));
            }
        }
    }
}

TEST(CoreProperty, NearestProjections) {
    Rng rng = derive_rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        CMatrix u = random_unitary(4, rng);
        EXPECT_LE((nearest_unitary(u) - u).cwiseAbs().maxCoeff(), 1e-12);
        CMatrix noisy = u + CMatrix::Constant(4, 4, Complex(1e-3, 0));
        EXPECT_LE(unitarity_defect(nearest_unitary(noisy)), 1e-12);
        DensityOperator rho = random_density(4, rng);
        EXPECT_LE((nearest_density(rho.matrix()).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
}
