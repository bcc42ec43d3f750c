#include <gtest/gtest.h>

#include "hvsim/flow.hpp"
#include "hvsim/scaling.hpp"
#include "support.hpp"

using namespace hvsim;
using hvsim::testing::random_instance;

namespace {

ScalingProblem uniform_rotation_problem() {
    RVector half = RVector::Constant(2, 0.5);
    return make_scaling_problem(half, half, rotation_matrix(std::numbers::pi / 8));
}

}  // namespace

TEST(Scaling, IdentityNeedsOnePass) {
    RVector p(2);
    p << 0.3, 0.7;
    ScalingResult r = sinkhorn(make_scaling_problem(p, p, CMatrix::Identity(2, 2)));
    EXPECT_LE((r.p - RMatrix(p.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(r.iterations, 1u);
}

TEST(Scaling, EighthRotationFixedPoint) {
    ScalingOptions opts;
    opts.tol = 1e-12;
    ScalingResult r = sinkhorn(uniform_rotation_problem(), opts);
    const double diag = 1.0 / (2.0 * std::sqrt(2.0));
    EXPECT_NEAR(r.p(0, 0), diag, 1e-9);
    EXPECT_NEAR(r.p(1, 1), diag, 1e-9);
    EXPECT_NEAR(r.p(0, 1), 0.5 - diag, 1e-9);
    EXPECT_NEAR(r.p(1, 0), 0.5 - diag, 1e-9);
    // symmetric fixed point d^2 (cos + sin) = 1/2 with d the common multiplier
    const double c = std::cos(std::numbers::pi / 8), s = std::sin(std::numbers::pi / 8);
    const double d = std::sqrt(0.5 / (c + s));
    EXPECT_NEAR(r.p(0, 0), d * d * c, 1e-9);
}

TEST(Scaling, MultipliersReproduceP) {
    ScalingResult r = sinkhorn(uniform_rotation_problem());
    RMatrix base = rotation_matrix(std::numbers::pi / 8).cwiseAbs();
    EXPECT_NEAR(r.col_multipliers.maxCoeff(), 1.0, 1e-15);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
            EXPECT_NEAR(r.p(j, i), r.col_multipliers(i) * r.row_multipliers(j) * base(j, i), 1e-9);
}

TEST(Scaling, ZeroEntriesStayZero) {
    RMatrix base(2, 2);
    base << 1.0, 0.0, 0.5, 1.0;
    RVector col(2), row(2);
    col << 0.6, 0.4;
    row << 0.4, 0.6;
    ScalingResult r = sinkhorn(ScalingProblem{base, col, row});
    EXPECT_EQ(r.p(0, 1), 0.0);
}

TEST(Scaling, ZeroLineAndNonConvergence) {
    RMatrix base(2, 2);
    base << 1.0, 1.0, 0.0, 0.0;
    RVector half = RVector::Constant(2, 0.5);
    try {
        sinkhorn(ScalingProblem{base, half, half});
        FAIL() << "expected ZeroLine";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroLine);
    }
    ScalingOptions tight;
    tight.max_iter = 1;
    tight.tol = 1e-15;
    try {
        auto inst = hvsim::testing::random_instance(4, {8});
        sinkhorn(make_scaling_problem(inst.rho, inst.u), tight);
        FAIL() << "expected NotConverged";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotConverged);
    }
}

TEST(Scaling, ProgressMeasureExamples) {
    RMatrix m = RMatrix::Zero(3, 3);
    m(0, 0) = m(1, 1) = 0.5;
    RMatrix f = RMatrix::Zero(3, 3);
    f(0, 0) = f(1, 1) = 0.5;
    EXPECT_NEAR(progress_measure(m, f), 0.5, 1e-15);
    EXPECT_EQ(progress_measure(m, RMatrix::Zero(3, 3)), 1.0);
    f(2, 0) = 0.1;
    EXPECT_THROW(progress_measure(m, f), Error);
}

TEST(ScalingProperty, ConvergesOnRandomInstances) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto inst = random_instance(seed);
        ScalingProblem prob = make_scaling_problem(inst.rho, inst.u);
        ScalingResult r = sinkhorn(prob);
        EXPECT_LE(r.residual, 1e-10) << "seed " << seed;
        EXPECT_LE((r.p.colwise().sum().transpose() - prob.col_targets).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((r.p.rowwise().sum() - prob.row_targets).cwiseAbs().maxCoeff(), 1e-10);
        for (Eigen::Index k = 0; k < r.p.size(); ++k)
            if (prob.base.data()[k] == 0.0) EXPECT_EQ(r.p.data()[k], 0.0);
    }
}

TEST(ScalingProperty, ProgressIsMonotone) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto inst = random_instance(seed, {4});
        ScalingProblem prob = make_scaling_problem(inst.rho, inst.u);
        RMatrix witness = max_flow(build_network(inst.rho, inst.u)).flow;
        double last = 0.0;
        bool first = true;
        // from the first column pass on, every iterate carries unit mass
        sinkhorn(prob, {}, [&](std::size_t half, const RMatrix& m) {
            if (half == 0) return;
            const double z = progress_measure(m, witness);
            if (!first) EXPECT_GE(z, last - 1e-12) << "seed " << seed;
            last = z;
            first = false;
        });
    }
}

TEST(ScalingProperty, ConvergedResultIsFixedPoint) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto inst = random_instance(seed);
        ScalingProblem prob = make_scaling_problem(inst.rho, inst.u);
        ScalingResult r = sinkhorn(prob);
        ScalingResult again = sinkhorn(ScalingProblem{r.p, prob.col_targets, prob.row_targets});
        EXPECT_LE((again.p - r.p).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed;
    }
}
