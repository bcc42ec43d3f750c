#pragma once

#include <functional>

#include "hvsim/core.hpp"

namespace hvsim {

/// Alternating column/row rescaling of a nonnegative base matrix toward
/// prescribed marginals. Layout (row j, column i) as everywhere else.
struct ScalingProblem {
    RMatrix base;         // |U_ji|
    RVector col_targets;  // initial Born probabilities
    RVector row_targets;  // final Born probabilities
};

ScalingProblem make_scaling_problem(const DensityOperator& rho, const CMatrix& u);
ScalingProblem make_scaling_problem(const RVector& initial, const RVector& final_probs, const CMatrix& u);

struct ScalingOptions {
    /// Stop once every line sum is within tol times the total target mass.
    double tol = 1e-10;
    std::size_t max_iter = 100000;
};

struct ScalingResult {
    RMatrix p;
    RVector col_multipliers;  // normalized so the largest is 1
    RVector row_multipliers;
    std::size_t iterations = 0;
    double residual = 0.0;  // max |line sum - target|
};

/// Sees the matrix before the first pass (count 0) and after every half
/// pass (odd counts after column passes, even after row passes).
using ScalingObserver = std::function<void(std::size_t half_steps, const RMatrix& m)>;

/// Throws ZeroLine when a line with positive target has no usable entry and
/// NotConverged when max_iter full iterations do not reach the tolerance.
ScalingResult sinkhorn(const ScalingProblem& problem, const ScalingOptions& options = {},
                       const ScalingObserver& observer = {});

/// prod over entries of m^flow with 0^0 = 1. Throws UnsupportedFlow when the
/// flow is positive where m vanishes.
double progress_measure(const RMatrix& m, const RMatrix& flow);

}  // namespace hvsim
