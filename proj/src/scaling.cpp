#include "hvsim/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hvsim {

ScalingProblem make_scaling_problem(const RVector& initial, const RVector& final_probs, const CMatrix& u) {
    if (u.rows() != u.cols() || initial.size() != u.cols() || final_probs.size() != u.rows()) {
        throw Error(ErrorKind::DimMismatch, "marginals and matrix dimensions differ");
    }
    return ScalingProblem{u.cwiseAbs(), initial.cwiseMax(0.0), final_probs.cwiseMax(0.0)};
}

ScalingProblem make_scaling_problem(const DensityOperator& rho, const CMatrix& u) {
    return make_scaling_problem(born(rho), final_probabilities(rho, u), u);
}

namespace {

double line_residual(const RMatrix& p, const ScalingProblem& prob) {
    const RVector cols = p.colwise().sum().transpose();
    const RVector rows = p.rowwise().sum();
    return std::max((cols - prob.col_targets).cwiseAbs().maxCoeff(),
                    (rows - prob.row_targets).cwiseAbs().maxCoeff());
}

}  // namespace

ScalingResult sinkhorn(const ScalingProblem& prob, const ScalingOptions& options,
                       const ScalingObserver& observer) {
    const Eigen::Index n_rows = prob.base.rows(), n_cols = prob.base.cols();
    if (prob.col_targets.size() != n_cols || prob.row_targets.size() != n_rows) {
        throw Error(ErrorKind::DimMismatch, "targets do not match the base matrix");
    }
    if ((prob.base.array() < 0).any() || (prob.col_targets.array() < 0).any() ||
        (prob.row_targets.array() < 0).any()) {
        throw Error(ErrorKind::InvalidArgument, "scaling inputs must be nonnegative");
    }

    std::vector<Eigen::Index> cols, rows;
    for (Eigen::Index c = 0; c < n_cols; ++c) {
        if (prob.col_targets(c) > 0) cols.push_back(c);
    }
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        if (prob.row_targets(r) > 0) rows.push_back(r);
    }

    RMatrix p = RMatrix::Zero(n_rows, n_cols);
    for (auto c : cols) {
        for (auto r : rows) p(r, c) = prob.base(r, c);
    }
    for (auto c : cols) {
        if (!(p.col(c).sum() > 0)) {
            throw Error(ErrorKind::ZeroLine, "column " + std::to_string(c) + " has no entry to scale");
        }
    }
    for (auto r : rows) {
        if (!(p.row(r).sum() > 0)) {
            throw Error(ErrorKind::ZeroLine, "row " + std::to_string(r) + " has no entry to scale");
        }
    }

    const double mass = std::max(prob.col_targets.sum(), prob.row_targets.sum());
    const double stop = options.tol * std::min(mass, 1.0);
    RVector log_alpha = RVector::Zero(n_cols), log_beta = RVector::Zero(n_rows);

    std::size_t half = 0;
    if (observer) observer(half, p);
    ScalingResult out;
    double residual = line_residual(p, prob);
    std::size_t it = 0;
    while (residual > stop) {
        if (it == options.max_iter) {
            throw Error(ErrorKind::NotConverged, "residual " + std::to_string(residual) + " after " +
                                                     std::to_string(it) + " iterations");
        }
        for (auto c : cols) {
            double s = 0.0;
            for (auto r : rows) s += p(r, c);
            const double f = prob.col_targets(c) / s;
            for (auto r : rows) p(r, c) *= f;
            log_alpha(c) += std::log(f);
        }
        if (observer) observer(++half, p);
        for (auto r : rows) {
            double s = 0.0;
            for (auto c : cols) s += p(r, c);
            const double f = prob.row_targets(r) / s;
            for (auto c : cols) p(r, c) *= f;
            log_beta(r) += std::log(f);
        }
        if (observer) observer(++half, p);
        ++it;
        residual = line_residual(p, prob);
    }

    out.p = std::move(p);
    out.iterations = it;
    out.residual = residual;
    double top = -std::numeric_limits<double>::infinity();
    for (auto c : cols) top = std::max(top, log_alpha(c));
    out.col_multipliers = RVector::Zero(n_cols);
    out.row_multipliers = RVector::Zero(n_rows);
    for (auto c : cols) out.col_multipliers(c) = std::exp(log_alpha(c) - top);
    if (!cols.empty()) {
        for (auto r : rows) out.row_multipliers(r) = std::exp(log_beta(r) + top);
    }
    return out;
}

double progress_measure(const RMatrix& m, const RMatrix& flow) {
    if (m.rows() != flow.rows() || m.cols() != flow.cols()) {
        throw Error(ErrorKind::DimMismatch, "matrix and flow shapes differ");
    }
    double log_z = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const double f = flow(r, c);
            if (!(f > 0)) continue;
            if (!(m(r, c) > 0)) {
                throw Error(ErrorKind::UnsupportedFlow, "flow is positive where the matrix vanishes");
            }
            log_z += f * std::log(m(r, c));
        }
    }
    return std::exp(log_z);
}

}  // namespace hvsim
