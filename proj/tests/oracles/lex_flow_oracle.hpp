#pragma once

// Lexicographically maximal feasible flow by exhaustive vertex enumeration.
// Only meant for N <= 3 (3^9 bound patterns).

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hvsim::oracle {

/// Arcs (j, i) with 0 <= f <= cap(j, i), column sums = src, row sums = snk.
/// Returns the lexicographically largest vertex in order (0,0), (1,0), ...,
/// inputs outermost; nullopt when infeasible.
inline std::optional<Eigen::MatrixXd> lex_max_transport(const Eigen::VectorXd& src, const Eigen::VectorXd& snk,
                                                        const Eigen::MatrixXd& cap, double tol = 1e-9) {
    const int n = static_cast<int>(src.size());
    const int vars = n * n;
    auto var = [n](int j, int i) { return i * n + j; };
    // equality rows: n column sums, n row sums
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, vars);
    Eigen::VectorXd rhs(2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, var(j, i)) = 1.0;
            a(n + j, var(j, i)) = 1.0;
        }
        rhs(i) = src(i);
        rhs(n + i) = snk(i);
    }

    std::optional<Eigen::VectorXd> best;
    auto better = [&](const Eigen::VectorXd& x) {
        if (!best) return true;
        for (int k = 0; k < vars; ++k) {
            if (x(k) > (*best)(k) + tol) return true;
            if (x(k) < (*best)(k) - tol) return false;
        }
        return false;
    };

    std::vector<int> state(static_cast<std::size_t>(vars), 0);  // 0 lower, 1 upper, 2 free
    long total = 1;
    for (int k = 0; k < vars; ++k) total *= 3;
    for (long code = 0; code < total; ++code) {
        long c = code;
        std::vector<int> free;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(vars);
        for (int k = 0; k < vars; ++k) {
            state[static_cast<std::size_t>(k)] = static_cast<int>(c % 3);
            c /= 3;
            int j = k % n, i = k / n;
            if (state[static_cast<std::size_t>(k)] == 1) x(k) = cap(j, i);
            if (state[static_cast<std::size_t>(k)] == 2) free.push_back(k);
        }
        if (static_cast<int>(free.size()) > 2 * n - 1) continue;
        Eigen::VectorXd r = rhs - a * x;
        if (!free.empty()) {
            Eigen::MatrixXd sub(2 * n, static_cast<int>(free.size()));
            for (std::size_t f = 0; f < free.size(); ++f) sub.col(static_cast<int>(f)) = a.col(free[f]);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
            if (qr.rank() != static_cast<int>(free.size())) continue;
            Eigen::VectorXd y = qr.solve(r);
            for (std::size_t f = 0; f < free.size(); ++f) x(free[f]) = y(static_cast<int>(f));
        }
        if ((a * x - rhs).cwiseAbs().maxCoeff() > tol) continue;
        bool ok = true;
        for (int k = 0; k < vars && ok; ++k) {
            int j = k % n, i = k / n;
            ok = x(k) >= -tol && x(k) <= cap(j, i) + tol;
        }
        if (ok && better(x)) best = x;
    }
    if (!best) return std::nullopt;
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(j, i) = (*best)(var(j, i));
    return out;
}

}  // namespace hvsim::oracle
