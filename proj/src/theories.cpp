#include "hvsim/theories.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "hvsim/flow.hpp"

namespace hvsim {

std::string_view to_string(TheoryId id) {
    switch (id) {
        case TheoryId::Product: return "pt";
        case TheoryId::Dieks: return "dt";
        case TheoryId::Flow: return "ft";
        case TheoryId::Schrodinger: return "st";
    }
    return "?";
}

TheoryId parse_theory(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto id : kAllTheories) {
        if (lower == to_string(id)) return id;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown theory '" + std::string(name) + "' (pt, dt, ft, st)");
}

namespace {

RMatrix product_joint(const RVector& p, const RVector& q) {
    const double total = q.sum();
    if (!(total > 0)) return RMatrix::Zero(q.size(), p.size());
    return q * p.transpose() / total;
}

RMatrix dieks_joint(const RVector& p, const RVector& q, const CMatrix& u, double tol) {
    RMatrix out = RMatrix::Zero(u.rows(), u.cols());
    for (const auto& block : detect_blocks(u, tol).blocks) {
        double den = 0.0;
        for (auto j : block) den += q(static_cast<Eigen::Index>(j));
        if (!(den > 0)) continue;
        for (auto i : block) {
            for (auto j : block) {
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                    p(static_cast<Eigen::Index>(i)) * q(static_cast<Eigen::Index>(j)) / den;
            }
        }
    }
    return out;
}

// Entries that every marginal-respecting joint matrix must take.
bool forced_joint(TheoryId id, const RVector& p, const RVector& q, const CMatrix& u, RMatrix& out) {
    std::vector<Eigen::Index> cols, rows;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0) cols.push_back(i);
    }
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (q(j) > 0) rows.push_back(j);
    }
    out = RMatrix::Zero(q.size(), p.size());
    if (cols.empty() || rows.empty()) return true;
    if (cols.size() == 1) {
        for (auto j : rows) out(j, cols[0]) = q(j);
        return true;
    }
    if (rows.size() == 1) {
        for (auto i : cols) out(rows[0], i) = p(i);
        return true;
    }
    if (id == TheoryId::Flow || id == TheoryId::Schrodinger) {
        // Support-restricted theories are forced when each column has one usable entry.
        for (auto i : cols) {
            Eigen::Index hit = -1;
            for (auto j : rows) {
                if (u(j, i) != 0.0) {
                    if (hit >= 0) return false;
                    hit = j;
                }
            }
            if (hit < 0) return false;
            out(hit, i) = p(i);
        }
        return true;
    }
    return false;
}

}  // namespace

RMatrix joint_from_marginals(TheoryId id, const RVector& p, const RVector& q, const CMatrix& u,
                             const TheoryOptions& options) {
    if (u.rows() != u.cols() || p.size() != u.cols() || q.size() != u.rows()) {
        throw Error(ErrorKind::DimMismatch, "marginals and matrix dimensions differ");
    }
    if (id == TheoryId::Product) return product_joint(p, q);
    RMatrix forced;
    if (forced_joint(id, p, q, u, forced)) return forced;
    switch (id) {
        case TheoryId::Dieks:
            return dieks_joint(p, q, u, options.block_tol);
        case TheoryId::Flow:
            return lex_max_flow(build_network(p, q, u));
        case TheoryId::Schrodinger:
            return sinkhorn(make_scaling_problem(p, q, u), options.scaling).p;
        case TheoryId::Product:
            break;
    }
    return product_joint(p, q);
}

RMatrix joint(TheoryId id, const DensityOperator& rho, const CMatrix& u, const TheoryOptions& options) {
    require_unitary(u);
    return joint_from_marginals(id, born(rho), final_probabilities(rho, u), u, options);
}

StochasticResult stochastic_from_marginals(TheoryId id, const RVector& p, const RVector& q,
                                           const CMatrix& u, const TheoryOptions& options,
                                           const EpsilonSchedule& schedule, std::size_t mixing_dim) {
    StochasticResult out;
    out.p = joint_from_marginals(id, p, q, u, options);
    const Eigen::Index n = p.size();
    out.s = RMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p(i) > kEpsFloor) {
            out.s.col(i) = out.p.col(i) / p(i);
        } else {
            out.limit_columns.push_back(static_cast<std::size_t>(i));
        }
    }
    if (out.limit_columns.empty()) return out;
    if (schedule.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty epsilon schedule");

    const double dim = static_cast<double>(mixing_dim ? mixing_dim : static_cast<std::size_t>(n));
    RMatrix previous, last;
    for (double eps : schedule.values) {
        const RVector pe = (1.0 - eps) * p.array() + eps / dim;
        const RVector qe = (1.0 - eps) * q.array() + eps / dim;
        const RMatrix pj = joint_from_marginals(id, pe, qe, u, options);
        previous = std::move(last);
        last = RMatrix::Zero(n, n);
        for (auto i : out.limit_columns) {
            const auto c = static_cast<Eigen::Index>(i);
            last.col(c) = pj.col(c) / pe(c);
        }
    }
    for (auto i : out.limit_columns) {
        const auto c = static_cast<Eigen::Index>(i);
        out.s.col(c) = last.col(c);
        if (previous.size() == 0) continue;
        const double change = (last.col(c) - previous.col(c)).cwiseAbs().maxCoeff();
        if (change > schedule.instability) {
            out.flags.push_back({i, change, previous.col(c), last.col(c)});
        }
    }
    return out;
}

StochasticResult stochastic(TheoryId id, const DensityOperator& rho, const CMatrix& u,
                            const TheoryOptions& options, const EpsilonSchedule& schedule) {
    require_unitary(u);
    return stochastic_from_marginals(id, born(rho), final_probabilities(rho, u), u, options, schedule);
}

}  // namespace hvsim
