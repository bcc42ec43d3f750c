#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hvsim/core.hpp"

namespace hvsim::testing {

/// Random (rho, U) with dimension drawn from {2, 4, 8, 16} and a mix of
/// pure and mixed states.
struct Instance {
    DensityOperator rho;
    CMatrix u;
};

inline Instance random_instance(std::uint64_t seed, std::vector<std::size_t> dims = {2, 4, 8, 16}) {
    Rng rng = derive_rng(seed, 0x1f);
    std::size_t dim = dims[uniform_below(rng, dims.size())];
    CMatrix u = random_unitary(dim, rng);
    if (uniform_below(rng, 2) == 0)
        return {DensityOperator::from_pure(random_pure_state(dim, rng)), u};
    return {random_density(dim, rng), u};
}

/// Block-diagonal unitary: random Haar blocks on a random partition of 0..dim-1.
inline CMatrix random_block_unitary(std::size_t dim, Rng& rng, std::vector<std::vector<std::size_t>>& blocks) {
    std::vector<std::size_t> order(dim);
    for (std::size_t i = 0; i < dim; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    blocks.clear();
    std::size_t pos = 0;
    while (pos < dim) {
        std::size_t len = 1 + uniform_below(rng, std::min<std::size_t>(dim - pos, 3));
        blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                            order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    CMatrix u = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& b : blocks) {
        CMatrix local = random_unitary(b.size(), rng);
        for (std::size_t r = 0; r < b.size(); ++r)
            for (std::size_t c = 0; c < b.size(); ++c)
                u(static_cast<Eigen::Index>(b[r]), static_cast<Eigen::Index>(b[c])) =
                    local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return u;
}

inline Gate random_gate(int l, Rng& rng) {
    auto q = [&] { return static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(l))); };
    switch (uniform_below(rng, l >= 3 ? 6 : (l == 2 ? 5 : 3))) {
        case 0: return Gate::hadamard(q());
        case 1: return Gate::rotation(q(), uniform01(rng) * 6.28);
        case 2: return Gate::x(q());
        case 3: {
            int a = q(), b = (a + 1) % l;
            return Gate::cnot(a, b);
        }
        case 4: {
            int a = q(), b = (a + 1) % l;
            std::vector<std::uint64_t> t{0, 1};
            return Gate::oracle(t, {a}, {b});
        }
        default: {
            int a = q();
            return Gate::toffoli(a, (a + 1) % l, (a + 2) % l);
        }
    }
}

/// Circuit of `steps` steps, each one to three random gates.
inline CircuitSequence random_circuit(int l, std::size_t steps, Rng& rng) {
    CircuitSequence c{l, {}};
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<Gate> gates;
        std::size_t count = 1 + uniform_below(rng, 3);
        for (std::size_t g = 0; g < count; ++g) gates.push_back(random_gate(l, rng));
        c.steps.push_back(UnitaryStep::from_gates(std::move(gates)));
    }
    return c;
}

inline double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double total_variation(const RVector& a, const RVector& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

}  // namespace hvsim::testing
