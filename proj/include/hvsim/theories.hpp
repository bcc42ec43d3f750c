#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "hvsim/core.hpp"
#include "hvsim/scaling.hpp"

namespace hvsim {

enum class TheoryId { Product, Dieks, Flow, Schrodinger };

inline constexpr std::array<TheoryId, 4> kAllTheories = {TheoryId::Product, TheoryId::Dieks,
                                                         TheoryId::Flow, TheoryId::Schrodinger};

/// "pt", "dt", "ft", "st".
std::string_view to_string(TheoryId id);
TheoryId parse_theory(std::string_view name);
/// Every theory here except the product theory keeps block-diagonal steps block-diagonal.
inline bool is_indifferent(TheoryId id) { return id != TheoryId::Product; }

inline constexpr double kEpsFloor = 1e-12;

struct TheoryOptions {
    double block_tol = kRawBlockTol;  // Dieks block detection
    ScalingOptions scaling;
};

/// Joint matrix from the Born vectors before and after U. The vectors may
/// carry any common total mass (a block of a larger system).
RMatrix joint_from_marginals(TheoryId id, const RVector& initial, const RVector& final_probs,
                             const CMatrix& u, const TheoryOptions& options = {});

/// (j, i) = probability of starting in i and ending in j.
RMatrix joint(TheoryId id, const DensityOperator& rho, const CMatrix& u,
              const TheoryOptions& options = {});

struct EpsilonSchedule {
    std::vector<double> values{1e-4, 1e-5, 1e-6};
    double instability = 1e-3;
};

/// A column obtained through the vanishing-mixture limit whose last two
/// iterates still differ by more than the instability threshold.
struct LimitFlag {
    std::size_t column = 0;
    double change = 0.0;
    RVector previous;
    RVector last;
};

struct StochasticResult {
    RMatrix s;
    RMatrix p;
    std::vector<std::size_t> limit_columns;  // columns filled via the limit
    std::vector<LimitFlag> flags;
};

/// `mixing_dim` is the dimension of the full system when the marginals
/// describe one block; the mixture adds eps/mixing_dim to every entry.
StochasticResult stochastic_from_marginals(TheoryId id, const RVector& initial, const RVector& final_probs,
                                           const CMatrix& u, const TheoryOptions& options = {},
                                           const EpsilonSchedule& schedule = {},
                                           std::size_t mixing_dim = 0);

StochasticResult stochastic(TheoryId id, const DensityOperator& rho, const CMatrix& u,
                            const TheoryOptions& options = {}, const EpsilonSchedule& schedule = {});

}  // namespace hvsim
