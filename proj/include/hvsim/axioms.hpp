#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hvsim/core.hpp"
#include "hvsim/io.hpp"
#include "hvsim/theories.hpp"

namespace hvsim {

/// Outcome of one axiom check. The witness holds everything needed to
/// recompute worst_violation with `replay`.
struct AxiomReport {
    std::string axiom;
    TheoryId theory = TheoryId::Flow;
    bool pass = false;
    double worst_violation = 0.0;
    double threshold = 0.0;
    Json witness;

    Json to_json() const;
    static AxiomReport from_json(const Json& j);
};

/// Largest joint probability between states in different blocks of U.
AxiomReport check_indifference(TheoryId theory, const CMatrix& u, const DensityOperator& rho,
                               double tol = 1e-10);

/// Qubits on which U does not act as the identity (N must be a power of 2).
std::vector<int> acted_qubits(const CMatrix& u, double tol = kRawBlockTol);

/// Entrywise difference between the two orders of chained stochastic matrices.
/// Throws NotSpacelike when the two unitaries act on a common qubit.
AxiomReport check_commutativity(TheoryId theory, const DensityOperator& rho, const CMatrix& u_a,
                                const CMatrix& u_b, double tol = 1e-8);

struct NogoResult {
    double p_ab = 0.0;  // U_A applied first
    double p_ba = 0.0;
};

inline constexpr double kNogoLow = 0.0732233047033631;   // sin^2(pi/8) / 2
inline constexpr double kNogoHigh = 0.1767766952966369;  // 1/4 - sin^2(pi/8) / 2

/// Probability that the hidden variable starts at |00> and ends at |10> on
/// the Bell state, with a pi/8 rotation of qubit 0 and a -pi/8 rotation of
/// qubit 1 applied in either order. Throws IndifferenceRequired for PT.
NogoResult nogo_witness(TheoryId theory);
/// Report whose violation is how far the two probabilities miss the bounds.
AxiomReport check_nogo(TheoryId theory, double tol = 1e-9);

using Decomposition = std::vector<std::pair<double, PureState>>;

enum class DecompositionLevel { Stochastic, Joint };

/// ||M(rho, U) - sum_k w_k M(psi_k, U)|| entrywise, with M the stochastic
/// (default) or joint matrix. Throws BadDecomposition if the ensemble does
/// not average to rho.
AxiomReport check_decomposition_invariance(TheoryId theory, const DensityOperator& rho,
                                           const Decomposition& ensemble, const CMatrix& u,
                                           double tol = 1e-9,
                                           DecompositionLevel level = DecompositionLevel::Stochastic);

/// Largest entrywise change in P over random perturbations of size delta.
AxiomReport check_robustness(TheoryId theory, const DensityOperator& rho, const CMatrix& u, double delta,
                             std::size_t trials, std::uint64_t seed, double threshold = 1e-3);

/// Perturbed copies used by check_robustness: every entry moves by at most
/// delta before projecting back to a state and a unitary.
std::pair<DensityOperator, CMatrix> perturb(const DensityOperator& rho, const CMatrix& u, double delta, Rng& rng);

/// Recomputes the violation from the report's witness alone.
double replay(const AxiomReport& report);

}  // namespace hvsim
