#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hvsim/error.hpp"
#include "hvsim/rng.hpp"

namespace hvsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using BasisIndex = std::uint64_t;

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

inline constexpr double kNormTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-9;
inline constexpr double kHermTol = 1e-9;
/// Gate-compiled steps have exact zeros; raw matrices get a guard.
inline constexpr double kGateBlockTol = 0.0;
inline constexpr double kRawBlockTol = 1e-12;

// All N x N real and complex matrices in this library are indexed
// (final, initial): entry (j, i) concerns the transition from basis state i
// to basis state j. Columns belong to initial states, rows to final states.
// Basis indices are big-endian: qubit 0 is the most significant bit.

inline constexpr BasisIndex qubit_mask(int qubit, int num_qubits) {
    return BasisIndex{1} << (num_qubits - 1 - qubit);
}

/// Reads the listed qubits of `index` as a register value, first qubit most significant.
BasisIndex extract_register(BasisIndex index, std::span<const int> qubits, int num_qubits);
/// Overwrites the listed qubits of `index` with `value`.
BasisIndex deposit_register(BasisIndex index, std::span<const int> qubits, int num_qubits,
                            BasisIndex value);

class PureState {
public:
    explicit PureState(CVector amplitudes);
    static PureState basis(std::size_t dim, std::size_t index);

    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    const CVector& amplitudes() const { return amplitudes_; }

private:
    CVector amplitudes_;
};

class DensityOperator {
public:
    explicit DensityOperator(CMatrix matrix);
    static DensityOperator from_pure(const PureState& psi);
    static DensityOperator maximally_mixed(std::size_t dim);
    static DensityOperator diagonal(const RVector& probabilities);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const CMatrix& matrix() const { return matrix_; }

private:
    CMatrix matrix_;
};

enum class GateKind { Hadamard, Rotation, Not, PhaseFlip, Oracle };

/// One gate of the fixed vocabulary. Registers listed in `inputs` and
/// `targets` are read first-qubit-most-significant.
struct Gate {
    GateKind kind = GateKind::Hadamard;
    std::vector<int> controls;  // Not: none (X), one (CNOT) or two (Toffoli)
    std::vector<int> inputs;    // PhaseFlip: predicate qubits; Oracle: argument register
    std::vector<int> targets;   // H / R / Not: one qubit; Oracle: answer register
    double angle = 0.0;
    /// PhaseFlip: 0/1 predicate per input value. Oracle: output value per input.
    std::vector<std::uint64_t> table;
    /// Counted in the step's query_count.
    bool query = false;

    static Gate hadamard(int qubit);
    /// [[cos, -sin], [sin, cos]] on one qubit.
    static Gate rotation(int qubit, double theta);
    static Gate x(int qubit);
    static Gate cnot(int control, int target);
    static Gate toffoli(int control1, int control2, int target);
    /// Multiplies by -1 every basis state whose `qubits` value satisfies the predicate.
    static Gate phase_flip(std::vector<int> qubits, std::vector<std::uint64_t> predicate,
                           bool query = false);
    /// |y, z> -> |y, z xor f(y)>.
    static Gate oracle(std::vector<std::uint64_t> table, std::vector<int> inputs,
                       std::vector<int> answer, bool query = true);

    std::vector<int> qubits() const;
    Gate adjoint() const;
    /// Maps each basis state to a single basis state (up to phase).
    bool is_monomial() const { return kind != GateKind::Hadamard && kind != GateKind::Rotation; }
};

struct UnitaryStep {
    std::vector<Gate> gates;
    std::optional<CMatrix> matrix;

    static UnitaryStep from_gates(std::vector<Gate> gates) { return UnitaryStep{std::move(gates), {}}; }
    static UnitaryStep from_matrix(CMatrix m) { return UnitaryStep{{}, std::move(m)}; }

    bool is_matrix() const { return matrix.has_value(); }
    std::size_t query_count() const;
    UnitaryStep adjoint() const;
    double block_tol() const { return is_matrix() ? kRawBlockTol : kGateBlockTol; }
};

struct CircuitSequence {
    int qubits = 0;
    std::vector<UnitaryStep> steps;

    std::size_t dim() const { return std::size_t{1} << qubits; }
    std::size_t query_count() const;
    /// Throws BadGate / DimMismatch / NonUnitary for malformed steps.
    void validate() const;
    void append(const CircuitSequence& other);
};

struct BlockPartition {
    std::vector<std::vector<std::size_t>> blocks;

    std::size_t size() const { return blocks.size(); }
    /// Block number of every basis index.
    std::vector<std::size_t> labels(std::size_t dim) const;
};

/// Checks qubit ranges, table sizes and distinctness of the gate's qubits.
void validate_gate(const Gate& gate, int num_qubits);
void validate_step(const UnitaryStep& step, int num_qubits);

CMatrix compile_step(const UnitaryStep& step, int num_qubits);
/// Matrix of a gate list acting on `num_qubits` qubits (no validation).
CMatrix compile_gates(std::span<const Gate> gates, int num_qubits);

PureState apply(const CMatrix& u, const PureState& psi);
RVector born(const PureState& psi);
RVector born(const DensityOperator& rho);
/// Diagonal of U rho U^dagger, clamped at zero.
RVector final_probabilities(const DensityOperator& rho, const CMatrix& u);

/// Connected components of the graph joining i and j when |U_ij| or |U_ji| exceeds tol.
BlockPartition detect_blocks(const CMatrix& u, double tol);
BlockPartition detect_blocks(const RMatrix& magnitudes, double tol);

/// max |(U^dagger U - I)_ij|.
double unitarity_defect(const CMatrix& u);
void require_unitary(const CMatrix& u, double tol = kUnitaryTol);

CMatrix hadamard_matrix();
CMatrix rotation_matrix(double theta);
/// cos(theta)|0> + sin(theta)|1>.
PureState phi_state(double theta);
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Haar-random unitary (QR of a complex Gaussian matrix with phase fix).
CMatrix random_unitary(std::size_t dim, Rng& rng);
PureState random_pure_state(std::size_t dim, Rng& rng);
/// Random full-rank mixed state W W^dagger / tr.
DensityOperator random_density(std::size_t dim, Rng& rng);
/// Closest unitary in Frobenius norm (polar factor).
CMatrix nearest_unitary(const CMatrix& m);
/// Closest state after Hermitian symmetrization, eigenvalue clipping and trace renormalization.
DensityOperator nearest_density(const CMatrix& m);

}  // namespace hvsim
