#include "hvsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace hvsim {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonUnitary: return "NonUnitary";
        case ErrorKind::BadGate: return "BadGate";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::InvalidState: return "InvalidState";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::ZeroLine: return "ZeroLine";
        case ErrorKind::UnsupportedFlow: return "UnsupportedFlow";
        case ErrorKind::NotSpacelike: return "NotSpacelike";
        case ErrorKind::IndifferenceRequired: return "IndifferenceRequired";
        case ErrorKind::BadDecomposition: return "BadDecomposition";
        case ErrorKind::BadSupport: return "BadSupport";
        case ErrorKind::WidthMismatch: return "WidthMismatch";
        case ErrorKind::NotUniqueMarked: return "NotUniqueMarked";
        case ErrorKind::PromiseUnverifiable: return "PromiseUnverifiable";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

BasisIndex extract_register(BasisIndex index, std::span<const int> qubits, int num_qubits) {
    BasisIndex value = 0;
    for (int q : qubits) value = (value << 1) | ((index >> (num_qubits - 1 - q)) & 1U);
    return value;
}

BasisIndex deposit_register(BasisIndex index, std::span<const int> qubits, int num_qubits,
                            BasisIndex value) {
    const int width = static_cast<int>(qubits.size());
    for (int k = 0; k < width; ++k) {
        const BasisIndex mask = qubit_mask(qubits[k], num_qubits);
        if ((value >> (width - 1 - k)) & 1U) {
            index |= mask;
        } else {
            index &= ~mask;
        }
    }
    return index;
}

// ---------------------------------------------------------------- states

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw Error(ErrorKind::InvalidState, "empty state vector");
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kNormTol) {
        throw Error(ErrorKind::InvalidState,
                    "squared norm " + std::to_string(norm2) + " differs from 1");
    }
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw Error(ErrorKind::DimMismatch, "basis index out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v));
}

DensityOperator::DensityOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
        throw Error(ErrorKind::DimMismatch, "density matrix must be square and nonempty");
    }
    const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermTol) {
        throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian");
    }
    const Complex tr = matrix_.trace();
    if (std::abs(tr - Complex(1.0)) > kNormTol) {
        throw Error(ErrorKind::InvalidState, "density matrix trace " + std::to_string(tr.real()));
    }
    const CMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kHermTol) {
        throw Error(ErrorKind::InvalidState, "density matrix has a negative eigenvalue");
    }
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return DensityOperator(CMatrix::Identity(n, n) / static_cast<double>(dim));
}

DensityOperator DensityOperator::diagonal(const RVector& probabilities) {
    return DensityOperator(probabilities.cast<Complex>().asDiagonal());
}

// ---------------------------------------------------------------- gates

Gate Gate::hadamard(int qubit) {
    Gate g;
    g.kind = GateKind::Hadamard;
    g.targets = {qubit};
    return g;
}

Gate Gate::rotation(int qubit, double theta) {
    Gate g;
    g.kind = GateKind::Rotation;
    g.targets = {qubit};
    g.angle = theta;
    return g;
}

Gate Gate::x(int qubit) {
    Gate g;
    g.kind = GateKind::Not;
    g.targets = {qubit};
    return g;
}

Gate Gate::cnot(int control, int target) {
    Gate g = x(target);
    g.controls = {control};
    return g;
}

Gate Gate::toffoli(int control1, int control2, int target) {
    Gate g = x(target);
    g.controls = {control1, control2};
    return g;
}

Gate Gate::phase_flip(std::vector<int> qubits, std::vector<std::uint64_t> predicate, bool query) {
    Gate g;
    g.kind = GateKind::PhaseFlip;
    g.inputs = std::move(qubits);
    g.table = std::move(predicate);
    g.query = query;
    return g;
}

Gate Gate::oracle(std::vector<std::uint64_t> table, std::vector<int> inputs,
                  std::vector<int> answer, bool query) {
    Gate g;
    g.kind = GateKind::Oracle;
    g.inputs = std::move(inputs);
    g.targets = std::move(answer);
    g.table = std::move(table);
    g.query = query;
    return g;
}

std::vector<int> Gate::qubits() const {
    std::vector<int> out = controls;
    out.insert(out.end(), inputs.begin(), inputs.end());
    out.insert(out.end(), targets.begin(), targets.end());
    return out;
}

Gate Gate::adjoint() const {
    Gate g = *this;
    if (kind == GateKind::Rotation) g.angle = -angle;
    return g;
}

std::size_t UnitaryStep::query_count() const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.query; }));
}

UnitaryStep UnitaryStep::adjoint() const {
    if (matrix) return from_matrix(matrix->adjoint());
    std::vector<Gate> out;
    out.reserve(gates.size());
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) out.push_back(it->adjoint());
    return from_gates(std::move(out));
}

std::size_t CircuitSequence::query_count() const {
    std::size_t total = 0;
    for (const auto& s : steps) total += s.query_count();
    return total;
}

void CircuitSequence::validate() const {
    if (qubits < 0 || qubits > 62) throw Error(ErrorKind::BadGate, "qubit count out of range");
    for (const auto& s : steps) validate_step(s, qubits);
}

void CircuitSequence::append(const CircuitSequence& other) {
    if (other.qubits != qubits) throw Error(ErrorKind::DimMismatch, "qubit counts differ");
    steps.insert(steps.end(), other.steps.begin(), other.steps.end());
}

std::vector<std::size_t> BlockPartition::labels(std::size_t dim) const {
    std::vector<std::size_t> out(dim, 0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t i : blocks[b]) out[i] = b;
    }
    return out;
}

void validate_gate(const Gate& gate, int num_qubits) {
    const auto qs = gate.qubits();
    for (int q : qs) {
        if (q < 0 || q >= num_qubits) {
            throw Error(ErrorKind::BadGate, "qubit " + std::to_string(q) + " out of range for " +
                                                std::to_string(num_qubits) + " qubits");
        }
    }
    if (std::set<int>(qs.begin(), qs.end()).size() != qs.size()) {
        throw Error(ErrorKind::BadGate, "gate uses a qubit twice");
    }
    switch (gate.kind) {
        case GateKind::Hadamard:
        case GateKind::Rotation:
            if (gate.targets.size() != 1 || !gate.controls.empty() || !gate.inputs.empty()) {
                throw Error(ErrorKind::BadGate, "single-qubit gate needs exactly one target");
            }
            break;
        case GateKind::Not:
            if (gate.targets.size() != 1 || !gate.inputs.empty()) {
                throw Error(ErrorKind::BadGate, "NOT gate needs exactly one target");
            }
            break;
        case GateKind::PhaseFlip:
            if (gate.table.size() != (std::size_t{1} << gate.inputs.size())) {
                throw Error(ErrorKind::BadGate, "phase-flip predicate has the wrong length");
            }
            for (auto v : gate.table) {
                if (v > 1) throw Error(ErrorKind::BadGate, "phase-flip predicate must be 0/1");
            }
            break;
        case GateKind::Oracle: {
            if (gate.targets.empty()) throw Error(ErrorKind::BadGate, "oracle needs an answer qubit");
            if (gate.table.size() != (std::size_t{1} << gate.inputs.size())) {
                throw Error(ErrorKind::BadGate, "oracle table has the wrong length");
            }
            const std::uint64_t limit = std::uint64_t{1} << gate.targets.size();
            for (auto v : gate.table) {
                if (v >= limit) throw Error(ErrorKind::BadGate, "oracle value wider than answer register");
            }
            break;
        }
    }
}

void validate_step(const UnitaryStep& step, int num_qubits) {
    if (step.matrix) {
        const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_qubits);
        if (step.matrix->rows() != dim || step.matrix->cols() != dim) {
            throw Error(ErrorKind::DimMismatch, "raw step matrix has the wrong dimension");
        }
        require_unitary(*step.matrix);
        return;
    }
    for (const auto& g : step.gates) validate_gate(g, num_qubits);
}

namespace {

// Applies one gate to a dense vector of length 2^n.
void apply_gate_dense(const Gate& g, int n, Complex* v, std::size_t dim, std::vector<Complex>& scratch) {
    switch (g.kind) {
        case GateKind::Hadamard:
        case GateKind::Rotation: {
            const BasisIndex m = qubit_mask(g.targets[0], n);
            double a00, a01, a10, a11;
            if (g.kind == GateKind::Hadamard) {
                a00 = a01 = a10 = kInvSqrt2;
                a11 = -kInvSqrt2;
            } else {
                const double c = std::cos(g.angle), s = std::sin(g.angle);
                a00 = c; a01 = -s; a10 = s; a11 = c;
            }
            for (BasisIndex i = 0; i < dim; ++i) {
                if (i & m) continue;
                const Complex x0 = v[i], x1 = v[i | m];
                v[i] = a00 * x0 + a01 * x1;
                v[i | m] = a10 * x0 + a11 * x1;
            }
            break;
        }
        case GateKind::Not: {
            const BasisIndex m = qubit_mask(g.targets[0], n);
            BasisIndex cm = 0;
            for (int c : g.controls) cm |= qubit_mask(c, n);
            for (BasisIndex i = 0; i < dim; ++i) {
                if ((i & m) || (i & cm) != cm) continue;
                std::swap(v[i], v[i | m]);
            }
            break;
        }
        case GateKind::PhaseFlip:
            for (BasisIndex i = 0; i < dim; ++i) {
                if (g.table[extract_register(i, g.inputs, n)]) v[i] = -v[i];
            }
            break;
        case GateKind::Oracle:
            scratch.assign(v, v + dim);
            for (BasisIndex i = 0; i < dim; ++i) {
                const BasisIndex y = extract_register(i, g.inputs, n);
                const BasisIndex z = extract_register(i, g.targets, n);
                v[deposit_register(i, g.targets, n, z ^ g.table[y])] = scratch[i];
            }
            break;
    }
}

}  // namespace

CMatrix compile_gates(std::span<const Gate> gates, int num_qubits) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    const auto n = static_cast<Eigen::Index>(dim);
    CMatrix u = CMatrix::Identity(n, n);
    std::vector<Complex> scratch;
    for (const auto& g : gates) {
        for (Eigen::Index c = 0; c < n; ++c) apply_gate_dense(g, num_qubits, u.col(c).data(), dim, scratch);
    }
    // Products such as H.H leave rounding residue where the exact entry is zero.
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(u(r, c)) < 1e-14) u(r, c) = 0.0;
        }
    }
    return u;
}

CMatrix compile_step(const UnitaryStep& step, int num_qubits) {
    validate_step(step, num_qubits);
    if (step.matrix) return *step.matrix;
    CMatrix u = compile_gates(step.gates, num_qubits);
    require_unitary(u);
    return u;
}

PureState apply(const CMatrix& u, const PureState& psi) {
    if (u.cols() != static_cast<Eigen::Index>(psi.dim()) || u.rows() != u.cols()) {
        throw Error(ErrorKind::DimMismatch, "matrix and state dimensions differ");
    }
    return PureState(u * psi.amplitudes());
}

RVector born(const PureState& psi) { return psi.amplitudes().cwiseAbs2(); }

RVector born(const DensityOperator& rho) {
    return rho.matrix().diagonal().real().cwiseMax(0.0);
}

RVector final_probabilities(const DensityOperator& rho, const CMatrix& u) {
    if (u.cols() != static_cast<Eigen::Index>(rho.dim()) || u.rows() != u.cols()) {
        throw Error(ErrorKind::DimMismatch, "matrix and state dimensions differ");
    }
    const CMatrix ur = u * rho.matrix();
    RVector q(u.rows());
    for (Eigen::Index j = 0; j < u.rows(); ++j) q(j) = std::max(0.0, ur.row(j).dot(u.row(j)).real());
    return q;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

template <typename Mag>
BlockPartition components(Eigen::Index n, Mag mag, double tol) {
    std::vector<std::size_t> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r != c && mag(r, c) > tol) {
                const auto a = find_root(parent, static_cast<std::size_t>(r));
                const auto b = find_root(parent, static_cast<std::size_t>(c));
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    BlockPartition out;
    std::vector<std::size_t> slot(static_cast<std::size_t>(n), SIZE_MAX);
    for (std::size_t i = 0; i < parent.size(); ++i) {
        const auto root = find_root(parent, i);
        if (slot[root] == SIZE_MAX) {
            slot[root] = out.blocks.size();
            out.blocks.emplace_back();
        }
        out.blocks[slot[root]].push_back(i);
    }
    return out;
}

}  // namespace

BlockPartition detect_blocks(const CMatrix& u, double tol) {
    if (u.rows() != u.cols()) throw Error(ErrorKind::DimMismatch, "matrix must be square");
    return components(u.rows(), [&](Eigen::Index r, Eigen::Index c) { return std::abs(u(r, c)); }, tol);
}

BlockPartition detect_blocks(const RMatrix& magnitudes, double tol) {
    if (magnitudes.rows() != magnitudes.cols()) throw Error(ErrorKind::DimMismatch, "matrix must be square");
    return components(magnitudes.rows(),
                      [&](Eigen::Index r, Eigen::Index c) { return std::abs(magnitudes(r, c)); }, tol);
}

double unitarity_defect(const CMatrix& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    const CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

void require_unitary(const CMatrix& u, double tol) {
    if (u.rows() != u.cols()) throw Error(ErrorKind::DimMismatch, "matrix must be square");
    const double defect = unitarity_defect(u);
    if (!(defect <= tol)) {
        throw Error(ErrorKind::NonUnitary, "max |U^dagger U - I| = " + std::to_string(defect));
    }
}

CMatrix hadamard_matrix() {
    CMatrix h(2, 2);
    h << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
    return h;
}

CMatrix rotation_matrix(double theta) {
    CMatrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

PureState phi_state(double theta) {
    CVector v(2);
    v << std::cos(theta), std::sin(theta);
    return PureState(std::move(v));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {

CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = normal(rng);
            g(r, c) = Complex(re, normal(rng));
        }
    }
    return g;
}

}  // namespace

CMatrix random_unitary(std::size_t dim, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    const CMatrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex d = r(k, k);
        if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
    }
    return q;
}

PureState random_pure_state(std::size_t dim, Rng& rng) {
    CVector v = gaussian_matrix(static_cast<Eigen::Index>(dim), 1, rng).col(0);
    v.normalize();
    return PureState(std::move(v));
}

DensityOperator random_density(std::size_t dim, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    const CMatrix w = gaussian_matrix(n, n, rng);
    CMatrix rho = w * w.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityOperator(std::move(rho));
}

CMatrix nearest_unitary(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

DensityOperator nearest_density(const CMatrix& m) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
    RVector values = eig.eigenvalues().cwiseMax(0.0);
    const double total = values.sum();
    if (!(total > 0)) throw Error(ErrorKind::InvalidState, "perturbed state has no positive part");
    values /= total;
    CMatrix rho = eig.eigenvectors() * values.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityOperator(std::move(rho));
}

}  // namespace hvsim
