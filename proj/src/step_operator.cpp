#include "hvsim/step_operator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace hvsim {

void apply_gates_sparse(std::span<const Gate> gates, int n, SparseVector& v, double chop) {
    std::unordered_map<BasisIndex, Complex> acc;
    for (const auto& g : gates) {
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
                acc.clear();
                for (const auto& e : v) {
                    const BasisIndex lo = e.index & ~m;
                    if (e.index & m) {
                        acc[lo] += a01 * e.value;
                        acc[lo | m] += a11 * e.value;
                    } else {
                        acc[lo] += a00 * e.value;
                        acc[lo | m] += a10 * e.value;
                    }
                }
                v.clear();
                for (const auto& [idx, val] : acc) {
                    if (std::norm(val) > chop) v.push_back({idx, val});
                }
                break;
            }
            case GateKind::Not: {
                const BasisIndex m = qubit_mask(g.targets[0], n);
                BasisIndex cm = 0;
                for (int c : g.controls) cm |= qubit_mask(c, n);
                for (auto& e : v) {
                    if ((e.index & cm) == cm) e.index ^= m;
                }
                break;
            }
            case GateKind::PhaseFlip:
                for (auto& e : v) {
                    if (g.table[extract_register(e.index, g.inputs, n)]) e.value = -e.value;
                }
                break;
            case GateKind::Oracle:
                for (auto& e : v) {
                    const BasisIndex y = extract_register(e.index, g.inputs, n);
                    const BasisIndex z = extract_register(e.index, g.targets, n);
                    e.index = deposit_register(e.index, g.targets, n, z ^ g.table[y]);
                }
                break;
        }
    }
    std::sort(v.begin(), v.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
}

StepOperator::StepOperator(const UnitaryStep& step, int num_qubits) : num_qubits_(num_qubits) {
    validate_step(step, num_qubits);
    tol_ = step.block_tol();
    CMatrix local;
    if (step.matrix) {
        for (int q = 0; q < num_qubits; ++q) active_.push_back(q);
        local = *step.matrix;
    } else {
        std::set<int> touched;
        for (const auto& g : step.gates) {
            for (int q : g.qubits()) touched.insert(q);
        }
        active_.assign(touched.begin(), touched.end());
        if (static_cast<int>(active_.size()) > kMaxCompiledQubits) {
            gates_ = step.gates;
            adjoint_gates_ = step.adjoint().gates;
            for (int q : active_) active_mask_ |= qubit_mask(q, num_qubits);
            return;
        }
        std::vector<int> position(static_cast<std::size_t>(num_qubits), -1);
        for (std::size_t k = 0; k < active_.size(); ++k) position[static_cast<std::size_t>(active_[k])] = static_cast<int>(k);
        std::vector<Gate> remapped = step.gates;
        for (auto& g : remapped) {
            for (auto* list : {&g.controls, &g.inputs, &g.targets}) {
                for (int& q : *list) q = position[static_cast<std::size_t>(q)];
            }
        }
        for (int q : active_) active_mask_ |= qubit_mask(q, num_qubits);
        compiled_ = true;
        const bool monomial = std::all_of(remapped.begin(), remapped.end(),
                                          [](const Gate& g) { return g.is_monomial(); });
        if (monomial) {
            build_permutation_blocks(remapped);
            return;
        }
        local = compile_gates(remapped, static_cast<int>(active_.size()));
    }
    if (!compiled_) {
        for (int q : active_) active_mask_ |= qubit_mask(q, num_qubits);
        compiled_ = true;
    }

    const auto partition = detect_blocks(local, tol_);
    local_label_ = partition.labels(static_cast<std::size_t>(local.rows()));
    local_blocks_.reserve(partition.size());
    for (const auto& members : partition.blocks) {
        LocalBlock lb;
        lb.members.assign(members.begin(), members.end());
        const auto m = static_cast<Eigen::Index>(members.size());
        lb.u.resize(m, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            for (Eigen::Index r = 0; r < m; ++r) {
                lb.u(r, c) = local(static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]),
                                   static_cast<Eigen::Index>(members[static_cast<std::size_t>(c)]));
            }
        }
        local_blocks_.push_back(std::move(lb));
    }
}

void StepOperator::build_permutation_blocks(const std::vector<Gate>& local_gates) {
    const int k = static_cast<int>(active_.size());
    const std::size_t d = std::size_t{1} << k;
    std::vector<BasisIndex> image(d);
    std::vector<Complex> phase(d);
    SparseVector v;
    for (BasisIndex l = 0; l < d; ++l) {
        v.assign({{l, Complex(1.0)}});
        apply_gates_sparse(local_gates, k, v);
        image[l] = v.front().index;
        phase[l] = v.front().value;
    }
    // Blocks of a monomial matrix are the cycles of its permutation.
    local_label_.assign(d, SIZE_MAX);
    for (BasisIndex start = 0; start < d; ++start) {
        if (local_label_[start] != SIZE_MAX) continue;
        LocalBlock lb;
        for (BasisIndex l = start; local_label_[l] == SIZE_MAX; l = image[l]) {
            local_label_[l] = local_blocks_.size();
            lb.members.push_back(l);
        }
        std::sort(lb.members.begin(), lb.members.end());
        const auto m = static_cast<Eigen::Index>(lb.members.size());
        lb.u = CMatrix::Zero(m, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            const BasisIndex from = lb.members[static_cast<std::size_t>(c)];
            const auto r = std::lower_bound(lb.members.begin(), lb.members.end(), image[from]) - lb.members.begin();
            lb.u(r, c) = phase[from];
        }
        local_blocks_.push_back(std::move(lb));
    }
}

BasisIndex StepOperator::local_index(BasisIndex index) const {
    return extract_register(index, active_, num_qubits_);
}

BasisIndex StepOperator::embed(BasisIndex coset, BasisIndex local) const {
    return deposit_register(coset, active_, num_qubits_, local);
}

BasisIndex StepOperator::block_key(BasisIndex index) const {
    if (!compiled_) return lazy_block(index).members.front();
    const auto& lb = local_blocks_[local_label_[local_index(index)]];
    return embed(index & ~active_mask_, lb.members.front());
}

StepOperator::Block StepOperator::block_of(BasisIndex index) const {
    if (!compiled_) return lazy_block(index);
    const auto& lb = local_blocks_[local_label_[local_index(index)]];
    const BasisIndex coset = index & ~active_mask_;
    Block out;
    out.members.reserve(lb.members.size());
    for (BasisIndex l : lb.members) out.members.push_back(embed(coset, l));
    out.u = lb.u;
    return out;
}

StepOperator::Block StepOperator::lazy_block(BasisIndex index) const {
    std::unordered_map<BasisIndex, SparseVector> columns;
    std::unordered_set<BasisIndex> seen{index};
    std::deque<BasisIndex> queue{index};
    SparseVector scratch;
    while (!queue.empty()) {
        const BasisIndex m = queue.front();
        queue.pop_front();
        SparseVector col{{m, Complex(1.0)}};
        apply_gates_sparse(gates_, num_qubits_, col);
        for (const auto& e : col) {
            if (seen.insert(e.index).second) queue.push_back(e.index);
        }
        columns.emplace(m, std::move(col));
        scratch.assign({{m, Complex(1.0)}});
        apply_gates_sparse(adjoint_gates_, num_qubits_, scratch);
        for (const auto& e : scratch) {
            if (seen.insert(e.index).second) queue.push_back(e.index);
        }
    }
    Block out;
    out.members.assign(seen.begin(), seen.end());
    std::sort(out.members.begin(), out.members.end());
    const auto m = static_cast<Eigen::Index>(out.members.size());
    out.u = CMatrix::Zero(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        for (const auto& e : columns.at(out.members[static_cast<std::size_t>(c)])) {
            const auto r = std::lower_bound(out.members.begin(), out.members.end(), e.index) - out.members.begin();
            out.u(r, c) = e.value;
        }
    }
    return out;
}

}  // namespace hvsim
