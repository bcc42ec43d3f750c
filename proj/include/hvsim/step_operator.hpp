#pragma once

#include <memory>
#include <vector>

#include "hvsim/core.hpp"

namespace hvsim {

struct SparseEntry {
    BasisIndex index;
    Complex value;
};
using SparseVector = std::vector<SparseEntry>;

/// Applies a gate list to a sparse vector in place. Entries whose squared
/// magnitude falls below `chop` are dropped.
void apply_gates_sparse(std::span<const Gate> gates, int num_qubits, SparseVector& v,
                        double chop = 1e-28);

/// A unitary step viewed through its block structure. Steps that touch few
/// qubits are compiled once on those qubits; every global block is then a
/// fixed assignment of the untouched qubits times a local block. Wider steps
/// discover blocks lazily by walking columns and rows from a seed index.
class StepOperator {
public:
    struct Block {
        std::vector<BasisIndex> members;  // ascending
        CMatrix u;                        // rows and columns aligned with members
    };

    StepOperator(const UnitaryStep& step, int num_qubits);

    int num_qubits() const { return num_qubits_; }
    const std::vector<int>& active_qubits() const { return active_; }
    bool compiled() const { return compiled_; }

    /// Smallest member of the block holding `index`; equal keys mean the same block.
    BasisIndex block_key(BasisIndex index) const;
    Block block_of(BasisIndex index) const;

    static constexpr int kMaxCompiledQubits = 10;

private:
    struct LocalBlock {
        std::vector<BasisIndex> members;
        CMatrix u;
    };

    int num_qubits_;
    std::vector<int> active_;
    BasisIndex active_mask_ = 0;
    bool compiled_ = false;
    double tol_ = 0.0;
    // compiled mode
    std::vector<std::size_t> local_label_;
    std::vector<LocalBlock> local_blocks_;
    // lazy mode
    std::vector<Gate> gates_;
    std::vector<Gate> adjoint_gates_;

    BasisIndex local_index(BasisIndex index) const;
    BasisIndex embed(BasisIndex coset, BasisIndex local) const;
    Block lazy_block(BasisIndex index) const;
    void build_permutation_blocks(const std::vector<Gate>& local_gates);
};

}  // namespace hvsim
