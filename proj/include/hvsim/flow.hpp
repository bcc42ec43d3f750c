#pragma once

#include <optional>
#include <vector>

#include "hvsim/core.hpp"

namespace hvsim {

inline constexpr double kFlowTol = 1e-10;

/// Source -> inputs -> outputs -> sink. Middle capacities are stored
/// (output j, input i) like every other matrix in the library.
struct FlowNetwork {
    RVector source_caps;  // c(s, i)
    RMatrix middle_caps;  // c(i, j) at (j, i)
    RVector sink_caps;    // c(j, t)

    std::size_t size() const { return static_cast<std::size_t>(source_caps.size()); }
};

FlowNetwork build_network(const DensityOperator& rho, const CMatrix& u);
/// Network from the two Born vectors directly; they need not sum to 1.
FlowNetwork build_network(const RVector& initial, const RVector& final_probs, const CMatrix& u);

/// Source side of an s-t cut.
struct MinCut {
    std::vector<bool> inputs;
    std::vector<bool> outputs;
    double value = 0.0;
};

struct MaxFlowResult {
    double value = 0.0;
    RMatrix flow;  // (j, i) = flow on arc i -> j
    MinCut cut;
};

struct FlowOptions {
    /// Throw Infeasible unless the flow saturates the smaller side.
    bool require_saturation = true;
    /// Per-arc lower bounds, same layout as the flow.
    std::optional<RMatrix> lower_bounds;
};

double cut_value(const FlowNetwork& net, const MinCut& cut);

MaxFlowResult max_flow(const FlowNetwork& net, const FlowOptions& options = {});

/// Among maximum flows, maximize the (input 1, output 1) entry, then
/// (input 1, output 2), and so on with inputs outermost; each maximized
/// entry is frozen before moving on.
RMatrix lex_max_flow(const FlowNetwork& net, const FlowOptions& options = {});

}  // namespace hvsim
