#include "hvsim/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hvsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
    int from;
    int to;
    double lower;
    double upper;
    double flow;
    bool frozen = false;
};

struct Step {
    int arc = -1;
    bool forward = true;
};

// Residual network with per-arc bounds. Forward residual is upper - flow,
// backward residual is flow - lower.
class Graph {
public:
    explicit Graph(int vertices) : adj_(static_cast<std::size_t>(vertices)) {}

    std::size_t vertex_count() const { return adj_.size(); }

    int add_vertex() {
        adj_.emplace_back();
        return static_cast<int>(adj_.size()) - 1;
    }

    int add_arc(int from, int to, double lower, double upper) {
        arcs.push_back({from, to, lower, upper, lower});
        const int id = static_cast<int>(arcs.size()) - 1;
        adj_[static_cast<std::size_t>(from)].push_back({id, true});
        adj_[static_cast<std::size_t>(to)].push_back({id, false});
        return id;
    }

    double residual(const Step& s) const {
        const Arc& a = arcs[static_cast<std::size_t>(s.arc)];
        return s.forward ? a.upper - a.flow : a.flow - a.lower;
    }

    // Shortest-path augmentation from src to dst, pushing at most `limit`.
    double augment(int src, int dst, double limit, int excluded = -1) {
        double total = 0.0;
        const std::size_t n = adj_.size();
        parent_.resize(n);
        queue_.resize(n);
        while (total < limit) {
            std::fill(parent_.begin(), parent_.end(), Step{-2, true});
            parent_[static_cast<std::size_t>(src)] = Step{-1, true};
            std::size_t head = 0, tail = 0;
            queue_[tail++] = src;
            bool found = false;
            while (head < tail && !found) {
                const int u = queue_[head++];
                for (const Step& s : adj_[static_cast<std::size_t>(u)]) {
                    const Arc& a = arcs[static_cast<std::size_t>(s.arc)];
                    if (a.frozen || s.arc == excluded) continue;
                    const int v = s.forward ? a.to : a.from;
                    if (parent_[static_cast<std::size_t>(v)].arc != -2) continue;
                    if (!(residual(s) > 0.0)) continue;
                    parent_[static_cast<std::size_t>(v)] = s;
                    if (v == dst) {
                        found = true;
                        break;
                    }
                    queue_[tail++] = v;
                }
            }
            if (!found) break;
            double delta = limit - total;
            int bottleneck = -1;
            for (int v = dst; v != src;) {
                const Step& s = parent_[static_cast<std::size_t>(v)];
                const double r = residual(s);
                if (r <= delta) {
                    delta = r;
                    bottleneck = s.arc;
                }
                const Arc& a = arcs[static_cast<std::size_t>(s.arc)];
                v = s.forward ? a.from : a.to;
            }
            for (int v = dst; v != src;) {
                const Step& s = parent_[static_cast<std::size_t>(v)];
                Arc& a = arcs[static_cast<std::size_t>(s.arc)];
                if (s.arc == bottleneck) {
                    a.flow = s.forward ? a.upper : a.lower;
                } else {
                    a.flow += s.forward ? delta : -delta;
                }
                v = s.forward ? a.from : a.to;
            }
            total += delta;
            if (bottleneck == -1) break;  // limit reached
        }
        return total;
    }

    std::vector<bool> reachable(int src, double threshold) const {
        std::vector<bool> seen(adj_.size(), false);
        std::vector<int> stack{src};
        seen[static_cast<std::size_t>(src)] = true;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const Step& s : adj_[static_cast<std::size_t>(u)]) {
                const Arc& a = arcs[static_cast<std::size_t>(s.arc)];
                if (a.frozen) continue;
                const int v = s.forward ? a.to : a.from;
                if (seen[static_cast<std::size_t>(v)] || !(residual(s) > threshold)) continue;
                seen[static_cast<std::size_t>(v)] = true;
                stack.push_back(v);
            }
        }
        return seen;
    }

    std::vector<Arc> arcs;

private:
    std::vector<std::vector<Step>> adj_;
    std::vector<Step> parent_;
    std::vector<int> queue_;
};

constexpr int kSource = 0;
constexpr int kSink = 1;

// The network as a graph. Inputs and outputs with zero capacity are left
// out since every arc through them is forced to carry nothing.
struct Built {
    Graph graph{2};
    std::size_t n = 0;
    std::vector<int> input_vertex;   // -1 when pruned
    std::vector<int> output_vertex;  // -1 when pruned
    std::vector<int> source_arc, sink_arc;
    std::vector<int> middle_arcs;    // lex order: input outer, output inner
    std::vector<std::pair<std::size_t, std::size_t>> middle_ij;  // (input, output)
};

void check_network(const FlowNetwork& net) {
    const auto n = net.source_caps.size();
    if (net.sink_caps.size() != n || net.middle_caps.rows() != n || net.middle_caps.cols() != n) {
        throw Error(ErrorKind::DimMismatch, "network capacity shapes disagree");
    }
    if ((net.source_caps.array() < 0).any() || (net.sink_caps.array() < 0).any() ||
        (net.middle_caps.array() < 0).any()) {
        throw Error(ErrorKind::InvalidArgument, "capacities must be nonnegative");
    }
}

Built build_graph(const FlowNetwork& net, const std::optional<RMatrix>& lower) {
    check_network(net);
    Built b;
    b.n = net.size();
    b.input_vertex.assign(b.n, -1);
    b.output_vertex.assign(b.n, -1);
    b.source_arc.assign(b.n, -1);
    b.sink_arc.assign(b.n, -1);
    for (std::size_t i = 0; i < b.n; ++i) {
        const double c = net.source_caps(static_cast<Eigen::Index>(i));
        if (c > 0) {
            b.input_vertex[i] = b.graph.add_vertex();
            b.source_arc[i] = b.graph.add_arc(kSource, b.input_vertex[i], 0.0, c);
        }
    }
    for (std::size_t j = 0; j < b.n; ++j) {
        const double c = net.sink_caps(static_cast<Eigen::Index>(j));
        if (c > 0) {
            b.output_vertex[j] = b.graph.add_vertex();
            b.sink_arc[j] = b.graph.add_arc(b.output_vertex[j], kSink, 0.0, c);
        }
    }
    for (std::size_t i = 0; i < b.n; ++i) {
        for (std::size_t j = 0; j < b.n; ++j) {
            const auto r = static_cast<Eigen::Index>(j), c = static_cast<Eigen::Index>(i);
            const double cap = net.middle_caps(r, c);
            const double lo = lower ? std::max(0.0, (*lower)(r, c)) : 0.0;
            if (b.input_vertex[i] < 0 || b.output_vertex[j] < 0 || !(cap > 0)) {
                if (lo > 0) throw Error(ErrorKind::Infeasible, "lower bound on an arc that cannot carry flow");
                continue;
            }
            if (lo > cap) throw Error(ErrorKind::Infeasible, "lower bound exceeds capacity");
            b.middle_arcs.push_back(b.graph.add_arc(b.input_vertex[i], b.output_vertex[j], lo, cap));
            b.middle_ij.emplace_back(i, j);
        }
    }
    return b;
}

// Makes the initial flow (middle arcs at their lower bounds) conserve flow
// at every input and output, routing through a temporary return arc t -> s.
void establish_lower_bounds(Built& b) {
    Graph& g = b.graph;
    std::vector<double> balance(g.vertex_count(), 0.0);
    bool any = false;
    for (int id : b.middle_arcs) {
        const Arc& a = g.arcs[static_cast<std::size_t>(id)];
        if (a.lower > 0) {
            any = true;
            balance[static_cast<std::size_t>(a.to)] += a.lower;
            balance[static_cast<std::size_t>(a.from)] -= a.lower;
        }
    }
    if (!any) return;
    const int back = g.add_arc(kSink, kSource, 0.0, kInf);
    const int super_s = g.add_vertex();
    const int super_t = g.add_vertex();
    std::vector<int> helpers;
    double needed = 0.0;
    for (std::size_t v = 2; v < balance.size(); ++v) {
        if (balance[v] > 0) {
            helpers.push_back(g.add_arc(super_s, static_cast<int>(v), 0.0, balance[v]));
            needed += balance[v];
        } else if (balance[v] < 0) {
            helpers.push_back(g.add_arc(static_cast<int>(v), super_t, 0.0, -balance[v]));
        }
    }
    const double pushed = g.augment(super_s, super_t, kInf);
    if (pushed < needed * (1.0 - 10 * kFlowTol)) {
        throw Error(ErrorKind::Infeasible, "lower bounds admit no feasible flow");
    }
    for (int id : helpers) g.arcs[static_cast<std::size_t>(id)].frozen = true;
    g.arcs[static_cast<std::size_t>(back)].frozen = true;
}

RMatrix extract_flow(const Built& b) {
    const auto n = static_cast<Eigen::Index>(b.n);
    RMatrix f = RMatrix::Zero(n, n);
    for (std::size_t k = 0; k < b.middle_arcs.size(); ++k) {
        const auto [i, j] = b.middle_ij[k];
        f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            std::max(0.0, b.graph.arcs[static_cast<std::size_t>(b.middle_arcs[k])].flow);
    }
    return f;
}

double outflow(const Built& b) {
    double value = 0.0;
    for (int id : b.source_arc) {
        if (id >= 0) value += b.graph.arcs[static_cast<std::size_t>(id)].flow;
    }
    return value;
}

void check_saturation(const FlowNetwork& net, double value) {
    const double in = net.source_caps.sum();
    const double out = net.sink_caps.sum();
    const double scale = std::max(in, out);
    if (std::abs(in - out) > 10 * kFlowTol * std::max(scale, 1e-300) + 1e-300) {
        throw Error(ErrorKind::Infeasible, "source and sink capacities differ: " + std::to_string(in) +
                                               " vs " + std::to_string(out));
    }
    const double target = std::min(in, out);
    if (value < target * (1.0 - 10 * kFlowTol)) {
        throw Error(ErrorKind::Infeasible,
                    "maximum flow " + std::to_string(value) + " below " + std::to_string(target));
    }
}

Built solve_max(const FlowNetwork& net, const FlowOptions& options) {
    Built b = build_graph(net, options.lower_bounds);
    establish_lower_bounds(b);
    b.graph.augment(kSource, kSink, kInf);
    if (options.require_saturation) check_saturation(net, outflow(b));
    return b;
}

}  // namespace

FlowNetwork build_network(const RVector& initial, const RVector& final_probs, const CMatrix& u) {
    if (u.rows() != u.cols() || initial.size() != u.cols() || final_probs.size() != u.rows()) {
        throw Error(ErrorKind::DimMismatch, "marginals and matrix dimensions differ");
    }
    return FlowNetwork{initial.cwiseMax(0.0), u.cwiseAbs(), final_probs.cwiseMax(0.0)};
}

FlowNetwork build_network(const DensityOperator& rho, const CMatrix& u) {
    return build_network(born(rho), final_probabilities(rho, u), u);
}

double cut_value(const FlowNetwork& net, const MinCut& cut) {
    double value = 0.0;
    const std::size_t n = net.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!cut.inputs[i]) value += net.source_caps(static_cast<Eigen::Index>(i));
        if (cut.outputs[i]) value += net.sink_caps(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!cut.inputs[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (!cut.outputs[j]) value += net.middle_caps(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        }
    }
    return value;
}

MaxFlowResult max_flow(const FlowNetwork& net, const FlowOptions& options) {
    Built b = solve_max(net, options);
    MaxFlowResult out;
    out.value = outflow(b);
    out.flow = extract_flow(b);
    // Arcs within rounding of saturation count as saturated for the certificate.
    const auto side = b.graph.reachable(kSource, 1e-13);
    out.cut.inputs.assign(b.n, false);
    out.cut.outputs.assign(b.n, false);
    for (std::size_t k = 0; k < b.n; ++k) {
        // Pruned vertices carry nothing; put them on the side that adds no capacity.
        const int iv = b.input_vertex[k];
        out.cut.inputs[k] = iv < 0 || side[static_cast<std::size_t>(iv)];
        const int ov = b.output_vertex[k];
        out.cut.outputs[k] = ov >= 0 && side[static_cast<std::size_t>(ov)];
    }
    out.cut.value = cut_value(net, out.cut);
    return out;
}

RMatrix lex_max_flow(const FlowNetwork& net, const FlowOptions& options) {
    Built b = solve_max(net, options);
    Graph& g = b.graph;
    for (int id : b.middle_arcs) {
        Arc& a = g.arcs[static_cast<std::size_t>(id)];
        const double room = a.upper - a.flow;
        if (room > 0) {
            // Extra flow on (i, j) closes a residual cycle j -> ... -> i.
            const double gain = g.augment(a.to, a.from, room, id);
            a.flow = gain >= room ? a.upper : a.flow + gain;
        }
        a.lower = a.upper = a.flow;
        a.frozen = true;
    }
    return extract_flow(b);
}

}  // namespace hvsim
