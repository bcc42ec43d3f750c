#include "hvsim/history.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>

namespace hvsim {

const std::vector<Transition>& StepTransitions::column(BasisIndex from) const {
    if (shared) return columns.front();
    const auto it = std::lower_bound(sources.begin(), sources.end(), from);
    if (it == sources.end() || *it != from) {
        throw Error(ErrorKind::InvalidArgument, "no transitions recorded from basis state " + std::to_string(from));
    }
    return columns[static_cast<std::size_t>(it - sources.begin())];
}

double StepTransitions::probability(BasisIndex from, BasisIndex to) const {
    for (const auto& t : column(from)) {
        if (t.to == to) return t.probability;
    }
    return 0.0;
}

RVector HistoryDistribution::born(std::size_t t) const {
    RVector out = RVector::Zero(static_cast<Eigen::Index>(dim()));
    for (const auto& e : states.at(t)) out(static_cast<Eigen::Index>(e.index)) = std::norm(e.value);
    return out;
}

RMatrix HistoryDistribution::stochastic_matrix(std::size_t t) const {
    if (t == 0 || t > steps.size()) throw Error(ErrorKind::InvalidArgument, "step number out of range");
    const auto& st = steps[t - 1];
    const auto n = static_cast<Eigen::Index>(dim());
    RMatrix s = RMatrix::Zero(n, n);
    if (st.shared) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (const auto& tr : st.columns.front()) s(static_cast<Eigen::Index>(tr.to), i) = tr.probability;
        }
        return s;
    }
    for (std::size_t k = 0; k < st.sources.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(st.sources[k]);
        for (const auto& tr : st.columns[k]) s(static_cast<Eigen::Index>(tr.to), i) = tr.probability;
    }
    return s;
}

namespace {

std::string step_key(const UnitaryStep& step) {
    std::string key;
    auto put = [&key](std::uint64_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); };
    for (const auto& g : step.gates) {
        put(static_cast<std::uint64_t>(g.kind));
        for (const auto* list : {&g.controls, &g.inputs, &g.targets}) {
            put(list->size());
            for (int q : *list) put(static_cast<std::uint64_t>(q));
        }
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof g.angle);
        std::memcpy(&bits, &g.angle, sizeof bits);
        put(bits);
        put(g.table.size());
        for (auto v : g.table) put(v);
    }
    return key;
}

class OperatorCache {
public:
    explicit OperatorCache(int num_qubits) : num_qubits_(num_qubits) {}

    std::shared_ptr<const StepOperator> get(const UnitaryStep& step) {
        if (step.is_matrix()) return std::make_shared<const StepOperator>(step, num_qubits_);
        auto key = step_key(step);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        auto op = std::make_shared<const StepOperator>(step, num_qubits_);
        cache_.emplace(std::move(key), op);
        return op;
    }

private:
    int num_qubits_;
    std::unordered_map<std::string, std::shared_ptr<const StepOperator>> cache_;
};

Complex amplitude_of(const SparseState& psi, BasisIndex index) {
    const auto it = std::lower_bound(psi.begin(), psi.end(), index,
                                     [](const SparseEntry& e, BasisIndex i) { return e.index < i; });
    return (it != psi.end() && it->index == index) ? it->value : Complex(0.0);
}

std::vector<Transition> column_from(const RMatrix& p_block, Eigen::Index c, const RVector& q_block,
                                    const std::vector<BasisIndex>& members) {
    std::vector<Transition> out;
    double total = p_block.col(c).sum();
    const bool fallback = !(total > 0);
    if (fallback) total = q_block.sum();
    for (Eigen::Index r = 0; r < p_block.rows(); ++r) {
        const double w = fallback ? q_block(r) : p_block(r, c);
        if (w > 0) out.push_back({members[static_cast<std::size_t>(r)], w / total});
    }
    return out;
}

// Evaluates one block of one step. Appends the block's share of the next
// state and, when asked, its columns.
void evaluate_block(const StepOperator::Block& block, const SparseState& psi, TheoryId theory,
                    const ChainOptions& options, std::size_t dim, bool all_columns, bool with_columns,
                    SparseState& next, std::vector<std::pair<BasisIndex, std::vector<Transition>>>& columns,
                    std::vector<LimitFlag>& flags) {
    const auto m = static_cast<Eigen::Index>(block.members.size());
    CVector in(m);
    for (Eigen::Index k = 0; k < m; ++k) in(k) = amplitude_of(psi, block.members[static_cast<std::size_t>(k)]);
    CVector out = block.u * in;
    RVector p = in.cwiseAbs2();
    RVector q = out.cwiseAbs2();
    for (Eigen::Index k = 0; k < m; ++k) {
        if (q(k) < options.chop) {
            q(k) = 0.0;
            out(k) = 0.0;
        } else {
            next.push_back({block.members[static_cast<std::size_t>(k)], out(k)});
        }
    }
    if (theory == TheoryId::Product || !with_columns) return;

    if (!all_columns) {
        const RMatrix pj = joint_from_marginals(theory, p, q, block.u, options.theory);
        for (Eigen::Index c = 0; c < m; ++c) {
            if (p(c) > 0) columns.emplace_back(block.members[static_cast<std::size_t>(c)], column_from(pj, c, q, block.members));
        }
        return;
    }
    auto res = stochastic_from_marginals(theory, p, q, block.u, options.theory, options.schedule, dim);
    for (Eigen::Index c = 0; c < m; ++c) {
        columns.emplace_back(block.members[static_cast<std::size_t>(c)], column_from(res.s, c, q, block.members));
    }
    for (auto& f : res.flags) {
        f.column = block.members[f.column];
        flags.push_back(std::move(f));
    }
}

BasisIndex draw(const std::vector<Transition>& col, Rng& rng) {
    double u = uniform01(rng);
    for (const auto& t : col) {
        if (u < t.probability) return t.to;
        u -= t.probability;
    }
    return col.back().to;
}

std::vector<Transition> born_column(const SparseState& psi) {
    double total = 0.0;
    for (const auto& e : psi) total += std::norm(e.value);
    std::vector<Transition> col;
    col.reserve(psi.size());
    for (const auto& e : psi) col.push_back({e.index, std::norm(e.value) / total});
    return col;
}

void sort_state(SparseState& psi) {
    std::sort(psi.begin(), psi.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
}

}  // namespace

HistoryDistribution chain(const CircuitSequence& circuit, TheoryId theory, const ChainOptions& options) {
    circuit.validate();
    HistoryDistribution dist;
    dist.num_qubits = circuit.qubits;
    dist.theory = theory;
    dist.states.push_back({{0, Complex(1.0)}});
    const std::size_t dim = dist.dim();
    if (!options.reachable_only && circuit.qubits > 16) {
        throw Error(ErrorKind::InvalidArgument, "every-column evaluation is limited to 16 qubits");
    }

    OperatorCache cache(circuit.qubits);
    std::unordered_map<BasisIndex, std::size_t> assigned;
    for (const auto& step : circuit.steps) {
        const auto op = cache.get(step);
        const SparseState& psi = dist.states.back();
        SparseState next;
        std::vector<std::pair<BasisIndex, std::vector<Transition>>> columns;
        StepTransitions st;
        assigned.clear();
        auto visit = [&](BasisIndex index, bool all_columns) {
            if (assigned.count(index)) return;
            const auto block = op->block_of(index);
            for (auto member : block.members) assigned.emplace(member, 0);
            evaluate_block(block, psi, theory, options, dim, all_columns, true, next, columns, st.flags);
        };
        if (options.reachable_only) {
            for (const auto& e : psi) visit(e.index, false);
        } else {
            for (BasisIndex i = 0; i < dim; ++i) visit(i, true);
        }
        sort_state(next);

        if (theory == TheoryId::Product) {
            st.shared = true;
            st.columns.push_back(born_column(next));
        } else {
            std::sort(columns.begin(), columns.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            st.sources.reserve(columns.size());
            st.columns.reserve(columns.size());
            for (auto& [from, col] : columns) {
                st.sources.push_back(from);
                st.columns.push_back(std::move(col));
            }
        }
        dist.steps.push_back(std::move(st));
        dist.states.push_back(std::move(next));
    }
    return dist;
}

History sample_history(const HistoryDistribution& dist, Rng& rng) {
    History h;
    h.reserve(dist.length() + 1);
    BasisIndex v = 0;
    h.push_back(v);
    for (const auto& st : dist.steps) {
        v = draw(st.column(v), rng);
        h.push_back(v);
    }
    return h;
}

History walk(const CircuitSequence& circuit, TheoryId theory, Rng& rng, const ChainOptions& options) {
    circuit.validate();
    const std::size_t dim = circuit.dim();
    OperatorCache cache(circuit.qubits);
    SparseState psi{{0, Complex(1.0)}};
    BasisIndex v = 0;
    History h{v};
    h.reserve(circuit.steps.size() + 1);
    std::unordered_map<BasisIndex, char> assigned;
    std::vector<std::pair<BasisIndex, std::vector<Transition>>> columns;
    std::vector<LimitFlag> flags;
    for (const auto& step : circuit.steps) {
        const auto op = cache.get(step);
        SparseState next;
        columns.clear();
        assigned.clear();
        for (const auto& e : psi) {
            if (assigned.count(e.index)) continue;
            const auto block = op->block_of(e.index);
            for (auto member : block.members) assigned.emplace(member, 0);
            const bool holds_v = std::binary_search(block.members.begin(), block.members.end(), v);
            evaluate_block(block, psi, theory, options, dim, false, holds_v, next, columns, flags);
        }
        sort_state(next);
        if (theory == TheoryId::Product) {
            v = draw(born_column(next), rng);
        } else {
            const auto it = std::find_if(columns.begin(), columns.end(), [v](const auto& c) { return c.first == v; });
            if (it == columns.end()) {
                throw Error(ErrorKind::InvalidArgument, "no transitions recorded from basis state " + std::to_string(v));
            }
            v = draw(it->second, rng);
        }
        h.push_back(v);
        psi = std::move(next);
    }
    return h;
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("HVSIM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t threads = std::min(thread_budget(), std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<History> sample(const HistoryDistribution& dist, std::size_t count, std::uint64_t seed) {
    std::vector<History> out(count);
    parallel_for(count, [&](std::size_t k) {
        Rng rng = derive_rng(seed, k);
        out[k] = sample_history(dist, rng);
    });
    return out;
}

History sample_once(const CircuitSequence& circuit, TheoryId theory, std::uint64_t seed,
                    const ChainOptions& options) {
    const auto dist = chain(circuit, theory, options);
    Rng rng = derive_rng(seed, 0);
    return sample_history(dist, rng);
}

}  // namespace hvsim
