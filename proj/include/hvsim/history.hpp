#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hvsim/core.hpp"
#include "hvsim/step_operator.hpp"
#include "hvsim/theories.hpp"

namespace hvsim {

struct Transition {
    BasisIndex to;
    double probability;
};

/// One stochastic matrix, stored by column for the source states that need one.
struct StepTransitions {
    /// Product theory: a single column serves every source.
    bool shared = false;
    std::vector<BasisIndex> sources;  // ascending; empty when shared
    std::vector<std::vector<Transition>> columns;
    std::vector<LimitFlag> flags;     // column numbers are global basis indices

    /// Throws InvalidArgument when `from` has no column.
    const std::vector<Transition>& column(BasisIndex from) const;
    double probability(BasisIndex from, BasisIndex to) const;
};

/// Sparse amplitudes sorted by basis index.
using SparseState = SparseVector;

struct HistoryDistribution {
    int num_qubits = 0;
    TheoryId theory = TheoryId::Flow;
    std::vector<SparseState> states;  // psi_0 ... psi_T
    std::vector<StepTransitions> steps;

    std::size_t length() const { return steps.size(); }
    std::size_t dim() const { return std::size_t{1} << num_qubits; }
    /// Dense Born vector of psi_t.
    RVector born(std::size_t t) const;
    /// Dense stochastic matrix of step t (1-based, matching the state it produces).
    RMatrix stochastic_matrix(std::size_t t) const;
};

struct ChainOptions {
    /// Only columns reachable by the hidden variable (support states of the
    /// incoming state) are evaluated; otherwise every column is, with the
    /// vanishing-mixture limit for zero-probability columns.
    bool reachable_only = true;
    TheoryOptions theory;
    EpsilonSchedule schedule;
    /// Amplitudes with squared magnitude below this are dropped.
    double chop = 1e-20;
};

/// Markov chain of stochastic matrices along the circuit, starting from |0...0>.
HistoryDistribution chain(const CircuitSequence& circuit, TheoryId theory, const ChainOptions& options = {});

using History = std::vector<BasisIndex>;

History sample_history(const HistoryDistribution& dist, Rng& rng);
/// Sample k uses the generator derived from seed + k.
std::vector<History> sample(const HistoryDistribution& dist, std::size_t count, std::uint64_t seed);

/// Samples one history while evaluating the theory only on the block that
/// holds the current value. Same law as sample_history on `chain`.
History walk(const CircuitSequence& circuit, TheoryId theory, Rng& rng, const ChainOptions& options = {});

/// Convenience: chain then a single sample.
History sample_once(const CircuitSequence& circuit, TheoryId theory, std::uint64_t seed,
                    const ChainOptions& options = {});

/// Threads allowed by HVSIM_THREADS (default 1).
std::size_t thread_budget();

/// Runs body(0..count-1) on up to thread_budget() threads. The first
/// exception thrown by any call is rethrown after all threads finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hvsim
