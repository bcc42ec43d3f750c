#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hvsim/core.hpp"
#include "hvsim/history.hpp"
#include "hvsim/theories.hpp"

namespace hvsim {

/// f: {0,1}^n -> {0,1}^m as a table of 2^n outputs.
struct TruthTable {
    int n = 0;
    int m = 0;
    std::vector<std::uint64_t> table;

    TruthTable() = default;
    /// Throws InvalidArgument for a wrong length or an output wider than m bits.
    TruthTable(int n, int m, std::vector<std::uint64_t> table);

    std::uint64_t operator()(std::uint64_t x) const { return table.at(x); }
    std::size_t size() const { return table.size(); }
    /// Inputs mapping to a nonzero output.
    std::vector<std::uint64_t> marked() const;
};

/// h(x) = Ax xor b over F_2. Row r of A is stored as an n-bit mask; output
/// bit r is the (k-1-r)-th least significant bit.
struct AffineHash {
    int n = 0;
    int k = 0;
    std::vector<std::uint64_t> rows;
    std::uint64_t offset = 0;

    std::uint64_t linear(std::uint64_t x) const;
    std::uint64_t operator()(std::uint64_t x) const { return linear(x) ^ offset; }
};

/// Uniform affine map {0,1}^n -> {0,1}^k. Requires 1 <= k <= n + 1.
AffineHash vv_draw(int n, int k, Rng& rng);
AffineHash vv_draw(int n, int k, std::uint64_t seed);

/// Frequency, over fresh hashes and x uniform in `subset`, that x is the
/// only member of `subset` with its hash value.
double vv_isolation_rate(const std::vector<std::uint64_t>& subset, int n, int k, std::size_t trials,
                         std::uint64_t seed);

/// Total variation distance between the output distributions of two tables
/// on uniform input. Throws WidthMismatch for different output widths.
double variation_distance(const TruthTable& a, const TruthTable& b);

// ---------------------------------------------------------------- juggle

/// Default attempt count 2 l^2.
std::size_t default_attempts(int l);

/// Three steps per attempt on qubits 0..l-1: H on all but a random qubit i,
/// H on i, H on all. i is drawn uniformly with replacement.
CircuitSequence juggle_circuit(int l, std::size_t attempts, std::uint64_t seed);

/// Juggle steps acting on `reg` inside a register of `num_qubits`; the excluded
/// qubit of every attempt is drawn from `rng`.
std::vector<UnitaryStep> juggle_steps(const std::vector<int>& reg, std::size_t attempts, Rng& rng);

/// Prepares (|a> + |b>)/sqrt(2), or with a minus sign, on l qubits from |0...0>.
CircuitSequence pair_state_circuit(int l, BasisIndex a, BasisIndex b, bool minus = false);

struct JuggleOutcome {
    std::vector<BasisIndex> recovered;  // ascending, register values
    std::size_t attempts = 0;
    bool success = false;
    History history;
};

/// Runs `prep`, then the juggle on `reg` (all qubits when empty), and reads
/// the register at the end of the preparation and after every attempt.
/// Throws BadSupport when the prepared state is not an equal-weight pair.
JuggleOutcome run_juggle(const CircuitSequence& prep, TheoryId theory, std::uint64_t seed,
                         std::size_t attempts = 0, std::vector<int> reg = {});

// ---------------------------------------------------------------- statistical difference

struct SzkOptions {
    /// Juggle attempts per call; 0 means 2(n + 1).
    std::size_t attempts_per_call = 0;
    /// Calls per history, each with fresh hashes; 0 means 8n.
    std::size_t calls = 0;
};

/// Qubit layout of the statistical-difference circuit.
struct SzkLayout {
    int n = 0;
    int m = 0;
    int selector = 0;           // the b qubit
    std::vector<int> input;     // x, n qubits
    std::vector<int> output;    // P_b(x), m qubits
    std::vector<int> hash;      // h_b(x), n + 1 qubits
    int qubits() const { return 1 + n + m + n + 1; }
    /// The juggled register: selector then input.
    std::vector<int> juggled() const;
};

struct SzkCall {
    int k = 0;
    AffineHash h0, h1;
    std::size_t first_step = 0;  // index of the first juggle step
};

struct SzkCircuit {
    SzkLayout layout;
    CircuitSequence circuit;
    std::vector<SzkCall> calls;
    std::size_t attempts_per_call = 0;
};

/// The single history-oracle query: per call, prepare sum_{b,x} |b>|x>|P_b(x)>|h_b(x)>,
/// juggle (b, x), and uncompute back to |0...0>. Hashes are drawn from `rng`.
SzkCircuit szk_circuit(const TruthTable& p0, const TruthTable& p1, Rng& rng, const SzkOptions& options = {});

/// True when some call's history shows both selector values at attempt boundaries.
bool shows_both_selectors(const SzkCircuit& c, const History& h);

enum class Verdict { Close, Far };
const char* to_string(Verdict v);

struct SzkResult {
    Verdict verdict = Verdict::Far;
    std::size_t runs = 0;
    std::size_t runs_showing_both = 0;
    double distance = 0.0;  // exact variation distance
    bool promise_holds = false;
};

/// Decides close (distance <= 1/3) against far (>= 2/3). The verdict is
/// "close" iff some run's history shows both selector values.
SzkResult statistical_difference(const TruthTable& p0, const TruthTable& p1, TheoryId theory,
                                 std::size_t runs, std::uint64_t seed, const SzkOptions& options = {});

/// Throws PromiseUnverifiable when the distance lies strictly between 1/3 and 2/3.
void require_promise(const TruthTable& p0, const TruthTable& p1);

/// Toy graph-isomorphism sampler on 3 vertices. Inputs 0..5 apply the six
/// vertex permutations, 6 the identity and 7 the transposition (0 1). The
/// output is the permuted graph's edge bits (01, 02, 12), 01 most significant.
TruthTable graph_sampler(std::uint64_t edges);

// ---------------------------------------------------------------- search

/// Diffusion-based amplitude amplification of the unique marked item of `f`
/// (n inputs, 1 output bit), starting from the uniform state.
/// Throws NotUniqueMarked.
CircuitSequence grover_prepare(int n, const TruthTable& f, std::size_t iterations);

/// Smallest iteration count whose marked probability reaches (alpha + beta)^2
/// for the target state alpha|x> + beta sum_y |y>.
std::size_t grover_iterations(int n);
/// alpha and beta of the target state.
std::pair<double, double> search_target_amplitudes(int n);

struct SearchOptions {
    /// Juggle calls = call_factor * 2^{n/3} * n.
    std::size_t call_factor = 4;
    /// Grover iterations; unset means grover_iterations(n).
    std::optional<std::size_t> iterations;
};

struct SearchLayout {
    int n = 0;
    std::vector<int> head;   // n/3 qubits
    std::vector<int> tail;   // 2n/3 qubits
    std::vector<int> tag;    // 2n/3 qubits
    int qubits() const { return 5 * n / 3; }
};

struct SearchCircuit {
    SearchLayout layout;
    CircuitSequence circuit;
    std::size_t grover_queries = 0;
    /// History positions at which the first two registers hold a Y or Z value.
    std::vector<std::size_t> checkpoints;
    std::vector<std::uint64_t> shifts;  // the s of every call
};

SearchCircuit search_circuit(int n, const TruthTable& f, Rng& rng, const SearchOptions& options = {});

struct SearchResult {
    bool found = false;
    std::uint64_t item = 0;
    std::size_t queries = 0;          // oracle gates plus classical probes
    std::size_t grover_queries = 0;
    std::size_t probes = 0;
    std::size_t calls = 0;
    std::size_t overlap_visits = 0;   // checkpoints at |0>|x_B>
    std::optional<std::uint64_t> tail_seen;
    History history;
};

/// Finds the unique marked item of f: {0,1}^n -> {0,1} (n divisible by 3).
SearchResult search(int n, const TruthTable& f, TheoryId theory, std::uint64_t seed,
                    const SearchOptions& options = {});

}  // namespace hvsim
