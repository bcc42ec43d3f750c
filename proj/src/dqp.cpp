#include "hvsim/dqp.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "hvsim/step_operator.hpp"

namespace hvsim {

namespace {

std::vector<int> range(int begin, int count) {
    std::vector<int> out(static_cast<std::size_t>(count));
    std::iota(out.begin(), out.end(), begin);
    return out;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<Gate> hadamards(const std::vector<int>& qubits) {
    std::vector<Gate> out;
    out.reserve(qubits.size());
    for (int q : qubits) out.push_back(Gate::hadamard(q));
    return out;
}

std::uint64_t low_mask(int bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

SparseVector final_state(const CircuitSequence& c) {
    SparseVector psi{{0, Complex(1.0)}};
    for (const auto& step : c.steps) {
        if (!step.is_matrix()) {
            apply_gates_sparse(step.gates, c.qubits, psi);
            continue;
        }
        CVector dense = CVector::Zero(static_cast<Eigen::Index>(c.dim()));
        for (const auto& e : psi) dense(static_cast<Eigen::Index>(e.index)) = e.value;
        dense = *step.matrix * dense;
        psi.clear();
        for (Eigen::Index k = 0; k < dense.size(); ++k) {
            if (std::norm(dense(k)) >= 1e-28) psi.push_back({static_cast<BasisIndex>(k), dense(k)});
        }
    }
    return psi;
}

std::uint64_t unique_marked(const TruthTable& f) {
    const auto marked = f.marked();
    if (marked.size() != 1) {
        throw Error(ErrorKind::NotUniqueMarked,
                    "expected exactly one marked item, found " + std::to_string(marked.size()));
    }
    return marked.front();
}

std::vector<UnitaryStep> grover_steps(const std::vector<int>& reg, const TruthTable& f, std::size_t iterations) {
    std::vector<std::uint64_t> predicate(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) predicate[x] = f.table[x] != 0 ? 1 : 0;
    std::vector<std::uint64_t> zero(f.size(), 0);
    zero[0] = 1;
    std::vector<UnitaryStep> steps{UnitaryStep::from_gates(hadamards(reg))};
    for (std::size_t k = 0; k < iterations; ++k) {
        steps.push_back(UnitaryStep::from_gates({Gate::phase_flip(reg, predicate, true)}));
        auto diffusion = hadamards(reg);
        diffusion.push_back(Gate::phase_flip(reg, zero));
        for (int q : reg) diffusion.push_back(Gate::hadamard(q));
        steps.push_back(UnitaryStep::from_gates(std::move(diffusion)));
    }
    return steps;
}

void require_search_table(int n, const TruthTable& f) {
    if (f.n != n || f.m != 1) {
        throw Error(ErrorKind::DimMismatch, "search needs a table from " + std::to_string(n) + " bits to one bit");
    }
}

}  // namespace

// ---------------------------------------------------------------- tables and hashes

TruthTable::TruthTable(int n_, int m_, std::vector<std::uint64_t> table_) : n(n_), m(m_), table(std::move(table_)) {
    if (n < 0 || n > 30 || m < 0 || m > 63) throw Error(ErrorKind::InvalidArgument, "truth table widths out of range");
    if (table.size() != (std::size_t{1} << n)) {
        throw Error(ErrorKind::InvalidArgument, "truth table needs " + std::to_string(std::size_t{1} << n) +
                                                    " entries, got " + std::to_string(table.size()));
    }
    for (auto y : table) {
        if (y > low_mask(m)) throw Error(ErrorKind::InvalidArgument, "truth table output wider than m bits");
    }
}

std::vector<std::uint64_t> TruthTable::marked() const {
    std::vector<std::uint64_t> out;
    for (std::size_t x = 0; x < table.size(); ++x) {
        if (table[x] != 0) out.push_back(x);
    }
    return out;
}

std::uint64_t AffineHash::linear(std::uint64_t x) const {
    std::uint64_t out = 0;
    for (auto row : rows) out = (out << 1) | static_cast<std::uint64_t>(std::popcount(row & x) & 1);
    return out;
}

AffineHash vv_draw(int n, int k, Rng& rng) {
    if (n < 1 || k < 1 || k > n + 1) throw Error(ErrorKind::InvalidArgument, "hash widths need 1 <= k <= n + 1");
    AffineHash h;
    h.n = n;
    h.k = k;
    h.rows.resize(static_cast<std::size_t>(k));
    for (auto& row : h.rows) row = rng() & low_mask(n);
    h.offset = rng() & low_mask(k);
    return h;
}

AffineHash vv_draw(int n, int k, std::uint64_t seed) {
    Rng rng = derive_rng(seed);
    return vv_draw(n, k, rng);
}

double vv_isolation_rate(const std::vector<std::uint64_t>& subset, int n, int k, std::size_t trials,
                         std::uint64_t seed) {
    if (subset.empty() || trials == 0) throw Error(ErrorKind::InvalidArgument, "need a nonempty set and trials");
    std::size_t isolated = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = derive_rng(seed, t);
        const auto h = vv_draw(n, k, rng);
        const auto x = subset[uniform_below(rng, subset.size())];
        const auto hx = h(x);
        const auto hits = std::count_if(subset.begin(), subset.end(), [&](std::uint64_t y) { return h(y) == hx; });
        if (hits == 1) ++isolated;
    }
    return static_cast<double>(isolated) / static_cast<double>(trials);
}

double variation_distance(const TruthTable& a, const TruthTable& b) {
    if (a.m != b.m) throw Error(ErrorKind::WidthMismatch, "tables have different output widths");
    std::map<std::uint64_t, double> diff;
    for (auto y : a.table) diff[y] += 1.0 / static_cast<double>(a.size());
    for (auto y : b.table) diff[y] -= 1.0 / static_cast<double>(b.size());
    double total = 0.0;
    for (const auto& [y, d] : diff) total += std::abs(d);
    return std::clamp(0.5 * total, 0.0, 1.0);
}

// ---------------------------------------------------------------- juggle

std::size_t default_attempts(int l) { return 2 * static_cast<std::size_t>(l) * static_cast<std::size_t>(l); }

std::vector<UnitaryStep> juggle_steps(const std::vector<int>& reg, std::size_t attempts, Rng& rng) {
    std::vector<UnitaryStep> steps;
    steps.reserve(3 * attempts);
    for (std::size_t a = 0; a < attempts; ++a) {
        const auto skip = uniform_below(rng, reg.size());
        std::vector<Gate> first;
        for (std::size_t j = 0; j < reg.size(); ++j) {
            if (j != skip) first.push_back(Gate::hadamard(reg[j]));
        }
        steps.push_back(UnitaryStep::from_gates(std::move(first)));
        steps.push_back(UnitaryStep::from_gates({Gate::hadamard(reg[skip])}));
        steps.push_back(UnitaryStep::from_gates(hadamards(reg)));
    }
    return steps;
}

CircuitSequence juggle_circuit(int l, std::size_t attempts, std::uint64_t seed) {
    if (l < 1 || attempts < 1) throw Error(ErrorKind::InvalidArgument, "juggle needs l >= 1 and attempts >= 1");
    Rng rng = derive_rng(seed);
    return CircuitSequence{l, juggle_steps(range(0, l), attempts, rng)};
}

CircuitSequence pair_state_circuit(int l, BasisIndex a, BasisIndex b, bool minus) {
    if (l < 1 || a == b || a >> l || b >> l) {
        throw Error(ErrorKind::InvalidArgument, "pair state needs two distinct l-bit values");
    }
    const BasisIndex diff = a ^ b;
    const int pivot = std::countl_zero(diff) - (64 - l);  // first differing qubit
    if (a & qubit_mask(pivot, l)) std::swap(a, b);
    CircuitSequence c{l, {}};
    std::vector<Gate> set;
    for (int q = 0; q < l; ++q) {
        if (a & qubit_mask(q, l)) set.push_back(Gate::x(q));
    }
    if (!set.empty()) c.steps.push_back(UnitaryStep::from_gates(std::move(set)));
    c.steps.push_back(UnitaryStep::from_gates({Gate::hadamard(pivot)}));
    std::vector<Gate> spread;
    for (int q = pivot + 1; q < l; ++q) {
        if (diff & qubit_mask(q, l)) spread.push_back(Gate::cnot(pivot, q));
    }
    if (!spread.empty()) c.steps.push_back(UnitaryStep::from_gates(std::move(spread)));
    if (minus) c.steps.push_back(UnitaryStep::from_gates({Gate::phase_flip({pivot}, {0, 1})}));
    return c;
}

JuggleOutcome run_juggle(const CircuitSequence& prep, TheoryId theory, std::uint64_t seed, std::size_t attempts,
                         std::vector<int> reg) {
    prep.validate();
    if (reg.empty()) reg = range(0, prep.qubits);
    const int l = static_cast<int>(reg.size());
    if (attempts == 0) attempts = default_attempts(l);

    std::size_t support = 0;
    for (const auto& e : final_state(prep)) {
        const double w = std::norm(e.value);
        if (w <= 1e-9) continue;
        ++support;
        if (std::abs(w - 0.5) > 1e-9) throw Error(ErrorKind::BadSupport, "prepared amplitudes are not equal");
    }
    if (support != 2) {
        throw Error(ErrorKind::BadSupport, "prepared state has " + std::to_string(support) + " basis states, not 2");
    }

    Rng circuit_rng = derive_rng(seed, 0);
    CircuitSequence full = prep;
    for (auto& s : juggle_steps(reg, attempts, circuit_rng)) full.steps.push_back(std::move(s));
    Rng walk_rng = derive_rng(seed, 1);
    JuggleOutcome out;
    out.attempts = attempts;
    out.history = walk(full, theory, walk_rng);
    std::set<BasisIndex> seen;
    for (std::size_t a = 0; a <= attempts; ++a) {
        seen.insert(extract_register(out.history[prep.steps.size() + 3 * a], reg, prep.qubits));
    }
    out.recovered.assign(seen.begin(), seen.end());
    out.success = out.recovered.size() == 2;
    return out;
}

// ---------------------------------------------------------------- statistical difference

std::vector<int> SzkLayout::juggled() const { return concat({selector}, input); }

SzkCircuit szk_circuit(const TruthTable& p0, const TruthTable& p1, Rng& rng, const SzkOptions& options) {
    if (p0.n != p1.n || p0.m != p1.m) throw Error(ErrorKind::WidthMismatch, "samplers differ in input or output width");
    const int n = p0.n;
    const int m = p0.m;
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "samplers need at least one input bit");

    SzkCircuit out;
    auto& lay = out.layout;
    lay.n = n;
    lay.m = m;
    lay.selector = 0;
    lay.input = range(1, n);
    lay.output = range(1 + n, m);
    lay.hash = range(1 + n + m, n + 1);
    out.circuit.qubits = lay.qubits();
    out.attempts_per_call = options.attempts_per_call ? options.attempts_per_call : 2 * static_cast<std::size_t>(n + 1);
    const std::size_t calls = options.calls ? options.calls : 8 * static_cast<std::size_t>(n);

    const auto reg = lay.juggled();
    const std::size_t half = std::size_t{1} << n;
    std::vector<std::uint64_t> sampled(2 * half);
    for (std::size_t x = 0; x < half; ++x) {
        sampled[x] = p0(x);
        sampled[half + x] = p1(x);
    }
    auto& steps = out.circuit.steps;
    for (std::size_t c = 0; c < calls; ++c) {
        SzkCall call;
        call.k = 2 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        call.h0 = vv_draw(n, call.k, rng);
        call.h1 = vv_draw(n, call.k, rng);
        std::vector<std::uint64_t> hashed(2 * half);
        for (std::size_t x = 0; x < half; ++x) {
            hashed[x] = call.h0(x);
            hashed[half + x] = call.h1(x);
        }
        const std::vector<int> hash_reg(lay.hash.begin(), lay.hash.begin() + call.k);
        const auto spread = UnitaryStep::from_gates(hadamards(reg));
        const auto compute = UnitaryStep::from_gates(
            {Gate::oracle(sampled, reg, lay.output, true), Gate::oracle(std::move(hashed), reg, hash_reg, false)});
        steps.push_back(spread);
        steps.push_back(compute);
        call.first_step = steps.size();
        for (auto& s : juggle_steps(reg, out.attempts_per_call, rng)) steps.push_back(std::move(s));
        steps.push_back(compute.adjoint());
        steps.push_back(spread.adjoint());
        out.calls.push_back(std::move(call));
    }
    return out;
}

bool shows_both_selectors(const SzkCircuit& c, const History& h) {
    const int n = c.circuit.qubits;
    for (const auto& call : c.calls) {
        std::array<bool, 2> seen{false, false};
        for (std::size_t a = 0; a <= c.attempts_per_call; ++a) {
            const auto v = h.at(call.first_step + 3 * a);
            seen[(v & qubit_mask(c.layout.selector, n)) ? 1 : 0] = true;
        }
        if (seen[0] && seen[1]) return true;
    }
    return false;
}

const char* to_string(Verdict v) { return v == Verdict::Close ? "close" : "far"; }

SzkResult statistical_difference(const TruthTable& p0, const TruthTable& p1, TheoryId theory, std::size_t runs,
                                 std::uint64_t seed, const SzkOptions& options) {
    if (runs == 0) throw Error(ErrorKind::InvalidArgument, "need at least one run");
    SzkResult out;
    out.runs = runs;
    out.distance = variation_distance(p0, p1);
    out.promise_holds = out.distance <= 1.0 / 3.0 || out.distance >= 2.0 / 3.0;
    std::vector<char> both(runs, 0);
    parallel_for(runs, [&](std::size_t r) {
        Rng circuit_rng = derive_rng(seed, 2 * r);
        const auto c = szk_circuit(p0, p1, circuit_rng, options);
        Rng walk_rng = derive_rng(seed, 2 * r + 1);
        both[r] = shows_both_selectors(c, walk(c.circuit, theory, walk_rng)) ? 1 : 0;
    });
    out.runs_showing_both = static_cast<std::size_t>(std::count(both.begin(), both.end(), 1));
    out.verdict = out.runs_showing_both > 0 ? Verdict::Close : Verdict::Far;
    return out;
}

void require_promise(const TruthTable& p0, const TruthTable& p1) {
    const double d = variation_distance(p0, p1);
    if (d > 1.0 / 3.0 && d < 2.0 / 3.0) {
        throw Error(ErrorKind::PromiseUnverifiable,
                    "variation distance " + std::to_string(d) + " lies inside the promise gap");
    }
}

TruthTable graph_sampler(std::uint64_t edges) {
    if (edges > 7) throw Error(ErrorKind::InvalidArgument, "a 3-vertex graph has three edge bits");
    static constexpr std::array<std::array<int, 3>, 8> perms{{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}, {0, 1, 2}, {1, 0, 2},
    }};
    static constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    auto bit_of = [](int u, int v) {
        if (u > v) std::swap(u, v);
        return u == 0 ? (v == 1 ? 2 : 1) : 0;
    };
    std::vector<std::uint64_t> table;
    for (const auto& pi : perms) {
        std::uint64_t image = 0;
        for (std::size_t e = 0; e < 3; ++e) {
            if (edges >> (2 - e) & 1U) image |= std::uint64_t{1} << bit_of(pi[pairs[e][0]], pi[pairs[e][1]]);
        }
        table.push_back(image);
    }
    return TruthTable(3, 3, std::move(table));
}

// ---------------------------------------------------------------- search

CircuitSequence grover_prepare(int n, const TruthTable& f, std::size_t iterations) {
    require_search_table(n, f);
    unique_marked(f);
    return CircuitSequence{n, grover_steps(range(0, n), f, iterations)};
}

std::pair<double, double> search_target_amplitudes(int n) {
    const double third = static_cast<double>(n) / 3.0;
    const double alpha = std::sqrt(1.0 / (std::exp2(third) + std::exp2(1.0 - third) + 1.0));
    return {alpha, std::exp2(-third) * alpha};
}

std::size_t grover_iterations(int n) {
    const auto [alpha, beta] = search_target_amplitudes(n);
    const double target = (alpha + beta) * (alpha + beta);
    const double theta = std::asin(std::exp2(-0.5 * n));
    std::size_t q = 0;
    while (std::pow(std::sin((2.0 * static_cast<double>(q) + 1.0) * theta), 2) < target - 1e-12) ++q;
    return q;
}

SearchCircuit search_circuit(int n, const TruthTable& f, Rng& rng, const SearchOptions& options) {
    if (n < 3 || n % 3 != 0) throw Error(ErrorKind::InvalidArgument, "search needs n divisible by 3");
    require_search_table(n, f);
    unique_marked(f);
    const int t = n / 3;
    SearchCircuit out;
    auto& lay = out.layout;
    lay.n = n;
    lay.head = range(0, t);
    lay.tail = range(t, 2 * t);
    lay.tag = range(n, 2 * t);
    out.circuit.qubits = lay.qubits();

    const auto reg = concat(lay.head, lay.tail);
    const std::size_t iterations = options.iterations.value_or(grover_iterations(n));
    auto& steps = out.circuit.steps;
    steps = grover_steps(reg, f, iterations);
    out.grover_queries = iterations;
    steps.push_back(UnitaryStep::from_gates(hadamards(lay.head)));
    out.checkpoints.push_back(steps.size());

    const std::size_t calls = options.call_factor * (std::size_t{1} << t) * static_cast<std::size_t>(n);
    const std::uint64_t tail_mask = low_mask(2 * t);
    for (std::size_t c = 0; c < calls; ++c) {
        const std::uint64_t s = uniform_below(rng, std::uint64_t{1} << t);
        out.shifts.push_back(s);
        std::vector<std::uint64_t> tags(std::size_t{1} << n);
        for (std::uint64_t x = 0; x < tags.size(); ++x) {
            const std::uint64_t head = x >> (2 * t);
            tags[x] = head == 0 ? (x & tail_mask) : ((s << t) | head);
        }
        const auto tag = UnitaryStep::from_gates({Gate::oracle(std::move(tags), reg, lay.tag, false)});
        steps.push_back(tag);
        for (auto& s3 : juggle_steps(reg, 1, rng)) steps.push_back(std::move(s3));
        out.checkpoints.push_back(steps.size());
        steps.push_back(tag.adjoint());
    }
    return out;
}

SearchResult search(int n, const TruthTable& f, TheoryId theory, std::uint64_t seed, const SearchOptions& options) {
    Rng circuit_rng = derive_rng(seed, 0);
    const auto sc = search_circuit(n, f, circuit_rng, options);
    Rng walk_rng = derive_rng(seed, 1);
    SearchResult out;
    out.history = walk(sc.circuit, theory, walk_rng);
    out.grover_queries = sc.grover_queries;
    out.calls = sc.shifts.size();

    const int t = n / 3;
    const int width = sc.circuit.qubits;
    const std::uint64_t marked_tail = unique_marked(f) & low_mask(2 * t);
    for (auto pos : sc.checkpoints) {
        const auto v = out.history[pos];
        const auto head = extract_register(v, sc.layout.head, width);
        const auto tail = extract_register(v, sc.layout.tail, width);
        if (head == 0 && tail == marked_tail) ++out.overlap_visits;
        if (head != 0 && !out.tail_seen) out.tail_seen = tail;
    }
    if (out.tail_seen) {
        for (std::uint64_t a = 0; a < (std::uint64_t{1} << t); ++a) {
            const std::uint64_t candidate = (a << (2 * t)) | *out.tail_seen;
            ++out.probes;
            if (f(candidate) != 0) {
                out.found = true;
                out.item = candidate;
            }
        }
    }
    out.queries = out.grover_queries + out.probes;
    return out;
}

}  // namespace hvsim
