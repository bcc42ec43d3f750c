#include "hvsim/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hvsim/axioms.hpp"
#include "hvsim/dqp.hpp"
#include "hvsim/history.hpp"
#include "hvsim/io.hpp"

namespace hvsim {

namespace {

struct Output {
    Json json;
    std::string csv;
    int code = 0;
};

const std::filesystem::path& need(const std::optional<std::filesystem::path>& p, const char* flag) {
    if (!p) throw Error(ErrorKind::InvalidArgument, std::string(flag) + " is required");
    return *p;
}

std::uint64_t need_seed(const RunConfig& c) {
    if (!c.seed) throw Error(ErrorKind::InvalidArgument, "--seed is required for commands that sample");
    return *c.seed;
}

DensityOperator load_state(const std::filesystem::path& p) { return state_from_json(read_json_file(p)); }
CMatrix load_matrix(const std::filesystem::path& p) { return matrix_from_json(read_json_file(p)); }
TruthTable load_table(const std::filesystem::path& p) { return truth_table_from_json(read_json_file(p)); }

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return derive_rng(seed, trial)(); }

Json index_list(const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (auto x : v) out.push_back(x);
    return out;
}

Output cmd_theory(const RunConfig& c) {
    const auto rho = load_state(need(c.state, "--state"));
    const auto u = load_matrix(need(c.unitary, "--unitary"));
    TheoryOptions opts;
    opts.scaling.tol = c.sinkhorn_tol;
    opts.scaling.max_iter = c.max_iter;
    const auto res = stochastic(c.theory, rho, u, opts);
    const RVector p = born(rho);
    const RVector q = final_probabilities(rho, u);
    const double col_res = (res.p.colwise().sum().transpose() - p).cwiseAbs().maxCoeff();
    const double row_res = (res.p.rowwise().sum() - q).cwiseAbs().maxCoeff();
    Json flags = Json::array();
    for (const auto& f : res.flags) flags.push_back({{"column", f.column}, {"change", f.change}});

    Output out;
    out.json = {{"theory", std::string(to_string(c.theory))},
                {"P", to_json(res.p)},
                {"S", to_json(res.s)},
                {"initial", to_json(p)},
                {"final", to_json(q)},
                {"residuals", {{"column", col_res}, {"row", row_res}}},
                {"limit_columns", index_list(res.limit_columns)},
                {"epsilon_flags", flags}};
    std::ostringstream csv;
    csv.precision(17);
    csv << "initial,final,joint,stochastic\n";
    for (Eigen::Index i = 0; i < res.p.cols(); ++i) {
        for (Eigen::Index j = 0; j < res.p.rows(); ++j) csv << i << ',' << j << ',' << res.p(j, i) << ',' << res.s(j, i) << '\n';
    }
    out.csv = csv.str();
    return out;
}

Output cmd_history(const RunConfig& c) {
    const auto circuit = circuit_from_json(read_json_file(need(c.circuit, "--circuit")));
    const auto seed = need_seed(c);
    const auto dist = chain(circuit, c.theory);
    const auto samples = sample(dist, c.samples, seed);
    Output out;
    out.json = histories_to_json(samples, seed);
    out.json["theory"] = std::string(to_string(c.theory));
    std::ostringstream csv;
    csv << "sample,t,value\n";
    for (std::size_t k = 0; k < samples.size(); ++k) {
        for (std::size_t t = 0; t < samples[k].size(); ++t) csv << k << ',' << t << ',' << samples[k][t] << '\n';
    }
    out.csv = csv.str();
    return out;
}

Decomposition load_ensemble(const std::filesystem::path& p) {
    const Json j = read_json_file(p);
    if (!j.contains("weights") || !j.contains("states") || j.at("weights").size() != j.at("states").size()) {
        throw Error(ErrorKind::Parse, p.string() + ": ensemble needs matching \"weights\" and \"states\"");
    }
    Decomposition d;
    for (std::size_t k = 0; k < j.at("weights").size(); ++k) {
        d.emplace_back(j.at("weights")[k].get<double>(), PureState(vector_from_json(j.at("states")[k])));
    }
    return d;
}

Output cmd_axioms(const RunConfig& c) {
    Output out;
    if (c.replay) {
        const auto report = AxiomReport::from_json(read_json_file(*c.replay));
        const double again = replay(report);
        const bool match = std::abs(again - report.worst_violation) <= 1e-12 * std::max(1.0, std::abs(again));
        out.json = {{"axiom", report.axiom}, {"reported", report.worst_violation}, {"recomputed", again}, {"match", match}};
        out.csv = "axiom,reported,recomputed,match\n" + report.axiom + ',' + std::to_string(report.worst_violation) +
                  ',' + std::to_string(again) + ',' + (match ? "1" : "0") + '\n';
        out.code = match ? 0 : 1;
        return out;
    }
    AxiomReport r;
    const auto& m = c.mode;
    if (m == "indifference") {
        r = check_indifference(c.theory, load_matrix(need(c.unitary, "--unitary")), load_state(need(c.state, "--state")),
                               c.tol.value_or(1e-10));
    } else if (m == "commutativity") {
        r = check_commutativity(c.theory, load_state(need(c.state, "--state")), load_matrix(need(c.unitary, "--unitary")),
                                load_matrix(need(c.unitary_b, "--unitary-b")), c.tol.value_or(1e-8));
    } else if (m == "nogo") {
        r = check_nogo(c.theory, c.tol.value_or(1e-9));
    } else if (m == "decomposition") {
        const auto level = c.level == "joint" ? DecompositionLevel::Joint : DecompositionLevel::Stochastic;
        if (c.level != "joint" && c.level != "stochastic") {
            throw Error(ErrorKind::InvalidArgument, "--level must be stochastic or joint");
        }
        r = check_decomposition_invariance(c.theory, load_state(need(c.state, "--state")),
                                           load_ensemble(need(c.ensemble, "--ensemble")),
                                           load_matrix(need(c.unitary, "--unitary")), c.tol.value_or(1e-9), level);
    } else if (m == "robustness") {
        r = check_robustness(c.theory, load_state(need(c.state, "--state")), load_matrix(need(c.unitary, "--unitary")),
                             c.delta, c.trials, need_seed(c), c.tol.value_or(1e-3));
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown axiom check '" + m + "'");
    }
    out.json = r.to_json();
    std::ostringstream csv;
    csv.precision(17);
    csv << "axiom,theory,pass,worst_violation,threshold\n"
        << r.axiom << ',' << to_string(r.theory) << ',' << (r.pass ? 1 : 0) << ',' << r.worst_violation << ','
        << r.threshold << '\n';
    out.csv = csv.str();
    out.code = r.pass ? 0 : 1;
    return out;
}

Output demo_juggle(const RunConfig& c) {
    const auto seed = need_seed(c);
    const int l = c.qubits;
    if (l < 1 || l > 20) throw Error(ErrorKind::InvalidArgument, "--qubits must lie in 1..20");
    if (c.a.has_value() != c.b.has_value()) throw Error(ErrorKind::InvalidArgument, "give both --a and --b");
    const std::size_t attempts = c.attempts ? c.attempts : default_attempts(l);
    std::vector<JuggleOutcome> results(c.trials);
    std::vector<std::pair<BasisIndex, BasisIndex>> pairs(c.trials);
    parallel_for(c.trials, [&](std::size_t k) {
        BasisIndex a = c.a.value_or(0), b = c.b.value_or(0);
        if (!c.a || !c.b) {
            Rng rng = derive_rng(seed ^ 0x6a09e667f3bcc909ULL, k);
            const std::uint64_t size = std::uint64_t{1} << l;
            a = uniform_below(rng, size);
            do {
                b = uniform_below(rng, size);
            } while (b == a);
        }
        pairs[k] = {a, b};
        results[k] = run_juggle(pair_state_circuit(l, a, b, c.minus), c.theory, trial_seed(seed, k), attempts);
    });
    Json trials = Json::array();
    std::size_t wins = 0;
    std::ostringstream csv;
    csv << "trial,a,b,success,recovered\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        wins += r.success ? 1 : 0;
        Json t = {{"a", pairs[k].first}, {"b", pairs[k].second}, {"recovered", r.recovered}, {"success", r.success}};
        if (c.trials == 1) t["history"] = r.history;
        trials.push_back(std::move(t));
        csv << k << ',' << pairs[k].first << ',' << pairs[k].second << ',' << (r.success ? 1 : 0) << ',';
        for (std::size_t i = 0; i < r.recovered.size(); ++i) csv << (i ? ";" : "") << r.recovered[i];
        csv << '\n';
    }
    const double rate = static_cast<double>(wins) / static_cast<double>(c.trials);
    Output out;
    out.json = {{"demo", "juggle"},           {"theory", std::string(to_string(c.theory))},
                {"qubits", l},                {"attempts", attempts},
                {"seed", seed},               {"trials", trials},
                {"success_rate", rate},       {"failure_rate", 1.0 - rate},
                {"failure_bound", std::exp(-static_cast<double>(l))}};
    out.csv = csv.str();
    out.code = rate >= 2.0 / 3.0 ? 0 : 1;
    return out;
}

Output demo_szk(const RunConfig& c) {
    const auto p0 = load_table(need(c.p0, "--p0"));
    const auto p1 = load_table(need(c.p1, "--p1"));
    const auto seed = need_seed(c);
    SzkOptions opts;
    opts.attempts_per_call = c.attempts;
    opts.calls = c.calls;
    const auto r = statistical_difference(p0, p1, c.theory, c.runs, seed, opts);
    Output out;
    out.json = {{"demo", "szk"},
                {"theory", std::string(to_string(c.theory))},
                {"seed", seed},
                {"verdict", to_string(r.verdict)},
                {"distance", r.distance},
                {"promise_holds", r.promise_holds},
                {"runs", r.runs},
                {"runs_showing_both", r.runs_showing_both}};
    std::ostringstream csv;
    csv.precision(17);
    csv << "verdict,distance,runs,runs_showing_both\n"
        << to_string(r.verdict) << ',' << r.distance << ',' << r.runs << ',' << r.runs_showing_both << '\n';
    out.csv = csv.str();
    if (c.expect) {
        if (*c.expect != "close" && *c.expect != "far") throw Error(ErrorKind::InvalidArgument, "--expect must be close or far");
        out.code = *c.expect == to_string(r.verdict) ? 0 : 1;
    }
    return out;
}

Output demo_search(const RunConfig& c) {
    const auto seed = need_seed(c);
    const int n = c.n;
    if (n < 3 || n > 18 || n % 3 != 0) throw Error(ErrorKind::InvalidArgument, "--n must be 3, 6, ..., 18");
    std::optional<TruthTable> fixed;
    if (c.table) fixed = load_table(*c.table);
    SearchOptions opts;
    opts.call_factor = c.call_factor;
    const std::size_t size = std::size_t{1} << n;
    std::vector<SearchResult> results(c.trials);
    std::vector<std::uint64_t> marks(c.trials);
    parallel_for(c.trials, [&](std::size_t k) {
        TruthTable f;
        if (fixed) {
            f = *fixed;
        } else {
            Rng rng = derive_rng(seed ^ 0xbb67ae8584caa73bULL, k);
            const std::uint64_t x = c.marked.value_or(uniform_below(rng, size));
            std::vector<std::uint64_t> table(size, 0);
            table.at(x) = 1;
            f = TruthTable(n, 1, std::move(table));
        }
        marks[k] = f.marked().empty() ? 0 : f.marked().front();
        results[k] = search(n, f, c.theory, trial_seed(seed, k), opts);
    });
    Json trials = Json::array();
    std::size_t wins = 0, total_queries = 0, max_queries = 0, overlaps = 0;
    std::ostringstream csv;
    csv << "trial,marked,found,item,queries,probes\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        wins += r.found ? 1 : 0;
        total_queries += r.queries;
        max_queries = std::max(max_queries, r.queries);
        overlaps += r.overlap_visits;
        Json t = {{"marked", marks[k]},        {"found", r.found},   {"item", r.item},
                  {"queries", r.queries},      {"probes", r.probes}, {"grover_queries", r.grover_queries},
                  {"overlap_visits", r.overlap_visits}};
        if (c.trials == 1) t["history"] = r.history;
        trials.push_back(std::move(t));
        csv << k << ',' << marks[k] << ',' << (r.found ? 1 : 0) << ',' << r.item << ',' << r.queries << ',' << r.probes
            << '\n';
    }
    const double rate = static_cast<double>(wins) / static_cast<double>(c.trials);
    const double mean = static_cast<double>(total_queries) / static_cast<double>(c.trials);
    Output out;
    out.json = {{"demo", "search"},
                {"theory", std::string(to_string(c.theory))},
                {"n", n},
                {"seed", seed},
                {"calls", results.empty() ? 0 : results.front().calls},
                {"trials", trials},
                {"success_rate", rate},
                {"mean_queries", mean},
                {"max_queries", max_queries},
                {"overlap_visits", overlaps},
                {"query_constant", mean / (std::exp2(n / 3.0) * n)}};
    out.csv = csv.str();
    out.code = rate >= 2.0 / 3.0 ? 0 : 1;
    return out;
}

void emit(const RunConfig& c, const Output& o, std::ostream& out) {
    const std::string text = c.csv ? o.csv : o.json.dump(2) + "\n";
    if (!c.output) {
        out << text;
        return;
    }
    std::ofstream file(*c.output, std::ios::binary);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + c.output->string());
    file << text;
}

template <typename T>
void copy_if_set(const CLI::Option* opt, const T& value, std::optional<T>& target) {
    if (opt->count() > 0) target = value;
}

}  // namespace

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out) {
    RunConfig c;
    CLI::App app{"Hidden-variable theories, history sampling and history-based algorithms", "hvsim"};
    app.require_subcommand(1);
    std::string theory = "ft";
    std::string state, unitary, unitary_b, circuit, ensemble, p0, p1, table, replay_path, output, expect;
    std::uint64_t seed = 0, a = 0, b = 0, marked = 0;
    double tol = 0.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--theory,--id", theory, "pt, dt, ft or st");
        sub->add_option("--out,-o", output, "Write the result to this file");
        sub->add_flag("--csv", c.csv, "Flat CSV rows instead of JSON");
    };

    auto* th = app.add_subcommand("theory", "Joint and stochastic matrices of one (state, unitary) pair");
    common(th);
    th->add_option("--state", state)->required();
    th->add_option("--unitary", unitary)->required();
    th->add_option("--sinkhorn-tol", c.sinkhorn_tol);
    th->add_option("--max-iter", c.max_iter);

    auto* hi = app.add_subcommand("history", "Sample hidden-variable histories through a circuit");
    common(hi);
    hi->add_option("--circuit", circuit)->required();
    hi->add_option("--samples", c.samples);
    auto* hi_seed = hi->add_option("--seed", seed)->required();

    auto* ax = app.add_subcommand("axioms", "Check one axiom and write its report");
    common(ax);
    ax->add_option("--check", c.mode, "indifference, commutativity, nogo, decomposition or robustness");
    ax->add_option("--state", state);
    ax->add_option("--unitary", unitary);
    ax->add_option("--unitary-b", unitary_b);
    ax->add_option("--ensemble", ensemble);
    ax->add_option("--level", c.level);
    ax->add_option("--delta", c.delta);
    ax->add_option("--trials", c.trials);
    auto* ax_tol = ax->add_option("--tol", tol);
    auto* ax_seed = ax->add_option("--seed", seed);
    ax->add_option("--replay", replay_path, "Recompute the violation stored in a report");

    auto* de = app.add_subcommand("demo", "Run a history-based algorithm");
    common(de);
    de->add_option("mode", c.mode, "juggle, szk or search")->required()->check(CLI::IsMember({"juggle", "szk", "search"}));
    auto* de_seed = de->add_option("--seed", seed)->required();
    de->add_option("--trials", c.trials);
    de->add_option("--runs", c.runs);
    de->add_option("--qubits,-l", c.qubits);
    de->add_option("--attempts", c.attempts);
    auto* de_a = de->add_option("--a", a);
    auto* de_b = de->add_option("--b", b);
    de->add_flag("--minus", c.minus);
    de->add_option("--p0", p0);
    de->add_option("--p1", p1);
    de->add_option("--calls", c.calls);
    de->add_option("--expect", expect);
    de->add_option("--n", c.n);
    de->add_option("--table", table);
    auto* de_marked = de->add_option("--marked", marked);
    de->add_option("--call-factor", c.call_factor);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw Error(ErrorKind::Parse, e.what());
    }

    const auto* chosen = app.get_subcommands().front();
    c.command = chosen->get_name();
    c.theory = parse_theory(theory);
    auto path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
    };
    c.state = path(state);
    c.unitary = path(unitary);
    c.unitary_b = path(unitary_b);
    c.circuit = path(circuit);
    c.ensemble = path(ensemble);
    c.p0 = path(p0);
    c.p1 = path(p1);
    c.table = path(table);
    c.replay = path(replay_path);
    c.output = path(output);
    if (!expect.empty()) c.expect = expect;
    for (const auto* opt : {hi_seed, ax_seed, de_seed}) copy_if_set(opt, seed, c.seed);
    copy_if_set(ax_tol, tol, c.tol);
    copy_if_set(de_a, a, c.a);
    copy_if_set(de_b, b, c.b);
    copy_if_set(de_marked, marked, c.marked);
    if (c.command == "axioms" && c.mode.empty() && !c.replay) {
        throw Error(ErrorKind::Parse, "axioms needs --check or --replay");
    }
    if (c.samples == 0 || c.trials == 0 || c.runs == 0) {
        throw Error(ErrorKind::InvalidArgument, "--samples, --trials and --runs must be positive");
    }
    return c;
}

int execute(const RunConfig& c, std::ostream& out) {
    Output o;
    if (c.command == "theory") {
        o = cmd_theory(c);
    } else if (c.command == "history") {
        o = cmd_history(c);
    } else if (c.command == "axioms") {
        o = cmd_axioms(c);
    } else if (c.command == "demo" && c.mode == "juggle") {
        o = demo_juggle(c);
    } else if (c.command == "demo" && c.mode == "szk") {
        o = demo_szk(c);
    } else if (c.command == "demo" && c.mode == "search") {
        o = demo_search(c);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown command '" + c.command + " " + c.mode + "'");
    }
    emit(c, o, out);
    return o.code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const auto config = parse_args(args, out);
        if (!config) return 0;
        return execute(*config, out);
    } catch (const Error& e) {
        err << "hvsim: " << to_string(e.kind()) << ": " << e.what() << '\n';
    } catch (const nlohmann::json::exception& e) {
        err << "hvsim: Parse: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "hvsim: " << e.what() << '\n';
    }
    return 2;
}

}  // namespace hvsim
