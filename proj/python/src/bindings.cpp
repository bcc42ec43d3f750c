#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hvsim/axioms.hpp"
#include "hvsim/cli.hpp"
#include "hvsim/dqp.hpp"
#include "hvsim/flow.hpp"
#include "hvsim/history.hpp"
#include "hvsim/io.hpp"
#include "hvsim/scaling.hpp"
#include "hvsim/theories.hpp"

namespace py = pybind11;
using namespace hvsim;

namespace {

// A 1-D array is a pure state, a 2-D array a density matrix.
DensityOperator to_state(const py::array& a) {
    if (a.ndim() == 1) return DensityOperator::from_pure(PureState(a.cast<CVector>()));
    return DensityOperator(a.cast<CMatrix>());
}

// Reports cross the boundary as JSON text and come back as Python dicts.
py::object to_python(const Json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

CircuitSequence to_circuit(const py::object& c) {
    const std::string text = py::isinstance<py::str>(c) ? c.cast<std::string>()
                                                        : py::module_::import("json").attr("dumps")(c).cast<std::string>();
    return circuit_from_json(parse_json_text(text, "<circuit>"));
}

py::dict stochastic_dict(const StochasticResult& r) {
    py::dict d;
    d["S"] = r.s;
    d["P"] = r.p;
    d["limit_columns"] = r.limit_columns;
    py::list flags;
    for (const auto& f : r.flags) flags.append(py::dict(py::arg("column") = f.column, py::arg("change") = f.change));
    d["epsilon_flags"] = flags;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hidden-variable theories on quantum circuits";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def("theories", [] {
        std::vector<std::string> out;
        for (TheoryId id : kAllTheories) out.emplace_back(to_string(id));
        return out;
    });

    m.def(
        "joint",
        [](const std::string& theory, const py::array& state, const CMatrix& u) {
            return joint(parse_theory(theory), to_state(state), u);
        },
        py::arg("theory"), py::arg("state"), py::arg("u"));
    m.def(
        "stochastic",
        [](const std::string& theory, const py::array& state, const CMatrix& u) {
            return stochastic_dict(stochastic(parse_theory(theory), to_state(state), u));
        },
        py::arg("theory"), py::arg("state"), py::arg("u"));

    m.def(
        "max_flow",
        [](const RVector& initial, const RVector& final_probs, const CMatrix& u) {
            auto r = max_flow(build_network(initial, final_probs, u));
            return py::make_tuple(r.value, r.flow, r.cut.value);
        },
        py::arg("initial"), py::arg("final"), py::arg("u"), "Returns (value, flow, cut value).");
    m.def(
        "lex_max_flow",
        [](const RVector& initial, const RVector& final_probs, const CMatrix& u) {
            return lex_max_flow(build_network(initial, final_probs, u));
        },
        py::arg("initial"), py::arg("final"), py::arg("u"));
    m.def(
        "sinkhorn",
        [](const RMatrix& base, const RVector& col, const RVector& row, double tol, std::size_t max_iter) {
            auto r = sinkhorn(ScalingProblem{base, col, row}, ScalingOptions{tol, max_iter});
            return py::make_tuple(r.p, r.iterations, r.residual);
        },
        py::arg("base"), py::arg("col_targets"), py::arg("row_targets"), py::arg("tol") = 1e-10,
        py::arg("max_iter") = 100000, "Returns (P, iterations, residual).");

    m.def(
        "sample_histories",
        [](const py::object& circuit, const std::string& theory, std::size_t count, std::uint64_t seed) {
            return sample(chain(to_circuit(circuit), parse_theory(theory)), count, seed);
        },
        py::arg("circuit"), py::arg("theory"), py::arg("count"), py::arg("seed"),
        "circuit is a dict or JSON string in the circuit schema.");
    m.def(
        "born_probabilities",
        [](const py::object& circuit, const std::string& theory) {
            auto d = chain(to_circuit(circuit), parse_theory(theory));
            std::vector<RVector> out;
            for (std::size_t t = 0; t <= d.length(); ++t) out.push_back(d.born(t));
            return out;
        },
        py::arg("circuit"), py::arg("theory") = "ft");

    m.def("nogo_witness", [](const std::string& theory) {
        auto w = nogo_witness(parse_theory(theory));
        return py::make_tuple(w.p_ab, w.p_ba);
    });
    m.def(
        "check_indifference",
        [](const std::string& theory, const CMatrix& u, const py::array& state) {
            return to_python(check_indifference(parse_theory(theory), u, to_state(state)).to_json());
        },
        py::arg("theory"), py::arg("u"), py::arg("state"));
    m.def(
        "check_robustness",
        [](const std::string& theory, const py::array& state, const CMatrix& u, double delta, std::size_t trials,
           std::uint64_t seed) {
            return to_python(check_robustness(parse_theory(theory), to_state(state), u, delta, trials, seed).to_json());
        },
        py::arg("theory"), py::arg("state"), py::arg("u"), py::arg("delta"), py::arg("trials"), py::arg("seed"));

    m.def(
        "run_juggle",
        [](int qubits, BasisIndex a, BasisIndex b, const std::string& theory, std::uint64_t seed, std::size_t attempts,
           bool minus) {
            auto o = run_juggle(pair_state_circuit(qubits, a, b, minus), parse_theory(theory), seed, attempts);
            py::dict d;
            d["recovered"] = o.recovered;
            d["attempts"] = o.attempts;
            d["success"] = o.success;
            d["history"] = o.history;
            return d;
        },
        py::arg("qubits"), py::arg("a"), py::arg("b"), py::arg("theory") = "ft", py::arg("seed") = 0,
        py::arg("attempts") = 0, py::arg("minus") = false);
    m.def("variation_distance",
          [](int n, int m, std::vector<std::uint64_t> p0, std::vector<std::uint64_t> p1) {
              return variation_distance(TruthTable(n, m, std::move(p0)), TruthTable(n, m, std::move(p1)));
          });
    m.def("graph_sampler", [](std::uint64_t edges) { return graph_sampler(edges).table; });
    m.def(
        "statistical_difference",
        [](int n, int m, std::vector<std::uint64_t> p0, std::vector<std::uint64_t> p1, const std::string& theory,
           std::size_t runs, std::uint64_t seed) {
            auto r = statistical_difference(TruthTable(n, m, std::move(p0)), TruthTable(n, m, std::move(p1)),
                                            parse_theory(theory), runs, seed);
            py::dict d;
            d["verdict"] = to_string(r.verdict);
            d["distance"] = r.distance;
            d["runs"] = r.runs;
            d["runs_showing_both"] = r.runs_showing_both;
            d["promise_holds"] = r.promise_holds;
            return d;
        },
        py::arg("n"), py::arg("m"), py::arg("p0"), py::arg("p1"), py::arg("theory") = "ft", py::arg("runs") = 1,
        py::arg("seed") = 0);
    m.def(
        "search",
        [](int n, std::uint64_t marked, const std::string& theory, std::uint64_t seed) {
            std::vector<std::uint64_t> table(std::size_t{1} << n, 0);
            table.at(marked) = 1;
            auto r = search(n, TruthTable(n, 1, std::move(table)), parse_theory(theory), seed);
            py::dict d;
            d["found"] = r.found;
            d["item"] = r.item;
            d["queries"] = r.queries;
            d["grover_queries"] = r.grover_queries;
            d["probes"] = r.probes;
            d["calls"] = r.calls;
            d["overlap_visits"] = r.overlap_visits;
            return d;
        },
        py::arg("n"), py::arg("marked"), py::arg("theory") = "ft", py::arg("seed") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Returns (exit code, stdout text, stderr text).");
}
