#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hvsim/core.hpp"
#include "hvsim/dqp.hpp"
#include "hvsim/flow.hpp"
#include "hvsim/history.hpp"

namespace hvsim {

using Json = nlohmann::json;

// Matrices and vectors: {"dim": N, "re": [...], "im": [...]}, row-major,
// "im" optional. A vector has N entries, a matrix N*N.
Json to_json(const CMatrix& m);
Json to_json(const RMatrix& m);
Json to_json(const CVector& v);
Json to_json(const RVector& v);
CMatrix matrix_from_json(const Json& j);
CVector vector_from_json(const Json& j);
RVector real_vector_from_json(const Json& j);
/// Accepts either a state vector or a density matrix.
DensityOperator state_from_json(const Json& j);

// Circuits: {"qubits": l, "steps": [{"gates": [...]} | {"matrix": {...}}]}
// with gates such as {"op": "h", "q": 0}, {"op": "r", "q": 0, "theta": 0.4},
// {"op": "x", "q": 0}, {"op": "cnot", "c": 0, "t": 1},
// {"op": "toffoli", "c": [0, 1], "t": 2},
// {"op": "phase", "qubits": [...], "table": [...]},
// {"op": "oracle", "inputs": [...], "answer": [...] or q, "table": [...]}.
Json to_json(const Gate& g);
Json to_json(const CircuitSequence& c);
Gate gate_from_json(const Json& j);
CircuitSequence circuit_from_json(const Json& j);

/// {"cap_s": [...], "cap_mid": [[...]], "cap_t": [...], "flow": [[...]]};
/// cap_mid and flow are indexed [input][output].
Json flow_dump(const FlowNetwork& net, const RMatrix& flow);

/// {"T": T, "samples": [[v0, ..., vT], ...], "seed": s}
Json histories_to_json(const std::vector<History>& samples, std::uint64_t seed);

/// {"n": n, "m": m, "table": [...]}; "m" defaults to the width of the
/// largest entry (at least 1).
Json to_json(const TruthTable& t);
TruthTable truth_table_from_json(const Json& j);

/// Parses a JSON file; syntax errors report line and column.
Json read_json_file(const std::filesystem::path& path);
Json parse_json_text(const std::string& text, const std::string& origin);

}  // namespace hvsim
