#include "hvsim/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hvsim {

namespace {

template <typename M>
Json dense_to_json(const M& m, bool with_imag) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const Complex z(m(r, c));
            re.push_back(z.real());
            if (with_imag) im.push_back(z.imag());
        }
    }
    Json out = {{"dim", m.rows()}, {"re", std::move(re)}};
    if (with_imag) out["im"] = std::move(im);
    return out;
}

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorKind::Parse, what); }

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) schema_error(where + ": missing \"" + key + "\"");
    return j.at(key);
}

std::vector<Complex> read_entries(const Json& j, std::size_t& dim) {
    const auto& d = field(j, "dim", "matrix");
    if (!d.is_number_integer() || d.get<long long>() <= 0) schema_error("matrix: \"dim\" must be a positive integer");
    dim = d.get<std::size_t>();
    const auto& re = field(j, "re", "matrix");
    if (!re.is_array()) schema_error("matrix: \"re\" must be an array");
    std::vector<Complex> out(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) {
        if (!re[k].is_number()) schema_error("matrix: \"re\"[" + std::to_string(k) + "] is not a number");
        out[k] = re[k].get<double>();
    }
    if (j.contains("im")) {
        const auto& im = j.at("im");
        if (!im.is_array() || im.size() != re.size()) schema_error("matrix: \"im\" must match \"re\" in length");
        for (std::size_t k = 0; k < im.size(); ++k) {
            if (!im[k].is_number()) schema_error("matrix: \"im\"[" + std::to_string(k) + "] is not a number");
            out[k] += Complex(0.0, im[k].get<double>());
        }
    }
    return out;
}

std::vector<int> int_list(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return {j.get<int>()};
    if (!j.is_array()) schema_error(where + " must be an integer or a list of integers");
    std::vector<int> out;
    for (const auto& x : j) {
        if (!x.is_number_integer()) schema_error(where + " must contain integers");
        out.push_back(x.get<int>());
    }
    return out;
}

std::vector<std::uint64_t> table_list(const Json& j) {
    const Json& arr = j.is_object() ? field(j, "table", "truth table") : j;
    if (!arr.is_array()) schema_error("gate table must be an array");
    std::vector<std::uint64_t> out;
    for (const auto& x : arr) {
        if (x.is_boolean()) {
            out.push_back(x.get<bool>() ? 1 : 0);
        } else if (x.is_number_unsigned() || (x.is_number_integer() && x.get<long long>() >= 0)) {
            out.push_back(x.get<std::uint64_t>());
        } else {
            schema_error("gate table entries must be nonnegative integers");
        }
    }
    return out;
}

std::string position_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Json to_json(const CMatrix& m) { return dense_to_json(m, true); }
Json to_json(const RMatrix& m) { return dense_to_json(m, false); }

Json to_json(const CVector& v) {
    Json out = dense_to_json(CMatrix(v.transpose()), true);
    out["dim"] = v.size();
    return out;
}

Json to_json(const RVector& v) {
    Json out = dense_to_json(RMatrix(v.transpose()), false);
    out["dim"] = v.size();
    return out;
}

CMatrix matrix_from_json(const Json& j) {
    std::size_t dim = 0;
    const auto entries = read_entries(j, dim);
    if (entries.size() != dim * dim) schema_error("matrix: expected " + std::to_string(dim * dim) + " entries");
    const auto n = static_cast<Eigen::Index>(dim);
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = entries[static_cast<std::size_t>(r * n + c)];
    }
    return m;
}

CVector vector_from_json(const Json& j) {
    std::size_t dim = 0;
    const auto entries = read_entries(j, dim);
    if (entries.size() != dim) schema_error("vector: expected " + std::to_string(dim) + " entries");
    CVector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) v(static_cast<Eigen::Index>(k)) = entries[k];
    return v;
}

RVector real_vector_from_json(const Json& j) { return vector_from_json(j).real(); }

DensityOperator state_from_json(const Json& j) {
    std::size_t dim = 0;
    const auto entries = read_entries(j, dim);
    if (entries.size() == dim && dim > 1) {
        return DensityOperator::from_pure(PureState(vector_from_json(j)));
    }
    if (entries.size() == dim * dim) return DensityOperator(matrix_from_json(j));
    schema_error("state: expected " + std::to_string(dim) + " or " + std::to_string(dim * dim) + " entries");
}

Json to_json(const Gate& g) {
    switch (g.kind) {
        case GateKind::Hadamard: return {{"op", "h"}, {"q", g.targets.at(0)}};
        case GateKind::Rotation: return {{"op", "r"}, {"q", g.targets.at(0)}, {"theta", g.angle}};
        case GateKind::Not:
            if (g.controls.empty()) return {{"op", "x"}, {"q", g.targets.at(0)}};
            if (g.controls.size() == 1) return {{"op", "cnot"}, {"c", g.controls[0]}, {"t", g.targets.at(0)}};
            return {{"op", "toffoli"}, {"c", g.controls}, {"t", g.targets.at(0)}};
        case GateKind::PhaseFlip: {
            Json out = {{"op", "phase"}, {"qubits", g.inputs}, {"table", g.table}};
            if (g.query) out["query"] = true;
            return out;
        }
        case GateKind::Oracle: {
            Json out = {{"op", "oracle"}, {"inputs", g.inputs}, {"answer", g.targets}, {"table", g.table}};
            if (!g.query) out["query"] = false;
            return out;
        }
    }
    return {};
}

Gate gate_from_json(const Json& j) {
    if (!j.is_object()) schema_error("gate must be an object");
    const auto op = field(j, "op", "gate").get<std::string>();
    auto qubit = [&](const char* key) {
        const auto& v = field(j, key, "gate \"" + op + "\"");
        if (!v.is_number_integer()) schema_error("gate \"" + op + "\": \"" + key + "\" must be an integer");
        return v.get<int>();
    };
    if (op == "h") return Gate::hadamard(qubit("q"));
    if (op == "r") return Gate::rotation(qubit("q"), field(j, "theta", "gate \"r\"").get<double>());
    if (op == "x") return Gate::x(qubit("q"));
    if (op == "cnot") return Gate::cnot(qubit("c"), qubit("t"));
    if (op == "toffoli") {
        const auto c = int_list(field(j, "c", "gate \"toffoli\""), "toffoli controls");
        if (c.size() != 2) schema_error("toffoli needs two controls");
        return Gate::toffoli(c[0], c[1], qubit("t"));
    }
    if (op == "phase") {
        return Gate::phase_flip(int_list(field(j, "qubits", "gate \"phase\""), "phase qubits"),
                                table_list(field(j, "table", "gate \"phase\"")), j.value("query", false));
    }
    if (op == "oracle") {
        return Gate::oracle(table_list(field(j, "table", "gate \"oracle\"")),
                            int_list(field(j, "inputs", "gate \"oracle\""), "oracle inputs"),
                            int_list(field(j, "answer", "gate \"oracle\""), "oracle answer"), j.value("query", true));
    }
    schema_error("unknown gate op \"" + op + "\"");
}

Json to_json(const CircuitSequence& c) {
    Json steps = Json::array();
    for (const auto& s : c.steps) {
        if (s.matrix) {
            steps.push_back({{"matrix", to_json(*s.matrix)}});
        } else {
            Json gates = Json::array();
            for (const auto& g : s.gates) gates.push_back(to_json(g));
            steps.push_back({{"gates", std::move(gates)}});
        }
    }
    return {{"qubits", c.qubits}, {"steps", std::move(steps)}};
}

CircuitSequence circuit_from_json(const Json& j) {
    CircuitSequence c;
    const auto& q = field(j, "qubits", "circuit");
    if (!q.is_number_integer()) schema_error("circuit: \"qubits\" must be an integer");
    c.qubits = q.get<int>();
    const auto& steps = field(j, "steps", "circuit");
    if (!steps.is_array()) schema_error("circuit: \"steps\" must be an array");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& s = steps[k];
        try {
            if (s.contains("matrix")) {
                c.steps.push_back(UnitaryStep::from_matrix(matrix_from_json(s.at("matrix"))));
            } else {
                std::vector<Gate> gates;
                for (const auto& g : field(s, "gates", "step")) gates.push_back(gate_from_json(g));
                c.steps.push_back(UnitaryStep::from_gates(std::move(gates)));
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "step " + std::to_string(k) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            schema_error("step " + std::to_string(k) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

Json flow_dump(const FlowNetwork& net, const RMatrix& flow) {
    auto nested = [](const RMatrix& m) {
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < m.cols(); ++i) {
            Json row = Json::array();
            for (Eigen::Index j = 0; j < m.rows(); ++j) row.push_back(m(j, i));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    Json cap_s = Json::array(), cap_t = Json::array();
    for (Eigen::Index i = 0; i < net.source_caps.size(); ++i) cap_s.push_back(net.source_caps(i));
    for (Eigen::Index j = 0; j < net.sink_caps.size(); ++j) cap_t.push_back(net.sink_caps(j));
    return {{"cap_s", cap_s}, {"cap_mid", nested(net.middle_caps)}, {"cap_t", cap_t}, {"flow", nested(flow)}};
}

Json histories_to_json(const std::vector<History>& samples, std::uint64_t seed) {
    Json arr = Json::array();
    for (const auto& h : samples) arr.push_back(h);
    const std::size_t t = samples.empty() ? 0 : samples.front().size() - 1;
    return {{"T", t}, {"samples", std::move(arr)}, {"seed", seed}};
}

Json to_json(const TruthTable& t) { return {{"n", t.n}, {"m", t.m}, {"table", t.table}}; }

TruthTable truth_table_from_json(const Json& j) {
    const auto& n = field(j, "n", "truth table");
    if (!n.is_number_integer()) schema_error("truth table: \"n\" must be an integer");
    auto table = table_list(j);
    int m = 1;
    if (j.contains("m")) {
        if (!j.at("m").is_number_integer()) schema_error("truth table: \"m\" must be an integer");
        m = j.at("m").get<int>();
    } else {
        for (auto y : table) m = std::max(m, static_cast<int>(std::bit_width(y)));
    }
    try {
        return TruthTable(n.get<int>(), m, std::move(table));
    } catch (const Error& e) {
        schema_error(std::string("truth table: ") + e.what());
    }
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, origin + ": " + position_of(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, path.string() + ": cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_json_text(buffer.str(), path.string());
}

}  // namespace hvsim
