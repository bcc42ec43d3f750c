#include "hvsim/axioms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace hvsim {

namespace {

struct Evaluation {
    double worst = 0.0;
    Json detail = Json::object();
};

double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

DensityOperator evolve(const DensityOperator& rho, const CMatrix& u) {
    CMatrix next = u * rho.matrix() * u.adjoint();
    next = 0.5 * (next + next.adjoint());
    return DensityOperator(std::move(next));
}

Evaluation eval_indifference(const Json& w) {
    const auto theory = parse_theory(w.at("theory").get<std::string>());
    const CMatrix u = matrix_from_json(w.at("u"));
    const DensityOperator rho = state_from_json(w.at("rho"));
    const RMatrix p = joint(theory, rho, u);
    const auto labels = detect_blocks(u, kRawBlockTol).labels(static_cast<std::size_t>(u.rows()));
    Evaluation out;
    Json worst_entry = nullptr;
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
        for (Eigen::Index j = 0; j < p.rows(); ++j) {
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
            if (std::abs(p(j, i)) > out.worst) {
                out.worst = std::abs(p(j, i));
                worst_entry = {{"initial", i}, {"final", j}, {"value", p(j, i)}};
            }
        }
    }
    out.detail["offending"] = worst_entry;
    out.detail["blocks"] = detect_blocks(u, kRawBlockTol).blocks;
    return out;
}

Evaluation eval_commutativity(const Json& w) {
    const auto theory = parse_theory(w.at("theory").get<std::string>());
    const DensityOperator rho = state_from_json(w.at("rho"));
    const CMatrix ua = matrix_from_json(w.at("u_a"));
    const CMatrix ub = matrix_from_json(w.at("u_b"));
    const RMatrix ab = stochastic(theory, evolve(rho, ua), ub).s * stochastic(theory, rho, ua).s;
    const RMatrix ba = stochastic(theory, evolve(rho, ub), ua).s * stochastic(theory, rho, ub).s;
    Evaluation out;
    out.worst = max_abs(ab - ba);
    out.detail["s_ab"] = to_json(ab);
    out.detail["s_ba"] = to_json(ba);
    return out;
}

NogoResult nogo_probabilities(TheoryId theory) {
    CVector bell = CVector::Zero(4);
    bell(0) = bell(3) = kInvSqrt2;
    const auto rho = DensityOperator::from_pure(PureState(bell));
    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix ua = kron(rotation_matrix(std::numbers::pi / 8), id);
    const CMatrix ub = kron(id, rotation_matrix(-std::numbers::pi / 8));
    const double start = born(rho)(0);
    auto event = [&](const CMatrix& first, const CMatrix& second) {
        const RMatrix s = stochastic(theory, evolve(rho, first), second).s * stochastic(theory, rho, first).s;
        return start * s(2, 0);
    };
    return {event(ua, ub), event(ub, ua)};
}

Evaluation eval_nogo(const Json& w) {
    const auto theory = parse_theory(w.at("theory").get<std::string>());
    const auto r = nogo_probabilities(theory);
    Evaluation out;
    const double lo = std::min(r.p_ab, r.p_ba), hi = std::max(r.p_ab, r.p_ba);
    out.worst = std::max({0.0, lo - kNogoLow, kNogoHigh - hi});
    out.detail = {{"p_ab", r.p_ab}, {"p_ba", r.p_ba}, {"low_bound", kNogoLow}, {"high_bound", kNogoHigh}};
    return out;
}

Evaluation eval_decomposition(const Json& w) {
    const auto theory = parse_theory(w.at("theory").get<std::string>());
    const DensityOperator rho = state_from_json(w.at("rho"));
    const CMatrix u = matrix_from_json(w.at("u"));
    const bool joint_level = w.at("level").get<std::string>() == "joint";
    auto matrix_of = [&](const DensityOperator& r) {
        return joint_level ? joint(theory, r, u) : stochastic(theory, r, u).s;
    };
    const RMatrix whole = matrix_of(rho);
    RMatrix mix = RMatrix::Zero(whole.rows(), whole.cols());
    const auto& weights = w.at("weights");
    const auto& states = w.at("states");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        mix += weights[k].get<double>() * matrix_of(DensityOperator::from_pure(PureState(vector_from_json(states[k]))));
    }
    Evaluation out;
    out.worst = max_abs(whole - mix);
    out.detail["whole"] = to_json(whole);
    out.detail["mixture"] = to_json(mix);
    return out;
}

Evaluation eval_robustness(const Json& w) {
    const auto theory = parse_theory(w.at("theory").get<std::string>());
    const DensityOperator rho = state_from_json(w.at("rho"));
    const CMatrix u = matrix_from_json(w.at("u"));
    const double delta = w.at("delta").get<double>();
    const auto trials = w.at("trials").get<std::size_t>();
    const auto seed = w.at("seed").get<std::uint64_t>();
    const RMatrix base = joint(theory, rho, u);
    Evaluation out;
    std::size_t worst_trial = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = derive_rng(seed, t);
        const auto [rho2, u2] = perturb(rho, u, delta, rng);
        const double change = max_abs(joint(theory, rho2, u2) - base);
        if (change > out.worst) {
            out.worst = change;
            worst_trial = t;
        }
    }
    out.detail["worst_trial"] = worst_trial;
    return out;
}

Evaluation evaluate(const std::string& axiom, const Json& witness) {
    if (axiom == "indifference") return eval_indifference(witness);
    if (axiom == "commutativity") return eval_commutativity(witness);
    if (axiom == "nogo") return eval_nogo(witness);
    if (axiom == "decomposition") return eval_decomposition(witness);
    if (axiom == "robustness") return eval_robustness(witness);
    throw Error(ErrorKind::InvalidArgument, "unknown axiom '" + axiom + "'");
}

AxiomReport finish(std::string axiom, TheoryId theory, Json witness, double threshold) {
    AxiomReport r;
    r.axiom = std::move(axiom);
    r.theory = theory;
    r.threshold = threshold;
    const auto e = evaluate(r.axiom, witness);
    r.worst_violation = e.worst;
    r.pass = e.worst <= threshold;
    witness["result"] = e.detail;
    r.witness = std::move(witness);
    return r;
}

Json state_json(const DensityOperator& rho) { return to_json(rho.matrix()); }

}  // namespace

Json AxiomReport::to_json() const {
    return {{"axiom", axiom},         {"theory", std::string(hvsim::to_string(theory))},
            {"pass", pass},           {"worst_violation", worst_violation},
            {"threshold", threshold}, {"witness", witness}};
}

AxiomReport AxiomReport::from_json(const Json& j) {
    AxiomReport r;
    r.axiom = j.at("axiom").get<std::string>();
    r.theory = parse_theory(j.at("theory").get<std::string>());
    r.pass = j.at("pass").get<bool>();
    r.worst_violation = j.at("worst_violation").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.witness = j.at("witness");
    return r;
}

AxiomReport check_indifference(TheoryId theory, const CMatrix& u, const DensityOperator& rho, double tol) {
    require_unitary(u);
    Json w = {{"theory", std::string(to_string(theory))}, {"u", to_json(u)}, {"rho", state_json(rho)}};
    return finish("indifference", theory, std::move(w), tol);
}

std::vector<int> acted_qubits(const CMatrix& u, double tol) {
    const auto n = static_cast<std::size_t>(u.rows());
    if (u.rows() != u.cols() || n == 0 || (n & (n - 1)) != 0) {
        throw Error(ErrorKind::DimMismatch, "qubit analysis needs a square matrix of power-of-two size");
    }
    const int qubits = std::countr_zero(n);
    std::vector<int> out;
    for (int q = 0; q < qubits; ++q) {
        const BasisIndex m = qubit_mask(q, qubits);
        bool trivial = true;
        for (Eigen::Index c = 0; c < u.cols() && trivial; ++c) {
            for (Eigen::Index r = 0; r < u.rows() && trivial; ++r) {
                const auto rr = static_cast<BasisIndex>(r), cc = static_cast<BasisIndex>(c);
                if ((rr ^ cc) & m) {
                    trivial = std::abs(u(r, c)) <= tol;
                } else if (!(rr & m)) {
                    trivial = std::abs(u(r, c) - u(static_cast<Eigen::Index>(rr | m), static_cast<Eigen::Index>(cc | m))) <= tol;
                }
            }
        }
        if (!trivial) out.push_back(q);
    }
    return out;
}

AxiomReport check_commutativity(TheoryId theory, const DensityOperator& rho, const CMatrix& u_a,
                                const CMatrix& u_b, double tol) {
    require_unitary(u_a);
    require_unitary(u_b);
    if (u_a.rows() != u_b.rows() || u_a.rows() != static_cast<Eigen::Index>(rho.dim())) {
        throw Error(ErrorKind::DimMismatch, "state and unitaries differ in dimension");
    }
    const auto qa = acted_qubits(u_a), qb = acted_qubits(u_b);
    for (int q : qa) {
        if (std::find(qb.begin(), qb.end(), q) != qb.end()) {
            throw Error(ErrorKind::NotSpacelike, "both unitaries act on qubit " + std::to_string(q));
        }
    }
    Json w = {{"theory", std::string(to_string(theory))},
              {"rho", state_json(rho)},
              {"u_a", to_json(u_a)},
              {"u_b", to_json(u_b)}};
    return finish("commutativity", theory, std::move(w), tol);
}

NogoResult nogo_witness(TheoryId theory) {
    if (!is_indifferent(theory)) {
        throw Error(ErrorKind::IndifferenceRequired, "the product theory is not indifferent");
    }
    return nogo_probabilities(theory);
}

AxiomReport check_nogo(TheoryId theory, double tol) {
    if (!is_indifferent(theory)) {
        throw Error(ErrorKind::IndifferenceRequired, "the product theory is not indifferent");
    }
    return finish("nogo", theory, {{"theory", std::string(to_string(theory))}}, tol);
}

AxiomReport check_decomposition_invariance(TheoryId theory, const DensityOperator& rho,
                                           const Decomposition& ensemble, const CMatrix& u, double tol,
                                           DecompositionLevel level) {
    require_unitary(u);
    CMatrix sum = CMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    Json weights = Json::array(), states = Json::array();
    for (const auto& [w, psi] : ensemble) {
        if (w < 0) throw Error(ErrorKind::BadDecomposition, "negative weight");
        if (psi.dim() != rho.dim()) throw Error(ErrorKind::BadDecomposition, "ensemble state has the wrong dimension");
        sum += w * psi.amplitudes() * psi.amplitudes().adjoint();
        weights.push_back(w);
        states.push_back(to_json(psi.amplitudes()));
    }
    if ((sum - rho.matrix()).cwiseAbs().maxCoeff() > kNormTol) {
        throw Error(ErrorKind::BadDecomposition, "ensemble does not average to the state");
    }
    Json w = {{"theory", std::string(to_string(theory))},
              {"rho", state_json(rho)},
              {"u", to_json(u)},
              {"weights", weights},
              {"states", states},
              {"level", level == DecompositionLevel::Joint ? "joint" : "stochastic"}};
    return finish("decomposition", theory, std::move(w), tol);
}

std::pair<DensityOperator, CMatrix> perturb(const DensityOperator& rho, const CMatrix& u, double delta, Rng& rng) {
    const double half = delta * kInvSqrt2;
    std::uniform_real_distribution<double> noise(-half, half);
    auto random_matrix = [&](Eigen::Index n) {
        CMatrix e(n, n);
        for (Eigen::Index c = 0; c < n; ++c) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const double re = noise(rng);
                e(r, c) = Complex(re, noise(rng));
            }
        }
        return e;
    };
    const CMatrix e = random_matrix(rho.matrix().rows());
    DensityOperator rho2 = nearest_density(rho.matrix() + 0.5 * (e + e.adjoint()));
    CMatrix u2 = nearest_unitary(u + random_matrix(u.rows()));
    return {std::move(rho2), std::move(u2)};
}

AxiomReport check_robustness(TheoryId theory, const DensityOperator& rho, const CMatrix& u, double delta,
                             std::size_t trials, std::uint64_t seed, double threshold) {
    if (!(delta > 0)) throw Error(ErrorKind::InvalidArgument, "perturbation size must be positive");
    require_unitary(u);
    Json w = {{"theory", std::string(to_string(theory))},
              {"rho", state_json(rho)},
              {"u", to_json(u)},
              {"delta", delta},
              {"trials", trials},
              {"seed", seed}};
    return finish("robustness", theory, std::move(w), threshold);
}

double replay(const AxiomReport& report) { return evaluate(report.axiom, report.witness).worst; }

}  // namespace hvsim
