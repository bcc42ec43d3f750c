import json
import math

import numpy as np
import pytest

import hvsim

R8 = np.array([[math.cos(math.pi / 8), -math.sin(math.pi / 8)], [math.sin(math.pi / 8), math.cos(math.pi / 8)]])
R4 = np.array([[1, -1], [1, 1]]) / math.sqrt(2)
PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)


def test_theory_names():
    assert hvsim.theories() == ["pt", "dt", "ft", "st"]


@pytest.mark.parametrize("theory", ["pt", "dt", "ft", "st"])
def test_plus_through_quarter_rotation(theory):
    res = hvsim.stochastic(theory, PLUS, R4)
    np.testing.assert_allclose(res["S"], [[0, 0], [1, 1]], atol=1e-10)
    p = res["P"]
    np.testing.assert_allclose(p.sum(axis=0), [0.5, 0.5], atol=1e-10)


def test_schrodinger_fixed_point():
    p = hvsim.joint("st", np.eye(2) / 2, R8)
    assert p[0, 0] == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-9)


def test_flow_and_sinkhorn():
    value, flow, cut = hvsim.max_flow(np.array([0.5, 0.5]), np.array([0.0, 1.0]), R4)
    assert value == pytest.approx(1.0)
    assert cut == pytest.approx(value)
    lex = hvsim.lex_max_flow(np.array([0.5, 0.5]), np.array([0.0, 1.0]), R4)
    np.testing.assert_allclose(lex, [[0, 0], [0.5, 0.5]], atol=1e-10)
    p, iterations, residual = hvsim.sinkhorn(np.abs(R8), np.full(2, 0.5), np.full(2, 0.5))
    assert residual <= 1e-10
    assert p[1, 1] == pytest.approx(1 / (2 * math.sqrt(2)))


def test_histories_are_seeded():
    circuit = {"qubits": 1, "steps": [{"gates": [{"op": "h", "q": 0}]}]}
    a = hvsim.sample_histories(circuit, "ft", 2000, 5)
    assert a == hvsim.sample_histories(json.dumps(circuit), "ft", 2000, 5)
    ones = sum(h[1] for h in a) / len(a)
    assert abs(ones - 0.5) < 0.05
    born = hvsim.born_probabilities(circuit)
    np.testing.assert_allclose(born[1], [0.5, 0.5])


def test_nogo_and_axioms():
    p_ab, p_ba = hvsim.nogo_witness("ft")
    assert min(p_ab, p_ba) <= 0.0732234 and max(p_ab, p_ba) >= 0.1767766
    ih = np.kron(np.eye(2), np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    report = hvsim.check_indifference("pt", ih, np.eye(4) / 4)
    assert report["pass"] is False and report["worst_violation"] >= 1 / 16
    assert hvsim.check_indifference("ft", ih, np.eye(4) / 4)["pass"] is True
    with pytest.raises(hvsim.Error):
        hvsim.nogo_witness("pt")


def test_algorithms():
    out = hvsim.run_juggle(3, 1, 6, "ft", seed=4)
    assert out["success"] and out["recovered"] == [1, 6]
    g0, g1 = hvsim.graph_sampler(4), hvsim.graph_sampler(1)
    assert hvsim.variation_distance(3, 3, g0, g1) == pytest.approx(0.25)
    r = hvsim.statistical_difference(3, 3, g0, g0, "ft", runs=2, seed=1)
    assert r["verdict"] == "close"
    s = hvsim.search(6, 37, "ft", seed=3)
    assert s["queries"] == s["grover_queries"] + s["probes"]


def test_cli_entry():
    code, out, err = hvsim.run_cli(["axioms", "--check", "nogo", "--theory", "st"])
    assert code == 0, err
    assert json.loads(out)["pass"] is True
    code, _, err = hvsim.run_cli(["theory", "--id", "nope"])
    assert code == 2 and "hvsim:" in err
