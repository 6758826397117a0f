import pytest
from hypothesis import given

from revdft import dpe, fixtures
from revdft.circuit import Circuit, inverse, mcf, mct, neg
from revdft.metrics import cost_delta, cost_report, mct_quantum_cost, quantum_cost_of_gate
from revdft.online import modify_mct_online

from conftest import circuits


@pytest.mark.parametrize("gate, cost", [
    (mct([], 0), 1),
    (mct([1], 0), 1),
    (mct([1, 2], 0), 5),
    (mct([1, 2, 3], 0), 13),
    (mct([1, 2, 3, 4], 0), 29),
    (mcf([], 0, 1), 3),
    (mcf([2], 0, 1), 5),
    (mcf([2, 3], 0, 1), 2 + 13),
])
def test_quantum_cost_table(gate, cost):
    assert quantum_cost_of_gate(gate) == cost


def test_negative_controls_cost_the_same():
    assert quantum_cost_of_gate(mct([neg(1), 2], 0)) == quantum_cost_of_gate(mct([1, 2], 0))
    assert quantum_cost_of_gate(mcf([neg(2)], 0, 1)) == 5


def test_mct_table_monotone():
    costs = [mct_quantum_cost(c) for c in range(12)]
    assert costs == sorted(costs)


def test_empty_report():
    r = cost_report(Circuit(("a", "b", "c")))
    assert r.to_json() == {"wires": 3, "gate_cost": 0, "quantum_cost": 0, "constant_inputs": 0,
                           "garbage_outputs": 0}


def test_single_toffoli_report():
    r = cost_report(fixtures.load("toffoli3"))
    assert r.garbage_outputs == 2
    assert r.quantum_cost == 5


def test_full_adder_report():
    r = cost_report(dpe.build_full_adder())
    assert (r.wires, r.gate_cost, r.quantum_cost) == (4, 4, 12)
    assert r.constant_inputs == 1
    assert r.garbage_outputs == 2


@pytest.mark.parametrize("name", fixtures.names())
def test_report_invariants(name):
    c = fixtures.load(name)
    r = cost_report(c)
    assert r.garbage_outputs == r.wires - len(c.outputs)
    assert r.constant_inputs == r.wires - len(c.inputs)
    assert r.gate_cost == c.g
    assert cost_report(inverse(c)) == r


def test_self_delta_is_zero():
    c = fixtures.load("mct6")
    d = cost_delta(c, c)
    base = cost_report(c).to_json()
    for metric, change in d.to_json().items():
        assert change["absolute"] == 0
        assert change["percent"] == (0 if base[metric] else "n/a")


def test_online_delta_on_three_gate_circuit():
    c = Circuit(("a", "b", "c"), (mct([0], 1), mct([0, 1], 2), mct([], 0)))
    d = cost_delta(c, modify_mct_online(c).circuit).to_json()
    # companions double the gates; the checker adds 2(n+1) CNOTs
    assert d["gate_cost"]["absolute"] == c.g + 2 * (c.n + 1)
    assert d["gate_cost"]["percent"] == pytest.approx(100 * (2 * c.g + 2 * (c.n + 1) - c.g) / c.g)
    assert d["wires"]["absolute"] == 2
    assert d["garbage_outputs"] == {"absolute": 0, "percent": "n/a"}


@pytest.mark.parametrize("name", fixtures.names())
def test_percent_recomputable(name):
    c = fixtures.load(name)
    other = c.with_gates(c.gates + (mct([], 0),))
    base, new = cost_report(c).to_json(), cost_report(other).to_json()
    for metric, change in cost_delta(c, other).to_json().items():
        assert change["absolute"] == new[metric] - base[metric]
        if base[metric]:
            assert change["percent"] == pytest.approx(100 * change["absolute"] / base[metric])
        else:
            assert change["percent"] == "n/a"


@given(circuits(max_n=6, max_g=8), circuits(max_n=6, max_g=8))
def test_quantum_cost_additive(c1, c2):
    n = max(c1.n, c2.n)
    lines = tuple(f"x{i}" for i in range(n))
    left, right = Circuit(lines, c1.gates), Circuit(lines, c2.gates)
    both = Circuit(lines, c1.gates + c2.gates)
    assert cost_report(both).quantum_cost == cost_report(left).quantum_cost + cost_report(right).quantum_cost


@given(circuits(max_n=6, max_g=10))
def test_inverse_preserves_metrics(c):
    assert cost_report(inverse(c)) == cost_report(c)
