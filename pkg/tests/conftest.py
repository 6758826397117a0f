import itertools
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from revdft import fixtures
from revdft.circuit import Circuit, Control, Gate, GateKind
from revdft.faults import (BitFlip, Bridging, CrossPointAppearance, CrossPointDisappearance, MissingGate,
                           StuckAt)

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


# ---------------------------------------------------------------- oracles
# Deliberately naive: bit lists, no packing, no shared code with the kernels.

def naive_gate(gate, bits):
    bits = list(bits)
    for c in gate.controls:
        if bits[c.line] != (1 if c.positive else 0):
            return bits
    if gate.kind is GateKind.MCT:
        t = gate.targets[0]
        bits[t] = 1 - bits[t]
    else:
        a, b = gate.targets
        bits[a], bits[b] = bits[b], bits[a]
    return bits


def naive_run(circuit, bits):
    bits = list(bits)
    for gate in circuit.gates:
        bits = naive_gate(gate, bits)
    return tuple(bits)


def naive_run_faulty(circuit, bits, faults):
    """Segment-by-segment reference for every fault model."""
    bits = list(bits)
    stuck = {}

    def segment_faults(seg):
        nonlocal bits
        for f in faults:
            if isinstance(f, BitFlip) and f.segment == seg:
                bits[f.line] ^= 1
        for line, val in stuck.items():
            bits[line] = val
        for f in faults:
            if isinstance(f, Bridging) and f.segment == seg:
                a, b = bits[f.line_a], bits[f.line_b]
                v = (a and b) if f.mode == "and" else (a or b)
                bits[f.line_a] = bits[f.line_b] = int(v)
                for line, val in stuck.items():
                    bits[line] = val
        for f in faults:
            if isinstance(f, StuckAt) and f.segment == seg:
                stuck[f.line] = f.value
                bits[f.line] = f.value
        for line, val in stuck.items():
            bits[line] = val

    segment_faults(0)
    for level, gate in enumerate(circuit.gates, start=1):
        if not any(isinstance(f, MissingGate) and f.level == level for f in faults):
            ctl = [c for c in gate.controls
                   if not any(isinstance(f, CrossPointDisappearance) and f.level == level and f.line == c.line
                              for f in faults)]
            ctl += [Control(f.line, f.positive) for f in faults
                    if isinstance(f, CrossPointAppearance) and f.level == level]
            bits = naive_gate(Gate(gate.kind, tuple(ctl), gate.targets), bits)
        for line, val in stuck.items():
            bits[line] = val
        segment_faults(level)
    return tuple(bits)


def all_inputs(n):
    return list(itertools.product((0, 1), repeat=n))


def bits_of(x, n):
    return tuple((x >> i) & 1 for i in range(n))


def legal_inputs(circuit):
    """Every input vector with constant lines held at their declared bits."""
    free = [i for i in range(circuit.n) if i not in circuit.constants]
    out = []
    for x in range(1 << len(free)):
        v = [0] * circuit.n
        for line, bit in circuit.constants.items():
            v[line] = bit
        for j, line in enumerate(free):
            v[line] = (x >> j) & 1
        out.append(tuple(v))
    return out


def gap_sites(online):
    """(line, segment) sites between an MCT gate and its parity companion, on the gate's control lines."""
    p = online.parity_line
    if p is None:
        return set()
    sites = set()
    gates = online.circuit.gates
    for level in range(1, len(gates)):
        gate, nxt = gates[level - 1], gates[level]
        if (gate.kind is GateKind.MCT and nxt.kind is GateKind.MCT and nxt.targets == (p,)
                and gate.targets != (p,) and nxt.controls == gate.controls):
            sites |= {(line, level) for line in gate.control_lines}
    return sites


# ---------------------------------------------------------------- generators

def random_gate(rng, n, kind, neg_prob=0.3):
    k = 1 if kind is GateKind.MCT else 2
    lines = list(range(n))
    rng.shuffle(lines)
    targets = lines[:k]
    rest = lines[k:]
    ctl = [Control(l, rng.random() >= neg_prob) for l in rest[:rng.randint(0, len(rest))]]
    return Gate(kind, tuple(ctl), tuple(targets))


def random_circuit(rng, n, g, kinds=(GateKind.MCT, GateKind.MCF), neg_prob=0.3):
    kinds = [k for k in kinds if k is GateKind.MCT or n >= 2]
    gates = [random_gate(rng, n, rng.choice(kinds), neg_prob) for _ in range(g)]
    return Circuit(tuple(f"x{i}" for i in range(n)), tuple(gates))


@st.composite
def circuits(draw, min_n=1, max_n=6, max_g=8, kinds=(GateKind.MCT, GateKind.MCF)):
    n = draw(st.integers(min_n, max_n))
    g = draw(st.integers(0, max_g))
    seed = draw(st.integers(0, 2**32 - 1))
    if n < 2:
        kinds = (GateKind.MCT,)
    return random_circuit(random.Random(seed), n, g, kinds)


@pytest.fixture(scope="session")
def all_fixtures():
    return fixtures.load_all()


@pytest.fixture(scope="session")
def mct_fixtures(all_fixtures):
    return {k: c for k, c in all_fixtures.items() if c.is_mct()}


@pytest.fixture(scope="session")
def mcf_fixtures(all_fixtures):
    return {k: c for k, c in all_fixtures.items() if c.is_mcf()}


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
