"""Online-testable construction: parity preservation plus a CNOT parity checker.

A circuit whose lines' XOR is invariant from input to output can be wrapped
by a checker line ``chk``: CNOTs from every other line into ``chk`` before
the cascade and again after it.  Fault-free, ``chk`` ends at 0; a single
bit flip anywhere between the two tap blocks leaves it at 1.

MCT cascades are made parity preserving by pairing each gate with a
companion gate (same controls) that targets an extra parity line.  MCF
gates swap bits and so already preserve parity.  The MCTF conversion first
rewrites controlled-swap MCT triples into single MCF gates, so only the
leftover MCT gates need companions.

Polarity of every control is carried through unchanged, which generalises
the positive-control constructions to RevLib-style negative controls.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import kernels
from .circuit import Circuit, CircuitError, Control, Gate, GateKind, mcf, mct, unpack

__all__ = [
    "NotParityPreserving", "OnlineTestableCircuit", "is_parity_preserving", "make_parity_preserving_mct",
    "make_parity_preserving_mcf", "add_parity_checker", "modify_mct_online", "modify_mcf_online",
    "match_swap_pattern", "rewrite_swap_patterns", "convert_mct_to_mctf_online", "check_conservative",
]

EXHAUSTIVE_LIMIT = 12
SAMPLE_SIZE = 4096


class NotParityPreserving(CircuitError):
    def __init__(self, witness: tuple[int, ...], output: tuple[int, ...]):
        self.witness = witness
        self.output = output
        super().__init__(f"not parity preserving: input {''.join(map(str, witness))} -> "
                         f"output {''.join(map(str, output))}")


@dataclass(frozen=True)
class OnlineTestableCircuit:
    circuit: Circuit
    check_line: int
    parity_line: int | None
    original_lines: tuple[int, ...]
    method: str
    # Segments strictly between the two checker tap blocks (inclusive bounds).
    region: tuple[int, int]

    @property
    def check_name(self) -> str:
        return self.circuit.lines[self.check_line]

    def protected_lines(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.circuit.n) if i != self.check_line)

    def region_segments(self) -> range:
        return range(self.region[0], self.region[1] + 1)


def _sample_inputs(n: int, seed: int):
    if n <= EXHAUSTIVE_LIMIT:
        return range(1 << n)
    rng = random.Random(seed)
    return [rng.getrandbits(n) for _ in range(SAMPLE_SIZE)]


def parity_witness(circuit: Circuit, lines=None, seed: int = 0):
    """First input whose parity over ``lines`` changes, or None."""
    mask = (1 << circuit.n) - 1 if lines is None else sum(1 << l for l in lines)
    inputs = list(_sample_inputs(circuit.n, seed))
    outputs = kernels.run_many(circuit, inputs)
    for x, y in zip(inputs, outputs):
        if ((x & mask).bit_count() ^ (y & mask).bit_count()) & 1:
            return x, y
    return None


def is_parity_preserving(circuit: Circuit, seed: int = 0) -> bool:
    return parity_witness(circuit, seed=seed) is None


def check_conservative(circuit: Circuit, seed: int = 0) -> None:
    """Raise unless Hamming weight is preserved (exhaustive up to 12 lines)."""
    inputs = list(_sample_inputs(circuit.n, seed))
    outputs = kernels.run_many(circuit, inputs)
    for x, y in zip(inputs, outputs):
        if x.bit_count() != y.bit_count():
            raise CircuitError(f"not conservative: input {unpack(x, circuit.n)} -> {unpack(y, circuit.n)}")


def _require(circuit: Circuit, kind: GateKind, what: str):
    for level, gate in enumerate(circuit.gates, start=1):
        if gate.kind is not kind:
            raise CircuitError(f"{what} requires only {kind.value} gates; gate {level} is {gate.kind.value}")


def _with_companions(circuit: Circuit) -> tuple[Circuit, int]:
    out, p = circuit.add_line("p", constant=0, output=True)
    gates = []
    for gate in circuit.gates:
        gates.append(gate)
        if gate.kind is GateKind.MCT:
            gates.append(Gate(GateKind.MCT, gate.controls, (p,)))
    return out.with_gates(gates), p


def make_parity_preserving_mct(circuit: Circuit) -> Circuit:
    """Insert a companion gate onto a new parity line after every MCT gate."""
    _require(circuit, GateKind.MCT, "make_parity_preserving_mct")
    return _with_companions(circuit)[0]


def make_parity_preserving_mcf(circuit: Circuit) -> Circuit:
    _require(circuit, GateKind.MCF, "make_parity_preserving_mcf")
    check_conservative(circuit)
    return circuit


def add_parity_checker(circuit: Circuit, *, method: str = "checker", parity_line: int | None = None,
                       original_lines: tuple[int, ...] | None = None, seed: int = 0) -> OnlineTestableCircuit:
    witness = parity_witness(circuit, seed=seed)
    if witness is not None:
        x, y = witness
        raise NotParityPreserving(unpack(x, circuit.n), unpack(y, circuit.n))
    out, chk = circuit.add_line("chk", constant=0, output=True)
    taps = [mct([line], chk) for line in range(circuit.n)]
    gates = taps + list(circuit.gates) + taps
    out = out.with_gates(gates).with_metadata(f"revdft: method={method} check={out.lines[chk]}"
                                             + ("" if parity_line is None else f" parity={out.lines[parity_line]}"))
    m = len(taps)
    return OnlineTestableCircuit(
        circuit=out, check_line=chk, parity_line=parity_line,
        original_lines=tuple(range(circuit.n)) if original_lines is None else original_lines,
        method=method, region=(m, m + circuit.g))


def modify_mct_online(circuit: Circuit) -> OnlineTestableCircuit:
    _require(circuit, GateKind.MCT, "modify_mct_online")
    pp, p = _with_companions(circuit)
    return add_parity_checker(pp, method="online-mct", parity_line=p, original_lines=tuple(range(circuit.n)))


def modify_mcf_online(circuit: Circuit) -> OnlineTestableCircuit:
    pp = make_parity_preserving_mcf(circuit)
    return add_parity_checker(pp, method="online-mcf", original_lines=tuple(range(circuit.n)))


def match_swap_pattern(g1: Gate, g2: Gate, g3: Gate) -> Gate | None:
    """MCF equivalent of a controlled-swap MCT triple, or None.

    Matches ``[MCT(D+y -> x), MCT(C+x -> y), MCT(D+y -> x)]`` with x, y
    positive controls and D a subset of C; the triple swaps x and y exactly
    when C is satisfied.  D = {} and D = C are the two textbook forms.
    """
    if not (g1.kind is g2.kind is g3.kind is GateKind.MCT) or g1 != g3:
        return None
    (x,), (y,) = g1.targets, g2.targets
    if Control(y, True) not in g1.controls or Control(x, True) not in g2.controls:
        return None
    outer = set(g1.controls) - {Control(y, True)}
    inner = set(g2.controls) - {Control(x, True)}
    if not outer <= inner:
        return None
    if any(c.line in (x, y) for c in inner):
        return None
    return mcf(sorted(inner), x, y)


def rewrite_swap_patterns(gates) -> list[Gate]:
    """Replace consecutive controlled-swap triples by MCF gates, left to right, to a fixpoint."""
    gates = list(gates)
    while True:
        out: list[Gate] = []
        i = 0
        changed = False
        while i < len(gates):
            if i + 2 < len(gates):
                rep = match_swap_pattern(gates[i], gates[i + 1], gates[i + 2])
                if rep is not None:
                    out.append(rep)
                    i += 3
                    changed = True
                    continue
            out.append(gates[i])
            i += 1
        gates = out
        if not changed:
            return gates


def convert_mct_to_mctf_online(circuit: Circuit) -> OnlineTestableCircuit:
    """Rewrite swap triples into MCF gates, add companions for leftover MCT, cascade the checker.

    Gates that are already MCF pass through untouched, so mixed cascades are accepted.
    """
    simplified = circuit.with_gates(rewrite_swap_patterns(circuit.gates))
    if simplified.is_mcf():
        return add_parity_checker(simplified, method="online-mctf", original_lines=tuple(range(circuit.n)))
    pp, p = _with_companions(simplified)
    return add_parity_checker(pp, method="online-mctf", parity_line=p, original_lines=tuple(range(circuit.n)))
