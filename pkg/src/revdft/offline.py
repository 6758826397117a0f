"""Offline-testable modification and general test sets.

An extra test line ``tau`` (constant 1 in normal mode) becomes a positive
control of every MCT gate.  Driving ``tau`` to 0 blocks those gates, so a
test vector crosses every level unchanged and the two-vector general test
set {all-zeros, all-ones with tau=0} exposes any stuck-at value on an
original line.  MCF gates need no extra control: both uniform vectors are
fixed points of a controlled swap.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit, CircuitError, Control, Gate, GateKind
from .faults import ResponseRule, TestSet

__all__ = ["OfflineTestableCircuit", "modify_mct_offline", "modify_mctf_offline", "gts_stuck_at",
           "mcf_offline_testsets", "family", "FAMILY_MIN_WIDTH", "write_vectors", "parse_vectors",
           "read_vectors"]

RECONSTRUCTED = "reconstructed"


@dataclass(frozen=True)
class OfflineTestableCircuit:
    circuit: Circuit
    test_line: int
    original_lines: tuple[int, ...]
    method: str
    normal_mode_value: int = 1

    @property
    def test_name(self) -> str:
        return self.circuit.lines[self.test_line]


def _add_test_line(circuit: Circuit, method: str, kinds: set[GateKind]) -> OfflineTestableCircuit:
    out, tau = circuit.add_line("tau", constant=1, output=True)
    gates = [Gate(g.kind, g.controls + (Control(tau, True),), g.targets) if g.kind in kinds else g
             for g in circuit.gates]
    out = out.with_gates(gates).with_metadata(f"revdft: method={method} test={out.lines[tau]}")
    return OfflineTestableCircuit(out, tau, tuple(range(circuit.n)), method)


def modify_mct_offline(circuit: Circuit) -> OfflineTestableCircuit:
    for level, g in enumerate(circuit.gates, start=1):
        if g.kind is not GateKind.MCT:
            raise CircuitError(f"modify_mct_offline requires only MCT gates; gate {level} is {g.kind.value}")
    return _add_test_line(circuit, "offline-mct", {GateKind.MCT})


def modify_mctf_offline(circuit: Circuit) -> OfflineTestableCircuit:
    circuit.check()
    return _add_test_line(circuit, "offline-mctf", {GateKind.MCT})


def gts_stuck_at(width: int) -> TestSet:
    """Two-vector general test set; the last position is the test line."""
    if width < 1:
        raise ValueError("width must be >= 1")
    return TestSet("gts", ((0,) * width, (1,) * (width - 1) + (0,)), ResponseRule.IDENTITY)


def _t2(n: int) -> TestSet:
    return TestSet("t2", ((0,) * n, (1,) * n), ResponseRule.IDENTITY)


def _tn(n: int) -> TestSet:
    vecs = tuple(tuple(0 if j == i else 1 for j in range(n)) for i in range(n))
    return TestSet("tn", vecs, ResponseRule.COMPARE, labels=(RECONSTRUCTED,))


def _pairs(n: int) -> TestSet:
    vecs = []
    for i in range(max(n - 2, 0)):
        v = tuple(1 if j in (i, i + 1) else 0 for j in range(n))
        vecs += [v, tuple(1 - b for b in v)]
    return TestSet("t2n-2", tuple(vecs), ResponseRule.COMPARE, labels=(RECONSTRUCTED,))


def mcf_offline_testsets(circuit: Circuit) -> tuple[TestSet, TestSet, TestSet]:
    """The size-2, size-n and size-2(n-2) families for an unmodified MCF circuit.

    T2 targets stuck-at faults, Tn (weight n-1 vectors) missing gates and
    T2(n-2) (adjacent weight-2 pairs and their complements) bridging.
    """
    for level, g in enumerate(circuit.gates, start=1):
        if g.kind is not GateKind.MCF:
            raise CircuitError(f"mcf_offline_testsets requires only MCF gates; gate {level} is {g.kind.value}")
    n = circuit.n
    return _t2(n), _tn(n), _pairs(n)


FAMILY_MIN_WIDTH = {"stuck2": 1, "weightn": 2, "pairs": 3}


def family(name: str, width: int) -> TestSet:
    """Generate a test-vector family by CLI name."""
    if name not in FAMILY_MIN_WIDTH:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILY_MIN_WIDTH)}")
    if width < FAMILY_MIN_WIDTH[name]:
        raise ValueError(f"family {name} needs width >= {FAMILY_MIN_WIDTH[name]}, got {width}")
    return {"stuck2": gts_stuck_at, "weightn": _tn, "pairs": _pairs}[name](width)


def write_vectors(tests: TestSet) -> str:
    """One bit-string per line, line index 0 first; comments carry name and rule."""
    lines = [f"# name: {tests.name}", f"# rule: {tests.rule.value}"]
    if tests.labels:
        lines.append(f"# labels: {','.join(tests.labels)}")
    lines += ["".join(map(str, v)) for v in tests.vectors]
    return "\n".join(lines) + "\n"


def parse_vectors(text: str, default_rule: ResponseRule | str = ResponseRule.COMPARE) -> TestSet:
    name, rule, labels = "vectors", ResponseRule(default_rule), ()
    vecs = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            key, _, val = s[1:].partition(":")
            key, val = key.strip(), val.strip()
            if key == "rule":
                rule = ResponseRule(val)
            elif key == "name":
                name = val
            elif key == "labels":
                labels = tuple(x for x in val.split(",") if x)
            continue
        if set(s) - {"0", "1"}:
            raise ValueError(f"line {lineno}: test vector must be a bit-string, got {s!r}")
        if width is not None and len(s) != width:
            raise ValueError(f"line {lineno}: vector width {len(s)} differs from {width}")
        width = len(s)
        vecs.append(tuple(int(c) for c in s))
    return TestSet(name, tuple(vecs), rule, labels=labels)


def read_vectors(path: str | Path) -> TestSet:
    return parse_vectors(Path(path).read_text(encoding="utf-8"))
