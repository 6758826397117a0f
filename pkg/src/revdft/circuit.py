"""Circuit IR for reversible MCT/MCF cascades.

Lines are addressed by their 0-based index; names live on the circuit.
A gate's *level* is its 1-based position in the cascade and *segment* k
(0..g) is the wire region after gate k and before gate k+1, so segment 0
is the primary-input region and segment g the output region.

States are plain bit tuples indexed by line.  Simulation internally packs
them into Python ints (bit i = line i); see :func:`pack` / :func:`unpack`.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

__all__ = [
    "CircuitError",
    "GateKind",
    "Control",
    "Gate",
    "Circuit",
    "mct",
    "mcf",
    "neg",
    "pack",
    "unpack",
    "apply_gate",
    "run",
    "run_traced",
    "inverse",
    "validate",
]

_NAME_RE = re.compile(r"^[^\s,]+$")


class CircuitError(ValueError):
    """Structural error: width mismatch, invalid gate, constant violation."""


class GateKind(str, enum.Enum):
    MCT = "MCT"
    MCF = "MCF"


@dataclass(frozen=True, order=True)
class Control:
    line: int
    positive: bool = True

    def satisfied(self, bit: int) -> bool:
        return bool(bit) == self.positive


def neg(line: int) -> Control:
    """Negative control on ``line`` (fires on 0)."""
    return Control(line, False)


def _as_control(c: int | Control | tuple[int, bool]) -> Control:
    if isinstance(c, Control):
        return c
    if isinstance(c, tuple):
        return Control(int(c[0]), bool(c[1]))
    return Control(int(c), True)


@dataclass(frozen=True)
class Gate:
    """A multiple-controlled Toffoli (one target) or Fredkin (two targets).

    Controls are kept sorted by line so that structurally equal gates
    compare equal regardless of construction order; MCF targets are an
    unordered pair, stored sorted.
    """

    kind: GateKind
    controls: tuple[Control, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "controls", tuple(sorted(_as_control(c) for c in self.controls)))
        targets = tuple(int(t) for t in self.targets)
        if self.kind is GateKind.MCF:
            targets = tuple(sorted(targets))
        object.__setattr__(self, "targets", targets)

    @property
    def control_lines(self) -> frozenset[int]:
        return frozenset(c.line for c in self.controls)

    @property
    def lines(self) -> frozenset[int]:
        return self.control_lines | frozenset(self.targets)

    def masks(self) -> tuple[int, int]:
        """(positive-control mask, negative-control mask) over packed states."""
        pos = negm = 0
        for c in self.controls:
            if c.positive:
                pos |= 1 << c.line
            else:
                negm |= 1 << c.line
        return pos, negm

    def with_controls(self, controls: Iterable[Control]) -> "Gate":
        return Gate(self.kind, tuple(controls), self.targets)

    def problems(self, n: int | None = None) -> list[str]:
        out = []
        lines = [c.line for c in self.controls]
        if len(set(lines)) != len(lines):
            out.append("controls reference the same line twice")
        if self.kind is GateKind.MCT and len(self.targets) != 1:
            out.append(f"MCT gate needs exactly one target, got {len(self.targets)}")
        if self.kind is GateKind.MCF:
            if len(self.targets) != 2:
                out.append(f"MCF gate needs exactly two targets, got {len(self.targets)}")
            elif self.targets[0] == self.targets[1]:
                out.append("MCF targets must be two distinct lines")
        if set(lines) & set(self.targets):
            out.append("target line also used as control")
        if n is not None:
            bad = sorted(x for x in set(lines) | set(self.targets) if not 0 <= x < n)
            if bad:
                out.append(f"references undefined line(s) {bad}")
        return out

    def __str__(self) -> str:
        ctl = ",".join(f"{c.line}" + ("" if c.positive else "'") for c in self.controls)
        return f"{self.kind.value}[{ctl};{','.join(map(str, self.targets))}]"


def mct(controls: Iterable[int | Control | tuple[int, bool]], target: int) -> Gate:
    return Gate(GateKind.MCT, tuple(controls), (target,))


def mcf(controls: Iterable[int | Control | tuple[int, bool]], t1: int, t2: int) -> Gate:
    return Gate(GateKind.MCF, tuple(controls), (t1, t2))


@dataclass(frozen=True)
class Circuit:
    """Immutable reversible circuit.

    ``constants`` maps constant-input lines to their bit; every other line
    is a primary input.  Lines not in ``outputs`` are garbage.
    ``metadata`` holds free-form comment lines and is ignored by equality.
    """

    lines: tuple[str, ...]
    gates: tuple[Gate, ...] = ()
    constants: Mapping[int, int] = field(default_factory=dict)
    outputs: frozenset[int] | None = None
    metadata: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "constants", {int(k): int(v) for k, v in dict(self.constants).items()})
        outs = range(len(self.lines)) if self.outputs is None else self.outputs
        object.__setattr__(self, "outputs", frozenset(int(o) for o in outs))
        object.__setattr__(self, "metadata", tuple(self.metadata))

    __hash__ = None  # constants is a dict

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def g(self) -> int:
        return len(self.gates)

    @property
    def inputs(self) -> frozenset[int]:
        return frozenset(i for i in range(self.n) if i not in self.constants)

    @property
    def garbage(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.outputs

    def index(self, name: str) -> int:
        try:
            return self.lines.index(name)
        except ValueError:
            raise CircuitError(f"no line named {name!r}") from None

    def fresh_name(self, base: str) -> str:
        if base not in self.lines:
            return base
        k = 1
        while f"{base}_{k}" in self.lines:
            k += 1
        return f"{base}_{k}"

    def add_line(self, base: str, constant: int | None = None, output: bool = True) -> tuple["Circuit", int]:
        """Append a line; returns the new circuit and the new line's index."""
        idx = self.n
        constants = dict(self.constants)
        if constant is not None:
            constants[idx] = constant
        outputs = self.outputs | {idx} if output else self.outputs
        return replace(self, lines=self.lines + (self.fresh_name(base),),
                       constants=constants, outputs=outputs), idx

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def with_metadata(self, *lines: str) -> "Circuit":
        return replace(self, metadata=self.metadata + lines)

    def kinds(self) -> frozenset[GateKind]:
        return frozenset(gt.kind for gt in self.gates)

    def is_mct(self) -> bool:
        return GateKind.MCF not in self.kinds()

    def is_mcf(self) -> bool:
        return GateKind.MCT not in self.kinds()

    def check(self) -> "Circuit":
        """Raise :class:`CircuitError` on the first violation; return self."""
        problems = validate(self)
        if problems:
            raise CircuitError("; ".join(problems))
        return self

    def __str__(self) -> str:
        return f"Circuit(n={self.n}, g={self.g}, lines={','.join(self.lines)})"


def validate(circuit: Circuit) -> list[str]:
    """Return every invariant violation as a human-readable string."""
    out = []
    names = circuit.lines
    for i, name in enumerate(names):
        if not name or not _NAME_RE.match(name):
            out.append(f"line {i}: invalid name {name!r}")
    seen = set()
    for name in names:
        if name in seen:
            out.append(f"line name {name!r} is duplicated")
        seen.add(name)
    for k, v in circuit.constants.items():
        if not 0 <= k < circuit.n:
            out.append(f"constant declared on undefined line {k}")
        if v not in (0, 1):
            out.append(f"line {k}: constant value {v} is not a bit")
    for o in circuit.outputs:
        if not 0 <= o < circuit.n:
            out.append(f"output declared on undefined line {o}")
    for level, gate in enumerate(circuit.gates, start=1):
        for p in gate.problems(circuit.n):
            out.append(f"gate {level} ({gate}): {p}")
    return out


def pack(bits: Sequence[int]) -> int:
    x = 0
    for i, b in enumerate(bits):
        if b:
            x |= 1 << i
    return x


def unpack(x: int, n: int) -> tuple[int, ...]:
    return tuple((x >> i) & 1 for i in range(n))


def _apply_packed(gate: Gate, s: int) -> int:
    pos, negm = gate.masks()
    if (s & pos) != pos or (s & negm):
        return s
    if gate.kind is GateKind.MCT:
        return s ^ (1 << gate.targets[0])
    t1, t2 = gate.targets
    if ((s >> t1) ^ (s >> t2)) & 1:
        s ^= (1 << t1) | (1 << t2)
    return s


def _width_check(width: int, n: int):
    if width != n:
        raise CircuitError(f"state width {width} does not match circuit width {n}")


def apply_gate(gate: Gate, state: Sequence[int]) -> tuple[int, ...]:
    """Apply one gate to a bit-vector; the gate is its own inverse."""
    n = len(state)
    problems = gate.problems(n)
    if problems:
        raise CircuitError(f"gate {gate} invalid for width {n}: {'; '.join(problems)}")
    return unpack(_apply_packed(gate, pack(state)), n)


def _prepare(circuit: Circuit, state: Sequence[int], enforce_constants: bool) -> int:
    _width_check(len(state), circuit.n)
    if enforce_constants:
        for line, v in circuit.constants.items():
            if state[line] != v:
                raise CircuitError(
                    f"constant line {circuit.lines[line]!r} must be {v}, got {state[line]}")
    return pack(state)


def run(circuit: Circuit, state: Sequence[int], enforce_constants: bool = False) -> tuple[int, ...]:
    s = _prepare(circuit, state, enforce_constants)
    for gate in circuit.gates:
        s = _apply_packed(gate, s)
    return unpack(s, circuit.n)


def run_traced(circuit: Circuit, state: Sequence[int], enforce_constants: bool = False) -> list[tuple[int, ...]]:
    """States at every segment: element k follows the first k gates."""
    s = _prepare(circuit, state, enforce_constants)
    trace = [unpack(s, circuit.n)]
    for gate in circuit.gates:
        s = _apply_packed(gate, s)
        trace.append(unpack(s, circuit.n))
    return trace


def inverse(circuit: Circuit) -> Circuit:
    return circuit.with_gates(reversed(circuit.gates))
