"""Generators for datapath elements built from MCT and MCF gates.

All generators return plain circuits plus, where useful, a layout object
naming which lines carry operands and results, so callers (and tests) can
drive them without knowing line indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .circuit import Circuit, Control, Gate, mcf, mct
from .online import OnlineTestableCircuit, convert_mct_to_mctf_online, modify_mcf_online

__all__ = ["DpeSpec", "Layout", "ALU_OPS", "build_full_adder", "build_rca", "build_mul4", "build_alu",
           "build", "build_testable", "evaluate"]

ALU_OPS = ("ADD", "AND", "OR", "XOR")
ELEMENTS = ("FA", "RCA", "MUL4", "ALU")


@dataclass(frozen=True)
class Layout:
    """Named line groups: operands are LSB first."""

    circuit: Circuit
    operands: dict[str, tuple[int, ...]]
    results: dict[str, tuple[int, ...]]


class _Builder:
    def __init__(self):
        self.names: list[str] = []
        self.constants: dict[int, int] = {}
        self.gates: list[Gate] = []

    def line(self, name: str, constant: int | None = None) -> int:
        self.names.append(name)
        if constant is not None:
            self.constants[len(self.names) - 1] = constant
        return len(self.names) - 1

    def word(self, prefix: str, width: int, constant: int | None = None) -> tuple[int, ...]:
        return tuple(self.line(f"{prefix}{i}", constant) for i in range(width))

    def full_adder(self, a: int, b: int, cin: int, anc: int):
        # sum -> cin line, carry -> anc line, b holds a^b afterwards
        self.gates += [mct([a, b], anc), mct([a], b), mct([b, cin], anc), mct([b], cin)]

    def ripple(self, a: Sequence[int], b: Sequence[int], cin: int, ancs: Sequence[int]) -> tuple[int, ...]:
        """Adds a+b+cin; returns sum lines (LSB first) followed by the carry-out line."""
        carry = [cin, *ancs]
        for i in range(len(a)):
            self.full_adder(a[i], b[i], carry[i], carry[i + 1])
        return tuple(carry)

    def circuit(self, outputs) -> Circuit:
        return Circuit(tuple(self.names), tuple(self.gates), dict(self.constants), frozenset(outputs))


def build_full_adder() -> Circuit:
    return full_adder_layout().circuit


def full_adder_layout() -> Layout:
    b = _Builder()
    a, bb, cin = b.line("a"), b.line("b"), b.line("cin")
    anc = b.line("anc", 0)
    b.full_adder(a, bb, cin, anc)
    return Layout(b.circuit([cin, anc]), {"a": (a,), "b": (bb,), "cin": (cin,)},
                  {"sum": (cin,), "carry": (anc,)})


def rca_layout(width: int) -> Layout:
    if width < 1:
        raise ValueError("RCA width must be >= 1")
    b = _Builder()
    a = b.word("a", width)
    bw = b.word("b", width)
    c0 = b.line("c0")
    ancs = tuple(b.line(f"anc{i}", 0) for i in range(1, width + 1))
    out = b.ripple(a, bw, c0, ancs)
    return Layout(b.circuit(out), {"a": a, "b": bw, "cin": (c0,)},
                  {"sum": out[:-1], "carry": (out[-1],)})


def build_rca(width: int) -> Circuit:
    return rca_layout(width).circuit


def mul4_layout() -> Layout:
    b = _Builder()
    a = b.word("a", 4)
    bw = b.word("b", 4)
    pp = {(i, j): b.line(f"p{i}{j}", 0) for j in range(4) for i in range(4)}
    zero = b.line("z0", 0)
    for j in range(4):
        for i in range(4):
            b.gates.append(mct([a[i], bw[j]], pp[i, j]))
    product = [pp[0, 0]]
    acc = (pp[1, 0], pp[2, 0], pp[3, 0], zero)  # weights 1..4
    for j in range(1, 4):
        cin = b.line(f"c{j}", 0)
        ancs = tuple(b.line(f"k{j}_{i}", 0) for i in range(1, 5))
        s = b.ripple(acc, [pp[i, j] for i in range(4)], cin, ancs)
        product.append(s[0])
        acc = s[1:]
    product += acc
    return Layout(b.circuit(product), {"a": a, "b": bw}, {"product": tuple(product)})


def build_mul4() -> Circuit:
    return mul4_layout().circuit


def _select_controls(s1: int, s0: int, code: int) -> list[Control]:
    return [Control(s1, bool(code >> 1 & 1)), Control(s0, bool(code & 1))]


def alu_layout(width: int, ops: Sequence[str] = ALU_OPS) -> Layout:
    """Select lines (s1 s0) pick ``ops[code]``; unused codes yield 0.

    A Fredkin control unit swaps the operands onto the selected block's
    zero-initialised rails, the block computes, and a second Fredkin stage
    swaps its result onto the shared result word.
    """
    if width < 1:
        raise ValueError("ALU width must be >= 1")
    ops = tuple(op.upper() for op in ops)
    if not ops:
        raise ValueError("ALU needs at least one operation")
    if len(ops) > 4:
        raise ValueError(f"{len(ops)} operations exceed the 2-bit select capacity (4)")
    bad = [op for op in ops if op not in ALU_OPS]
    if bad:
        raise ValueError(f"unsupported ALU operation(s): {', '.join(bad)}")
    if len(set(ops)) != len(ops):
        raise ValueError("duplicate ALU operation")

    b = _Builder()
    s1, s0 = b.line("s1"), b.line("s0")
    A = b.word("A", width)
    B = b.word("B", width)
    rails = {op: (b.word(f"{op.lower()}A", width, 0), b.word(f"{op.lower()}B", width, 0)) for op in ops}
    result = b.word("R", width, 0)

    for code, op in enumerate(ops):
        sel = _select_controls(s1, s0, code)
        ra, rb = rails[op]
        for i in range(width):
            b.gates.append(mcf(sel, A[i], ra[i]))
            b.gates.append(mcf(sel, B[i], rb[i]))

    block_out: dict[str, tuple[int, ...]] = {}
    carry_out = None
    for op in ops:
        ra, rb = rails[op]
        if op == "ADD":
            cin = b.line("add_c0", 0)
            ancs = tuple(b.line(f"add_anc{i}", 0) for i in range(1, width + 1))
            s = b.ripple(ra, rb, cin, ancs)
            block_out[op], carry_out = s[:-1], s[-1]
        elif op == "AND":
            r = b.word("and_r", width, 0)
            for i in range(width):
                b.gates.append(mct([ra[i], rb[i]], r[i]))
            block_out[op] = r
        elif op == "XOR":
            for i in range(width):
                b.gates.append(mct([ra[i]], rb[i]))
            block_out[op] = rb
        else:  # OR = a ^ b ^ ab
            r = b.word("or_r", width, 0)
            for i in range(width):
                b.gates += [mct([ra[i]], r[i]), mct([rb[i]], r[i]), mct([ra[i], rb[i]], r[i])]
            block_out[op] = r

    for code, op in enumerate(ops):
        sel = _select_controls(s1, s0, code)
        for i in range(width):
            b.gates.append(mcf(sel, block_out[op][i], result[i]))

    outputs = list(result) + ([carry_out] if carry_out is not None else [])
    results = {"result": result}
    if carry_out is not None:
        results["carry"] = (carry_out,)
    return Layout(b.circuit(outputs), {"s": (s0, s1), "A": A, "B": B}, results)


def build_alu(width: int, ops: Sequence[str] = ALU_OPS) -> Circuit:
    return alu_layout(width, ops).circuit


@dataclass(frozen=True)
class DpeSpec:
    element: str
    width: int = 1
    testable: bool = False
    alu_ops: tuple[str, ...] = field(default=ALU_OPS)

    def __post_init__(self):
        object.__setattr__(self, "element", self.element.upper())
        if self.element not in ELEMENTS:
            raise ValueError(f"unknown element {self.element!r}; choose from {', '.join(ELEMENTS)}")
        if self.width < 1:
            raise ValueError("width must be >= 1")


def layout(spec: DpeSpec) -> Layout:
    if spec.element == "FA":
        return full_adder_layout()
    if spec.element == "RCA":
        return rca_layout(spec.width)
    if spec.element == "MUL4":
        return mul4_layout()
    return alu_layout(spec.width, spec.alu_ops)


def build(spec: DpeSpec) -> Circuit:
    return layout(spec).circuit


def build_testable(spec: DpeSpec) -> OnlineTestableCircuit:
    circuit = build(spec)
    if circuit.is_mcf():
        return modify_mcf_online(circuit)
    return convert_mct_to_mctf_online(circuit)


def evaluate(lay: Layout, values: dict[str, int], circuit: Circuit | None = None) -> dict[str, int]:
    """Drive operand words with integers and read result words back as integers.

    ``circuit`` may be a wrapped variant of ``lay.circuit`` whose original
    lines keep their indices (the online transforms only append lines).
    """
    from .circuit import run

    circuit = circuit or lay.circuit
    state = [0] * circuit.n
    for line, v in circuit.constants.items():
        state[line] = v
    for name, lines in lay.operands.items():
        v = values.get(name, 0)
        for i, line in enumerate(lines):
            state[line] = (v >> i) & 1
    out = run(circuit, state, enforce_constants=True)
    return {name: sum(out[line] << i for i, line in enumerate(lines)) for name, lines in lay.results.items()}
