"""Fault models, fault injection, test grading and greedy test selection.

Fault sites follow the level/segment convention of :mod:`revdft.circuit`.
Semantics of each model when injected:

* ``BitFlip(line, segment)``: the line is inverted once in that segment.
* ``StuckAt(line, segment, value)``: the line is forced to ``value`` from the
  segment through the circuit output.  A later stuck-at on the same line
  overrides from its own segment.
* ``MissingGate(level)``: the gate is skipped.
* ``CrossPointAppearance(level, line, positive)`` / ``CrossPointDisappearance
  (level, line)``: the gate runs with a control added / removed.
* ``Bridging(line_a, line_b, segment, mode)``: in that segment both lines take
  the wired-AND (or wired-OR) of the pair.
"""
from __future__ import annotations

import enum
import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import ClassVar, Iterable, Sequence, Union

from . import kernels
from ._pykernels import OP_ADDCTL, OP_BAND, OP_BOR, OP_DELCTL, OP_FLIP, OP_SKIP, OP_STUCK
from .circuit import Circuit, CircuitError, pack, unpack

__all__ = [
    "FaultError", "FaultKind", "BitFlip", "StuckAt", "MissingGate", "CrossPointAppearance",
    "CrossPointDisappearance", "Bridging", "Fault", "FaultUniverse", "ResponseRule", "TestSet",
    "CoverageReport", "enumerate_faults", "encode_fault_sets", "run_faulty", "grade",
    "greedy_minimal_testset", "fault_from_json", "parse_fault_spec",
]

MAX_EXHAUSTIVE_K = 3
DEFAULT_SAMPLES = 10_000
MAX_EXHAUSTIVE_WIDTH = 16
CHUNK = 4096


class FaultError(ValueError):
    pass


class FaultKind(str, enum.Enum):
    BIT_FLIP = "BitFlip"
    STUCK_AT = "StuckAt"
    MISSING_GATE = "MissingGate"
    CROSSPOINT_APPEARANCE = "CrossPointAppearance"
    CROSSPOINT_DISAPPEARANCE = "CrossPointDisappearance"
    BRIDGING = "Bridging"

    @classmethod
    def parse(cls, text: str) -> "FaultKind":
        key = text.replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        aliases = {"crosspoint+": cls.CROSSPOINT_APPEARANCE, "crosspoint-": cls.CROSSPOINT_DISAPPEARANCE}
        if key in aliases:
            return aliases[key]
        raise FaultError(f"unsupported fault kind {text!r}")


def _check_line(circuit: Circuit, line: int, what: str = "line"):
    if not 0 <= line < circuit.n:
        raise FaultError(f"{what} {line} outside circuit of width {circuit.n}")


def _check_segment(circuit: Circuit, segment: int):
    if not 0 <= segment <= circuit.g:
        raise FaultError(f"segment {segment} outside 0..{circuit.g}")


def _check_level(circuit: Circuit, level: int):
    if not 1 <= level <= circuit.g:
        raise FaultError(f"level {level} outside 1..{circuit.g}")


@dataclass(frozen=True, order=True)
class BitFlip:
    kind: ClassVar[FaultKind] = FaultKind.BIT_FLIP
    line: int
    segment: int

    def validate(self, circuit):
        _check_line(circuit, self.line)
        _check_segment(circuit, self.segment)

    def sites(self):
        return (("seg", self.line, self.segment),)


@dataclass(frozen=True, order=True)
class StuckAt:
    kind: ClassVar[FaultKind] = FaultKind.STUCK_AT
    line: int
    segment: int
    value: int

    def validate(self, circuit):
        _check_line(circuit, self.line)
        _check_segment(circuit, self.segment)
        if self.value not in (0, 1):
            raise FaultError(f"stuck-at value {self.value} is not a bit")

    def sites(self):
        return (("seg", self.line, self.segment),)


@dataclass(frozen=True, order=True)
class MissingGate:
    kind: ClassVar[FaultKind] = FaultKind.MISSING_GATE
    level: int

    def validate(self, circuit):
        _check_level(circuit, self.level)

    def sites(self):
        return (("gate", self.level, None),)


@dataclass(frozen=True, order=True)
class CrossPointAppearance:
    kind: ClassVar[FaultKind] = FaultKind.CROSSPOINT_APPEARANCE
    level: int
    line: int
    positive: bool = True

    def validate(self, circuit):
        _check_level(circuit, self.level)
        _check_line(circuit, self.line)
        if self.line in circuit.gates[self.level - 1].lines:
            raise FaultError(f"line {self.line} already used by gate {self.level}")

    def sites(self):
        return (("gate", self.level, self.line),)


@dataclass(frozen=True, order=True)
class CrossPointDisappearance:
    kind: ClassVar[FaultKind] = FaultKind.CROSSPOINT_DISAPPEARANCE
    level: int
    line: int

    def validate(self, circuit):
        _check_level(circuit, self.level)
        if self.line not in circuit.gates[self.level - 1].control_lines:
            raise FaultError(f"line {self.line} is not a control of gate {self.level}")

    def sites(self):
        return (("gate", self.level, self.line),)


@dataclass(frozen=True, order=True)
class Bridging:
    kind: ClassVar[FaultKind] = FaultKind.BRIDGING
    line_a: int
    line_b: int
    segment: int
    mode: str = "and"

    def validate(self, circuit):
        _check_line(circuit, self.line_a)
        _check_line(circuit, self.line_b)
        _check_segment(circuit, self.segment)
        if self.line_a == self.line_b:
            raise FaultError("bridging fault needs two distinct lines")
        if self.mode not in ("and", "or"):
            raise FaultError(f"bridging mode must be 'and' or 'or', got {self.mode!r}")

    def sites(self):
        return (("seg", self.line_a, self.segment), ("seg", self.line_b, self.segment))


Fault = Union[BitFlip, StuckAt, MissingGate, CrossPointAppearance, CrossPointDisappearance, Bridging]
_BY_KIND = {cls.kind: cls for cls in (BitFlip, StuckAt, MissingGate, CrossPointAppearance,
                                      CrossPointDisappearance, Bridging)}
_LINE_FIELDS = ("line", "line_a", "line_b")


def fault_to_json(fault: Fault, names: Sequence[str] | None = None) -> dict:
    out = {"kind": fault.kind.value}
    for f in (fld.name for fld in fields(fault)):
        out[f] = getattr(fault, f)
        if names is not None and f in _LINE_FIELDS:
            out[f + "_name"] = names[getattr(fault, f)]
    return out


def fault_from_json(data: dict) -> Fault:
    cls = _BY_KIND[FaultKind(data["kind"])]
    return cls(**{fld.name: data[fld.name] for fld in fields(cls) if fld.name in data})


def _conflicts(keys: Iterable[tuple], used: set, missing_levels: set, gate_levels: set) -> bool:
    for key in keys:
        if key in used:
            return True
        if key[0] == "gate":
            level, line = key[1], key[2]
            if level in missing_levels or (line is None and level in gate_levels):
                return True
    return False


def _claim(keys, used, missing_levels, gate_levels):
    for key in keys:
        used.add(key)
        if key[0] == "gate":
            gate_levels.add(key[1])
            if key[2] is None:
                missing_levels.add(key[1])


def _check_fault_set(circuit: Circuit, faults: Sequence[Fault]):
    used: set = set()
    missing: set = set()
    gate_levels: set = set()
    for f in faults:
        f.validate(circuit)
        keys = f.sites()
        if _conflicts(keys, used, missing, gate_levels):
            raise FaultError(f"conflicting duplicate site in fault set: {f}")
        _claim(keys, used, missing, gate_levels)


@dataclass(frozen=True)
class FaultUniverse:
    circuit: Circuit = field(repr=False)
    kind: FaultKind
    multiplicity: int
    faults: tuple[tuple[Fault, ...], ...]
    sampled: bool = False

    def __len__(self):
        return len(self.faults)

    def __iter__(self):
        return iter(self.faults)


def _singles(circuit: Circuit, kind: FaultKind, lines, segments, adjacent_only: bool) -> list[Fault]:
    n, g = circuit.n, circuit.g
    line_list = sorted(set(range(n)) if lines is None else set(lines))
    seg_list = sorted(set(range(g + 1)) if segments is None else set(segments))
    if kind is FaultKind.BIT_FLIP:
        return [BitFlip(l, s) for l in line_list for s in seg_list]
    if kind is FaultKind.STUCK_AT:
        return [StuckAt(l, s, v) for l in line_list for s in seg_list for v in (0, 1)]
    if kind is FaultKind.MISSING_GATE:
        return [MissingGate(k) for k in range(1, g + 1)]
    if kind is FaultKind.CROSSPOINT_APPEARANCE:
        out = []
        for k, gate in enumerate(circuit.gates, start=1):
            used = gate.lines
            out += [CrossPointAppearance(k, l, p) for l in line_list if l not in used for p in (True, False)]
        return out
    if kind is FaultKind.CROSSPOINT_DISAPPEARANCE:
        return [CrossPointDisappearance(k, c.line) for k, gate in enumerate(circuit.gates, start=1)
                for c in gate.controls if lines is None or c.line in lines]
    if kind is FaultKind.BRIDGING:
        if adjacent_only:
            pairs = [(a, b) for a, b in zip(line_list, line_list[1:]) if b == a + 1]
        else:
            pairs = list(itertools.combinations(line_list, 2))
        return [Bridging(a, b, s, m) for a, b in pairs for s in seg_list for m in ("and", "or")]
    raise FaultError(f"unsupported fault kind {kind!r}")


def _exhaustive_sets(singles: list[Fault], k: int) -> list[tuple[Fault, ...]]:
    keys = [f.sites() for f in singles]
    out: list[tuple[Fault, ...]] = []
    used: set = set()

    def extend(start, chosen, missing, gate_levels):
        out.append(tuple(chosen))
        if len(chosen) == k:
            return
        for i in range(start, len(singles)):
            if _conflicts(keys[i], used, missing, gate_levels):
                continue
            m2, g2 = set(missing), set(gate_levels)
            _claim(keys[i], used, m2, g2)
            chosen.append(singles[i])
            extend(i + 1, chosen, m2, g2)
            chosen.pop()
            for key in keys[i]:
                used.discard(key)

    for i in range(len(singles)):
        m, gl = set(), set()
        _claim(keys[i], used, m, gl)
        extend(i + 1, [singles[i]], m, gl)
        for key in keys[i]:
            used.discard(key)
    out.sort(key=len)
    return out


def _sampled_sets(singles, k, samples, seed):
    rng = random.Random(seed)
    seen = set()
    out = []
    attempts = 0
    while len(out) < samples and attempts < samples * 20:
        attempts += 1
        size = rng.randint(1, min(k, len(singles)))
        pick = tuple(sorted(rng.sample(singles, size)))
        if pick in seen:
            continue
        used, missing, gl = set(), set(), set()
        ok = True
        for f in pick:
            if _conflicts(f.sites(), used, missing, gl):
                ok = False
                break
            _claim(f.sites(), used, missing, gl)
        if ok:
            seen.add(pick)
            out.append(pick)
    return out


def enumerate_faults(circuit: Circuit, kind: FaultKind | str, multiplicity: int = 1, *,
                     lines: Iterable[int] | None = None, segments: Iterable[int] | None = None,
                     adjacent_only: bool = False, samples: int = DEFAULT_SAMPLES,
                     seed: int = 0) -> FaultUniverse:
    """Enumerate single faults, or all non-conflicting sets of at most ``multiplicity``.

    Above ``MAX_EXHAUSTIVE_K`` the sets are sampled (``samples`` sets, fixed
    ``seed``) and the universe is flagged as sampled.  ``lines`` and
    ``segments`` restrict line/segment-sited faults to the given sites.
    """
    kind = FaultKind.parse(kind) if isinstance(kind, str) else FaultKind(kind)
    if multiplicity < 1:
        raise FaultError("multiplicity must be >= 1")
    singles = _singles(circuit, kind, lines, segments, adjacent_only)
    if multiplicity == 1:
        return FaultUniverse(circuit, kind, 1, tuple((f,) for f in singles))
    if multiplicity <= MAX_EXHAUSTIVE_K:
        return FaultUniverse(circuit, kind, multiplicity, tuple(_exhaustive_sets(singles, multiplicity)))
    return FaultUniverse(circuit, kind, multiplicity, tuple(_sampled_sets(singles, multiplicity, samples, seed)),
                         sampled=True)


def _records_of(f: Fault) -> tuple[tuple[int, ...], ...]:
    if isinstance(f, BitFlip):
        return ((2 * f.segment + 1, OP_FLIP, 1 << f.line, 0, 0),)
    if isinstance(f, StuckAt):
        return ((2 * f.segment + 1, OP_STUCK, 1 << f.line, f.value, 0),)
    if isinstance(f, Bridging):
        return ((2 * f.segment + 1, OP_BAND if f.mode == "and" else OP_BOR, f.line_a, f.line_b, 0),)
    if isinstance(f, MissingGate):
        return ((2 * f.level, OP_SKIP, 0, 0, 0),)
    if isinstance(f, CrossPointAppearance):
        return ((2 * f.level, OP_ADDCTL, 1 << f.line, int(f.positive), 0),)
    return ((2 * f.level, OP_DELCTL, 1 << f.line, 0, 0),)


def encode_fault_sets(circuit: Circuit, fault_sets: Sequence[Sequence[Fault]], check: bool = True):
    """Flatten fault sets into kernel records plus per-set offsets."""
    cache: dict = {}
    flat: list[int] = []
    offsets = [0]
    for fs in fault_sets:
        if check:
            _check_fault_set(circuit, fs)
        recs = []
        for f in fs:
            r = cache.get(f)
            if r is None:
                r = cache[f] = _records_of(f)
            recs += r
        if len(recs) > 1:
            recs.sort()
        for r in recs:
            flat += r
        offsets.append(len(flat))
    return flat, offsets


def run_faulty(circuit: Circuit, state: Sequence[int], faults: Iterable[Fault] = ()) -> tuple[int, ...]:
    if len(state) != circuit.n:
        raise CircuitError(f"state width {len(state)} does not match circuit width {circuit.n}")
    recs, _ = encode_fault_sets(circuit, [tuple(faults)])
    return unpack(kernels.run_many(circuit, [pack(state)], recs)[0], circuit.n)


class ResponseRule(str, enum.Enum):
    COMPARE = "compare-to-fault-free-output"
    CHECK_LINE_ZERO = "check-line-equals-zero"
    IDENTITY = "identity-output"


@dataclass(frozen=True)
class TestSet:
    """Named test vectors plus the rule deciding whether a response passes.

    ``observe`` restricts which output lines are compared.  When omitted:
    identity compares every line, compare-to-fault-free compares the
    circuit's primary outputs, check-line looks at ``check_line`` only.
    """

    __test__ = False  # not a pytest class

    name: str
    vectors: tuple[tuple[int, ...], ...]
    rule: ResponseRule
    check_line: int | None = None
    observe: frozenset[int] | None = None
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(tuple(int(b) for b in v) for v in self.vectors))
        object.__setattr__(self, "rule", ResponseRule(self.rule))

    def __len__(self):
        return len(self.vectors)

    def observed_mask(self, circuit: Circuit) -> int:
        if self.rule is ResponseRule.CHECK_LINE_ZERO:
            if self.check_line is None or not 0 <= self.check_line < circuit.n:
                raise FaultError("check-line rule needs a check line inside the circuit")
            return 1 << self.check_line
        if self.observe is not None:
            lines = self.observe
        elif self.rule is ResponseRule.IDENTITY:
            lines = range(circuit.n)
        else:
            lines = circuit.outputs
        return sum(1 << l for l in set(lines))

    def expected(self, circuit: Circuit, packed: list[int], force_python: bool = False) -> list[int]:
        if self.rule is ResponseRule.IDENTITY:
            return list(packed)
        if self.rule is ResponseRule.CHECK_LINE_ZERO:
            return [0] * len(packed)
        return kernels.run_many(circuit, packed, force_python=force_python)


def _packed_vectors(circuit: Circuit, tests: TestSet) -> list[int]:
    for v in tests.vectors:
        if len(v) != circuit.n:
            raise CircuitError(f"test vector width {len(v)} does not match circuit width {circuit.n}")
    return [pack(v) for v in tests.vectors]


@dataclass(frozen=True)
class CoverageReport:
    total: int
    detected: int
    undetected: tuple[tuple[Fault, ...], ...]
    flags: tuple[str, ...] = ()
    line_names: tuple[str, ...] | None = field(default=None, repr=False, compare=False)

    @property
    def coverage(self) -> float:
        # Convention: an empty universe is fully covered (flagged).
        return 1.0 if self.total == 0 else self.detected / self.total

    def to_json(self) -> dict:
        und = []
        for fs in self.undetected:
            enc = [fault_to_json(f, self.line_names) for f in fs]
            und.append(enc[0] if len(enc) == 1 else enc)
        return {"total": self.total, "detected": self.detected, "coverage": self.coverage,
                "undetected": und, "flags": list(self.flags)}


def _run_chunks(fn, items, workers):
    chunks = [items[i:i + CHUNK] for i in range(0, len(items), CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return parts


def grade(circuit: Circuit, tests: TestSet, universe: FaultUniverse | Iterable[Sequence[Fault]], *,
          workers: int = 1, force_python: bool = False) -> CoverageReport:
    """A fault (set) is detected iff some test response violates the test set's rule."""
    fault_sets = tuple(universe)
    packed = _packed_vectors(circuit, tests)
    mask = tests.observed_mask(circuit)
    expected = tests.expected(circuit, packed, force_python)
    table = kernels.gate_table(circuit)
    trusted = isinstance(universe, FaultUniverse) and universe.circuit is circuit

    def work(chunk):
        recs, offsets = encode_fault_sets(circuit, chunk, check=not trusted)
        return kernels.detect_any(circuit, table, recs, offsets, packed, expected, mask, force_python)

    flags_out = bytearray().join(_run_chunks(work, fault_sets, workers)) if fault_sets else bytearray()
    undetected = tuple(fs for fs, d in zip(fault_sets, flags_out) if not d)
    flags = list(tests.labels)
    if not fault_sets:
        flags.append("empty-universe")
    if isinstance(universe, FaultUniverse) and universe.sampled:
        flags.append("sampled-universe")
    return CoverageReport(len(fault_sets), len(fault_sets) - len(undetected), undetected, tuple(flags),
                          circuit.lines)


def detection_matrix(circuit: Circuit, tests: TestSet, universe, *, force_python: bool = False) -> list[list[int]]:
    """Rows are fault sets, columns test vectors; 1 where the vector detects."""
    fault_sets = tuple(universe)
    packed = _packed_vectors(circuit, tests)
    mask = tests.observed_mask(circuit)
    expected = tests.expected(circuit, packed, force_python)
    trusted = isinstance(universe, FaultUniverse) and universe.circuit is circuit
    recs, offsets = encode_fault_sets(circuit, fault_sets, check=not trusted)
    flat = kernels.detect_matrix(circuit, kernels.gate_table(circuit), recs, offsets, packed, expected, mask,
                                 force_python)
    nv = len(packed)
    return [list(flat[i * nv:(i + 1) * nv]) for i in range(len(fault_sets))]


def greedy_minimal_testset(circuit: Circuit, universe: FaultUniverse | Iterable[Sequence[Fault]],
                           candidates: Sequence[Sequence[int]] | None = None, *,
                           rule: ResponseRule | str = ResponseRule.COMPARE, check_line: int | None = None,
                           observe: Iterable[int] | None = None, name: str = "greedy",
                           force_python: bool = False) -> TestSet:
    """Greedy set cover of the universe over a candidate vector pool.

    Candidates whose fault-free response already breaks the rule are
    dropped first.  After the greedy pass, redundant picks are pruned.
    The result detects every fault any candidate detects.
    """
    if candidates is None:
        if circuit.n > MAX_EXHAUSTIVE_WIDTH:
            raise FaultError(f"{circuit.n} lines is too wide for exhaustive candidates; pass a pool")
        candidates = [unpack(x, circuit.n) for x in range(1 << circuit.n)]
    if not candidates:
        raise FaultError("candidate pool is empty")
    obs = frozenset(observe) if observe is not None else None
    pool = TestSet(name, tuple(candidates), ResponseRule(rule), check_line, obs)
    packed = _packed_vectors(circuit, pool)
    mask = pool.observed_mask(circuit)
    expected = pool.expected(circuit, packed, force_python)
    good = kernels.run_many(circuit, packed, force_python=force_python)
    usable = [j for j in range(len(packed)) if not (good[j] ^ expected[j]) & mask]
    pool = TestSet(name, tuple(pool.vectors[j] for j in usable), pool.rule, check_line, obs)

    matrix = detection_matrix(circuit, pool, universe, force_python=force_python)
    cover = [0] * len(pool)
    for i, row in enumerate(matrix):
        for j, hit in enumerate(row):
            if hit:
                cover[j] |= 1 << i
    remaining = 0
    for c in cover:
        remaining |= c
    chosen: list[int] = []
    while remaining:
        best = max(range(len(cover)), key=lambda j: ((cover[j] & remaining).bit_count(), -j))
        chosen.append(best)
        remaining &= ~cover[best]
    for j in list(reversed(chosen)):
        rest = 0
        for k in chosen:
            if k != j:
                rest |= cover[k]
        if cover[j] & ~rest == 0:
            chosen.remove(j)
    chosen.sort()
    return TestSet(name, tuple(pool.vectors[j] for j in chosen), pool.rule, check_line, obs)


def parse_fault_spec(text: str) -> tuple[FaultKind, int]:
    """``kind`` or ``kind:k`` / ``kind:single`` -> (kind, multiplicity)."""
    kind, _, mult = text.partition(":")
    if not mult or mult == "single":
        k = 1
    else:
        if mult.startswith("multiple(") and mult.endswith(")"):
            mult = mult[len("multiple("):-1]
        try:
            k = int(mult)
        except ValueError:
            raise FaultError(f"bad multiplicity {mult!r}") from None
    return FaultKind.parse(kind), k
