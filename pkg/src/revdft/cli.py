"""Command-line front end.

Reports are JSON on stdout, diagnostics on stderr.  Exit codes: 0 success,
1 threshold or self-check failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import dpe, faults, metrics, offline, online
from .circuit import Circuit, CircuitError, run, unpack
from .faults import FaultError, FaultKind, ResponseRule, TestSet
from .tfc import TfcError, read_tfc, save_tfc

log = logging.getLogger("revdft")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
MAX_SIMULATE_WIDTH = 16

TRANSFORMS = {
    "online-mct": online.modify_mct_online,
    "online-mcf": online.modify_mcf_online,
    "online-mctf": online.convert_mct_to_mctf_online,
    "offline-mct": offline.modify_mct_offline,
    "offline-mctf": offline.modify_mctf_offline,
}


class InputError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    inputs: list[str] = field(default_factory=list)
    method: str | None = None
    faults: str | None = None
    tests: str | None = None
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def provenance(circuit: Circuit) -> dict[str, str]:
    """Key/value pairs from the last ``revdft:`` metadata comment."""
    info: dict[str, str] = {}
    for line in circuit.metadata:
        if line.startswith("revdft:"):
            info = dict(tok.split("=", 1) for tok in line[len("revdft:"):].split() if "=" in tok)
    return info


def _line(circuit: Circuit, name: str) -> int:
    try:
        return circuit.index(name)
    except CircuitError as exc:
        raise InputError(str(exc)) from None


def cmd_stats(args, manifest: RunManifest) -> int:
    circuit = read_tfc(args.input)
    manifest.inputs.append(str(args.input))
    _emit(metrics.cost_report(circuit).to_json())
    return EXIT_OK


def _bits(text: str, n: int) -> tuple[int, ...]:
    text = text.strip()
    if len(text) != n or set(text) - {"0", "1"}:
        raise InputError(f"vector {text!r} is not a {n}-bit string")
    return tuple(int(ch) for ch in text)


def cmd_simulate(args, manifest: RunManifest) -> int:
    circuit = read_tfc(args.input)
    manifest.inputs.append(str(args.input))
    fixed = {}
    for item in args.fix or ():
        name, _, bit = item.partition("=")
        if bit not in ("0", "1"):
            raise InputError(f"--fix expects NAME=0|1, got {item!r}")
        fixed[_line(circuit, name)] = int(bit)
    if args.exhaustive:
        free = [i for i in range(circuit.n) if i not in fixed]
        if len(free) > MAX_SIMULATE_WIDTH:
            raise InputError(f"--exhaustive supports at most {MAX_SIMULATE_WIDTH} free lines")
        vectors = []
        for x in range(1 << len(free)):
            v = [0] * circuit.n
            for j, line in enumerate(free):
                v[line] = (x >> j) & 1
            for line, bit in fixed.items():
                v[line] = bit
            vectors.append(tuple(v))
    else:
        vectors = []
        for text in args.vector or ():
            v = list(_bits(text, circuit.n))
            for line, bit in fixed.items():
                v[line] = bit
            vectors.append(tuple(v))
        if not vectors:
            raise InputError("give --vector BITS (repeatable) or --exhaustive")
    rows = []
    identity = True
    for v in vectors:
        out = run(circuit, v)
        identity &= out == v
        rows.append({"input": "".join(map(str, v)), "output": "".join(map(str, out))})
    _emit({"lines": list(circuit.lines), "identity": identity, "rows": rows})
    if args.expect_identity and not identity:
        print("simulate: some vector is not a fixed point", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_transform(args, manifest: RunManifest) -> int:
    circuit = read_tfc(args.input)
    result = TRANSFORMS[args.method](circuit)
    save_tfc(result.circuit, args.output)
    manifest.inputs.append(str(args.input))
    manifest.method = args.method
    manifest.outputs.append(str(args.output))
    _emit(metrics.cost_delta(circuit, result.circuit).to_json())
    return EXIT_OK


def _random_vectors(circuit: Circuit, count: int, seed: int) -> tuple[tuple[int, ...], ...]:
    rng = random.Random(seed)
    vecs = []
    for _ in range(count):
        v = list(unpack(rng.getrandbits(circuit.n), circuit.n))
        for line, bit in circuit.constants.items():
            v[line] = bit
        vecs.append(tuple(v))
    return tuple(vecs)


def _resolve_rule(args, circuit: Circuit, prov: dict, default: ResponseRule) -> tuple[ResponseRule, int | None]:
    rule = ResponseRule(args.rule) if args.rule else default
    check = None
    if rule is ResponseRule.CHECK_LINE_ZERO:
        name = args.check_line or prov.get("check")
        if name is None:
            raise InputError("check-line rule needs --check-line or an online-transform provenance comment")
        check = _line(circuit, name)
    return rule, check


def _test_set(args, circuit: Circuit, prov: dict, universe) -> TestSet:
    method = prov.get("method", "")
    if method.startswith("online"):
        default = ResponseRule.CHECK_LINE_ZERO
    elif method.startswith("offline"):
        default = ResponseRule.IDENTITY
    else:
        default = ResponseRule.COMPARE

    if args.tests == "gts":
        name = args.test_line or prov.get("test")
        if name is None and args.rule == ResponseRule.IDENTITY.value:
            raise InputError("identity rule needs --test-line or an offline-transform provenance comment")
        tau = _line(circuit, name) if name is not None else circuit.n - 1
        ones = tuple(0 if i == tau else 1 for i in range(circuit.n))
        rule = ResponseRule(args.rule) if args.rule else (ResponseRule.IDENTITY if name else ResponseRule.COMPARE)
        return TestSet("gts", ((0,) * circuit.n, ones), rule)
    if args.tests == "file":
        if not args.vectors:
            raise InputError("--tests file needs --vectors PATH")
        ts = offline.read_vectors(args.vectors)
        rule, check = (ResponseRule(args.rule), None) if args.rule else (ts.rule, None)
        if rule is ResponseRule.CHECK_LINE_ZERO:
            rule, check = _resolve_rule(args, circuit, prov, rule)
        return TestSet(ts.name, ts.vectors, rule, check, labels=ts.labels)
    rule, check = _resolve_rule(args, circuit, prov, default)
    if args.tests == "random":
        return TestSet("random", _random_vectors(circuit, args.count, args.seed), rule, check)
    if circuit.n > faults.MAX_EXHAUSTIVE_WIDTH:
        raise InputError(f"exhaustive-greedy supports at most {faults.MAX_EXHAUSTIVE_WIDTH} lines; "
                         f"circuit has {circuit.n} (use --tests random or file)")
    return faults.greedy_minimal_testset(circuit, universe, rule=rule, check_line=check, name="exhaustive-greedy")


def _universe(args, circuit: Circuit, prov: dict):
    """Fault universe for grading; DFT hardware sites are left out unless --all-sites."""
    kind, k = faults.parse_fault_spec(args.faults)
    lines = segments = None
    method = prov.get("method", "")
    if not args.all_sites:
        if method.startswith("online") and "check" in prov:
            chk = _line(circuit, prov["check"])
            taps = circuit.n - 1
            segments = range(taps, circuit.g - taps + 1)
            lines = [i for i in range(circuit.n) if i != chk]
        elif method.startswith("offline") and "test" in prov:
            tau = _line(circuit, prov["test"])
            lines = [i for i in range(circuit.n) if i != tau]
    adjacent = kind is FaultKind.BRIDGING and not args.all_pairs
    universe = faults.enumerate_faults(circuit, kind, k, lines=lines, segments=segments, adjacent_only=adjacent,
                                       seed=args.seed)
    scope = {
        "kind": kind.value,
        "multiplicity": k,
        "lines": [circuit.lines[i] for i in (range(circuit.n) if lines is None else lines)],
        "segments": [0, circuit.g] if segments is None else [segments.start, segments.stop - 1],
        "sampled": universe.sampled,
    }
    return universe, scope


def cmd_grade(args, manifest: RunManifest) -> int:
    circuit = read_tfc(args.input)
    prov = provenance(circuit)
    universe, scope = _universe(args, circuit, prov)
    tests = _test_set(args, circuit, prov, universe)
    report = faults.grade(circuit, tests, universe, workers=args.workers)
    manifest.inputs.append(str(args.input))
    manifest.faults = args.faults
    manifest.tests = args.tests
    manifest.seed = args.seed
    out = report.to_json()
    out["tests"] = {"name": tests.name, "rule": tests.rule.value, "size": len(tests)}
    out["universe"] = scope
    _emit(out)
    if args.require is not None and report.coverage < args.require:
        print(f"coverage {report.coverage:.6f} below required {args.require}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _verify_dpe(spec: dpe.DpeSpec, built, seed: int = 0) -> list[str]:
    lay = dpe.layout(spec)
    circuit = built.circuit if spec.testable else lay.circuit
    chk = built.check_line if spec.testable else None
    failures = []
    for values, expect in _dpe_cases(spec, seed):
        got = dpe.evaluate(lay, values, circuit)
        if any(got[k] != v for k, v in expect.items()):
            failures.append(f"{values}: expected {expect}, got {got}")
        if chk is not None:
            state = [0] * circuit.n
            for line, v in circuit.constants.items():
                state[line] = v
            for name, lines in lay.operands.items():
                for i, line in enumerate(lines):
                    state[line] = (values.get(name, 0) >> i) & 1
            if run(circuit, state)[chk]:
                failures.append(f"{values}: check line raised fault-free")
    return failures


def _dpe_cases(spec: dpe.DpeSpec, seed: int = 0):
    if spec.element == "FA":
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    t = a + b + c
                    yield {"a": a, "b": b, "cin": c}, {"sum": t & 1, "carry": t >> 1}
    elif spec.element == "RCA":
        n = spec.width
        pairs = ((a, b, c) for a in range(1 << n) for b in range(1 << n) for c in range(2))
        if n > 4:
            rng = random.Random(seed)
            pairs = ((rng.getrandbits(n), rng.getrandbits(n), rng.getrandbits(1)) for _ in range(10_000))
        for a, b, c in pairs:
            t = a + b + c
            yield {"a": a, "b": b, "cin": c}, {"sum": t % (1 << n), "carry": t >> n}
    elif spec.element == "MUL4":
        for a in range(16):
            for b in range(16):
                yield {"a": a, "b": b}, {"product": a * b}
    else:
        n = spec.width
        mask = (1 << n) - 1
        for code, op in enumerate(spec.alu_ops):
            for a in range(1 << n):
                for b in range(1 << n):
                    r = {"ADD": a + b, "AND": a & b, "OR": a | b, "XOR": a ^ b}[op.upper()]
                    expect = {"result": r & mask}
                    if "ADD" in spec.alu_ops:
                        expect["carry"] = (r >> n) if op.upper() == "ADD" else 0
                    yield {"s": code, "A": a, "B": b}, expect


def cmd_dpe(args, manifest: RunManifest) -> int:
    ops = tuple(x.strip().upper() for x in args.ops.split(",")) if args.ops else dpe.ALU_OPS
    spec = dpe.DpeSpec(args.element, args.bits, args.testable, ops)
    built = dpe.build_testable(spec) if spec.testable else dpe.layout(spec)
    circuit = built.circuit
    save_tfc(circuit, args.output)
    report = metrics.cost_report(circuit).to_json()
    side = Path(args.output).with_suffix(".cost.json")
    side.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    manifest.method = f"dpe-{spec.element.lower()}"
    manifest.outputs += [str(args.output), str(side)]
    _emit(report)
    if args.verify:
        manifest.seed = args.seed
        failures = _verify_dpe(spec, built, args.seed)
        for f in failures[:20]:
            print(f"verify: {f}", file=sys.stderr)
        if failures:
            return EXIT_FAIL
        print("verify: all cases passed", file=sys.stderr)
    return EXIT_OK


def cmd_gts(args, manifest: RunManifest) -> int:
    try:
        ts = offline.family(args.family, args.width)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = offline.write_vectors(ts)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        manifest.outputs.append(str(args.output))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revdft", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--manifest", type=Path, help="write a JSON run manifest here")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="cost report of a TFC circuit")
    s.add_argument("input", type=Path)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("transform", help="apply a testability transform")
    s.add_argument("method", choices=sorted(TRANSFORMS))
    s.add_argument("input", type=Path)
    s.add_argument("output", type=Path)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("simulate", help="run input vectors through a circuit")
    s.add_argument("input", type=Path)
    s.add_argument("--vector", action="append", help="bit-string, line 0 first (repeatable)")
    s.add_argument("--exhaustive", action="store_true", help="every assignment of the lines not fixed by --fix")
    s.add_argument("--fix", action="append", metavar="NAME=BIT", help="hold a line at a value")
    s.add_argument("--expect-identity", action="store_true", help="exit 1 unless every output equals its input")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("grade", help="fault coverage of a test set")
    s.add_argument("input", type=Path)
    s.add_argument("--faults", default="stuck-at", help="kind[:k], e.g. stuck-at:2, bit-flip, bridging")
    s.add_argument("--tests", default="gts", choices=["gts", "file", "exhaustive-greedy", "random"])
    s.add_argument("--vectors", type=Path, help="vector file for --tests file")
    s.add_argument("--count", type=int, default=16, help="vector count for --tests random")
    s.add_argument("--rule", choices=[r.value for r in ResponseRule])
    s.add_argument("--check-line")
    s.add_argument("--test-line")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--require", type=float, help="exit 1 when coverage is below this fraction")
    s.add_argument("--all-sites", action="store_true", help="include DFT hardware sites (check line outside the checker region, test line)")
    s.add_argument("--all-pairs", action="store_true", help="bridge every line pair, not only adjacent ones")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_grade)

    s = sub.add_parser("dpe", help="generate a datapath element")
    s.add_argument("element", type=str.upper, choices=list(dpe.ELEMENTS))
    s.add_argument("output", type=Path)
    s.add_argument("--bits", type=int, default=4)
    s.add_argument("--ops", help="comma-separated ALU operations (default ADD,AND,OR,XOR)")
    s.add_argument("--testable", action="store_true")
    s.add_argument("--verify", action="store_true", help="self-check against integer arithmetic")
    s.add_argument("--seed", type=int, default=0, help="operand sampling seed for wide RCA checks")
    s.set_defaults(func=cmd_dpe)

    s = sub.add_parser("gts", help="write a general test-set family as a vector file")
    s.add_argument("--width", type=int, required=True)
    s.add_argument("--family", choices=sorted(offline.FAMILY_MIN_WIDTH), default="stuck2")
    s.add_argument("--output", type=Path)
    s.set_defaults(func=cmd_gts)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(args.command)
    try:
        code = args.func(args, manifest)
    except (TfcError, CircuitError, FaultError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.manifest:
        args.manifest.write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
