"""TFC netlist reader/writer.

Accepted dialect::

    # comment (full-line comments are kept as circuit metadata)
    .v a,b,c,d        variable order
    .i a,b,c          primary inputs (default: all variables)
    .o d              primary outputs (default: all variables)
    .c 0              constant bits, in order, for variables not in .i
    BEGIN
    t3 a,b',d         MCT: last operand is the target, b' is a negative control
    f3 a,c,d          MCF: last two operands are swapped
    END

Names are case-sensitive; LF and CRLF line endings are accepted, LF is
emitted.
"""
from __future__ import annotations

import re
from pathlib import Path

from .circuit import Circuit, Control, Gate, GateKind, validate

__all__ = ["TfcError", "parse_tfc", "write_tfc", "read_tfc", "save_tfc"]

_GATE_RE = re.compile(r"^([tf])(\d+)$")
_PLA_HINTS = {".p", ".e", ".type", ".ilb", ".ob", ".end"}


class TfcError(ValueError):
    def __init__(self, lineno: int, rule: str, detail: str = ""):
        self.lineno = lineno
        self.rule = rule
        msg = f"line {lineno}: {rule}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def _names(arg: str) -> list[str]:
    return [tok for tok in re.split(r"[,\s]+", arg.strip()) if tok]


def _split_head(body: str) -> tuple[str, str]:
    parts = body.split(None, 1)
    return parts[0], parts[1] if len(parts) > 1 else ""


def _looks_like_pla(lines: list[str]) -> bool:
    for raw in lines:
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        head = parts[0]
        if head in _PLA_HINTS:
            return True
        if head in (".i", ".o") and len(parts) == 2 and parts[1].isdigit():
            return True
    return False


def parse_tfc(text: str) -> Circuit:
    """Parse TFC text into a validated :class:`Circuit`; raises :class:`TfcError`."""
    raw_lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    if len(raw_lines) > 1 and raw_lines[-1] == "":
        raw_lines.pop()  # final newline terminates the last line
    if _looks_like_pla(raw_lines):
        raise TfcError(1, "unsupported: use TFC", "PLA input is not accepted (synthesis is out of scope)")

    variables: list[str] | None = None
    inputs = outputs = consts = None
    seen: set[str] = set()
    metadata: list[str] = []
    gates: list[Gate] = []
    state = "header"

    for lineno, raw in enumerate(raw_lines, start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            metadata.append(stripped[1:].strip())
            continue
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if state == "done":
            raise TfcError(lineno, "content after END", body)
        if state == "header":
            if body == "BEGIN":
                if variables is None:
                    raise TfcError(lineno, "missing .v directive before BEGIN")
                state = "gates"
                continue
            head, arg = _split_head(body)
            if head not in (".v", ".i", ".o", ".c"):
                raise TfcError(lineno, "unknown directive", head)
            if head in seen:
                raise TfcError(lineno, "repeated directive", head)
            seen.add(head)
            toks = _names(arg)
            if head == ".v":
                if len(set(toks)) != len(toks):
                    raise TfcError(lineno, "duplicate variable in .v")
                if any("'" in t for t in toks):
                    raise TfcError(lineno, "invalid variable name", "apostrophe not allowed")
                variables = toks
            elif head == ".c":
                if len(toks) == 1 and len(toks[0]) > 1:
                    toks = list(toks[0])
                if any(t not in ("0", "1") for t in toks):
                    raise TfcError(lineno, "constant values must be 0 or 1", arg.strip())
                consts = (lineno, [int(t) for t in toks])
            else:
                if variables is None:
                    raise TfcError(lineno, f"{head} before .v")
                unknown = [t for t in toks if t not in variables]
                if unknown:
                    raise TfcError(lineno, "reference to undeclared variable", ",".join(unknown))
                if len(set(toks)) != len(toks):
                    raise TfcError(lineno, f"duplicate variable in {head}")
                if head == ".i":
                    inputs = toks
                else:
                    outputs = toks
            continue
        if body == "END":
            state = "done"
            continue
        gates.append(_parse_gate(lineno, body, variables))

    if variables is None:
        raise TfcError(len(raw_lines), "missing .v directive")
    if state == "header":
        raise TfcError(len(raw_lines), "missing BEGIN")
    if state == "gates":
        raise TfcError(len(raw_lines), "missing END")

    index = {name: i for i, name in enumerate(variables)}
    input_set = set(inputs) if inputs is not None else set(variables)
    non_inputs = [index[v] for v in variables if v not in input_set]
    if consts is None:
        constants = {i: 0 for i in non_inputs}
    else:
        c_line, bits = consts
        if len(bits) != len(non_inputs):
            raise TfcError(c_line, "constant count mismatch",
                           f"{len(non_inputs)} non-input variable(s), {len(bits)} constant(s)")
        constants = dict(zip(non_inputs, bits))
    out_set = None if outputs is None else frozenset(index[o] for o in outputs)
    circuit = Circuit(tuple(variables), tuple(gates), constants, out_set, tuple(metadata))
    problems = validate(circuit)
    if problems:
        raise TfcError(1, "invalid circuit", "; ".join(problems))
    return circuit


def _parse_gate(lineno: int, body: str, variables: list[str]) -> Gate:
    head, arg = _split_head(body)
    m = _GATE_RE.match(head)
    if not m:
        raise TfcError(lineno, "unknown gate", head)
    kind = GateKind.MCT if m.group(1) == "t" else GateKind.MCF
    k = int(m.group(2))
    ops = _names(arg)
    if len(ops) != k:
        raise TfcError(lineno, "operand count mismatch", f"{head} expects {k} operand(s), got {len(ops)}")
    n_targets = 1 if kind is GateKind.MCT else 2
    if k < n_targets:
        raise TfcError(lineno, "operand count mismatch", f"{head} needs at least {n_targets} operand(s)")
    for op in ops:
        if not op or op == "'" * len(op) or op.count("'") > 1 or ("'" in op and not op.endswith("'")):
            raise TfcError(lineno, "malformed control" if op not in ops[-n_targets:] else "malformed operand", op)
    bare = [op.rstrip("'") for op in ops]
    if len(set(bare)) != len(bare):
        raise TfcError(lineno, "duplicate operand within a gate", ",".join(ops))
    index = {name: i for i, name in enumerate(variables)}
    unknown = [b for b in bare if b not in index]
    if unknown:
        raise TfcError(lineno, "reference to undeclared variable", ",".join(unknown))
    controls, targets = ops[:-n_targets], ops[-n_targets:]
    if any(t.endswith("'") for t in targets):
        raise TfcError(lineno, "apostrophe on a target", ",".join(targets))
    ctl = [Control(index[c.rstrip("'")], not c.endswith("'")) for c in controls]
    return Gate(kind, tuple(ctl), tuple(index[t] for t in targets))


def _gate_text(gate: Gate, names: tuple[str, ...]) -> str:
    ops = [names[c.line] + ("" if c.positive else "'") for c in gate.controls]
    ops += [names[t] for t in gate.targets]
    letter = "t" if gate.kind is GateKind.MCT else "f"
    return f"{letter}{len(ops)} {','.join(ops)}"


def write_tfc(circuit: Circuit) -> str:
    names = circuit.lines
    out = [f"# {m}".rstrip() for m in circuit.metadata]
    out.append(".v " + ",".join(names))
    out.append(".i " + ",".join(names[i] for i in range(circuit.n) if i in circuit.inputs))
    out.append(".o " + ",".join(names[i] for i in range(circuit.n) if i in circuit.outputs))
    if circuit.constants:
        out.append(".c " + ",".join(str(circuit.constants[i]) for i in sorted(circuit.constants)))
    out.append("BEGIN")
    out.extend(_gate_text(g, names) for g in circuit.gates)
    out.append("END")
    return "\n".join(line.rstrip() for line in out) + "\n"


def read_tfc(path: str | Path) -> Circuit:
    path = Path(path)
    if path.suffix.lower() == ".pla":
        raise TfcError(1, "unsupported: use TFC", f"{path.name} is a PLA file")
    return parse_tfc(path.read_text(encoding="utf-8"))


def save_tfc(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(write_tfc(circuit), encoding="utf-8", newline="\n")
