"""Kernel selection and circuit encoding.

The compiled ``_ckernels`` extension is used when importable and the
circuit fits in a 64-bit word; otherwise the pure-Python interpreter runs.
Set ``REVDFT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import logging
import os
from array import array
from typing import Sequence

from . import _pykernels
from ._pykernels import MCF, MCT
from .circuit import Circuit, GateKind

log = logging.getLogger(__name__)

_ck = None
if not os.environ.get("REVDFT_PURE_PYTHON"):
    try:
        from . import _ckernels as _ck
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable; using pure Python")

BACKEND = _ck.BACKEND if _ck is not None else _pykernels.BACKEND
WORD_BITS = 64

__all__ = ["BACKEND", "gate_table", "run_many", "detect_any", "detect_matrix", "truth_table"]


def gate_table(circuit: Circuit) -> list[int]:
    table: list[int] = []
    for gate in circuit.gates:
        pos, negm = gate.masks()
        if gate.kind is GateKind.MCT:
            table += [MCT, pos, negm, gate.targets[0], 0]
        else:
            table += [MCF, pos, negm, gate.targets[0], gate.targets[1]]
    return table


def use_compiled(n: int, force_python: bool = False) -> bool:
    return _ck is not None and not force_python and n <= WORD_BITS


def run_many(circuit: Circuit, vectors: Sequence[int], records: Sequence[int] = (),
             force_python: bool = False, table: Sequence[int] | None = None) -> list[int]:
    """Packed outputs for packed inputs, optionally with fault records injected."""
    table = gate_table(circuit) if table is None else table
    if use_compiled(circuit.n, force_python):
        return _ck.run_many(array("Q", table), circuit.g, array("Q", records), array("Q", vectors))
    return _pykernels.run_many(table, circuit.g, list(records), list(vectors))


def detect_any(circuit: Circuit, table, records, offsets, vectors, expected, mask,
               force_python: bool = False) -> bytearray:
    """Per fault set: 1 iff some vector's output differs from expected on ``mask``."""
    if use_compiled(circuit.n, force_python):
        return _ck.detect_any(array("Q", table), circuit.g, array("Q", records), array("q", offsets),
                              array("Q", vectors), array("Q", expected), mask)
    return _pykernels.detect_any(table, circuit.g, records, offsets, vectors, expected, mask)


def detect_matrix(circuit: Circuit, table, records, offsets, vectors, expected, mask,
                  force_python: bool = False) -> bytearray:
    """Row-major fault-set x vector detection flags."""
    if use_compiled(circuit.n, force_python):
        return _ck.detect_matrix(array("Q", table), circuit.g, array("Q", records), array("q", offsets),
                                 array("Q", vectors), array("Q", expected), mask)
    return _pykernels.detect_matrix(table, circuit.g, records, offsets, vectors, expected, mask)


def truth_table(circuit: Circuit, force_python: bool = False) -> list[int]:
    """Packed outputs for all 2^n packed inputs, in input order."""
    return run_many(circuit, range(1 << circuit.n), force_python=force_python)
