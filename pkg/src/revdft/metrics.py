"""Cost metrics: wires, gate cost, quantum cost, constant inputs, garbage."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .circuit import Circuit, Gate, GateKind

__all__ = ["CostReport", "CostDelta", "mct_quantum_cost", "quantum_cost_of_gate", "cost_report",
           "cost_delta"]


def mct_quantum_cost(c: int) -> int:
    """Quantum cost of an MCT gate with ``c`` controls (no-ancilla table)."""
    if c <= 1:
        return 1
    return 2 ** (c + 1) - 3


def quantum_cost_of_gate(gate: Gate) -> int:
    # Negative controls cost the same as positive ones.
    c = len(gate.controls)
    if gate.kind is GateKind.MCT:
        return mct_quantum_cost(c)
    if c == 0:
        return 3
    if c == 1:
        return 5
    return 2 + mct_quantum_cost(c + 1)


@dataclass(frozen=True)
class CostReport:
    wires: int
    gate_cost: int
    quantum_cost: int
    constant_inputs: int
    garbage_outputs: int

    def to_json(self) -> dict:
        return asdict(self)


def cost_report(circuit: Circuit) -> CostReport:
    return CostReport(
        wires=circuit.n,
        gate_cost=circuit.g,
        quantum_cost=sum(quantum_cost_of_gate(g) for g in circuit.gates),
        constant_inputs=circuit.n - len(circuit.inputs),
        garbage_outputs=circuit.n - len(circuit.outputs),
    )


@dataclass(frozen=True)
class MetricChange:
    baseline: int
    transformed: int

    @property
    def absolute(self) -> int:
        return self.transformed - self.baseline

    @property
    def percent(self) -> float | None:
        """None when the baseline is 0 (serialized as "n/a")."""
        if self.baseline == 0:
            return None
        return 100.0 * self.absolute / self.baseline

    def to_json(self) -> dict:
        pct = self.percent
        return {"absolute": self.absolute, "percent": "n/a" if pct is None else pct}


@dataclass(frozen=True)
class CostDelta:
    wires: MetricChange
    gate_cost: MetricChange
    quantum_cost: MetricChange
    constant_inputs: MetricChange
    garbage_outputs: MetricChange

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name).to_json() for f in fields(self)}


def cost_delta(baseline: Circuit, transformed: Circuit) -> CostDelta:
    old, new = cost_report(baseline), cost_report(transformed)
    return CostDelta(**{f.name: MetricChange(getattr(old, f.name), getattr(new, f.name))
                        for f in fields(CostReport)})
