"""Design-for-testability toolkit for reversible MCT/MCF circuits."""
from .circuit import (Circuit, CircuitError, Control, Gate, GateKind, apply_gate, inverse, mcf, mct, neg, pack,
                      run, run_traced, unpack, validate)
from .faults import (Bridging, BitFlip, CoverageReport, CrossPointAppearance, CrossPointDisappearance,
                     FaultKind, FaultUniverse, MissingGate, ResponseRule, StuckAt, TestSet, enumerate_faults,
                     grade, greedy_minimal_testset, run_faulty)
from .kernels import BACKEND
from .metrics import CostDelta, CostReport, cost_delta, cost_report, quantum_cost_of_gate
from .offline import (OfflineTestableCircuit, gts_stuck_at, mcf_offline_testsets, modify_mct_offline,
                      modify_mctf_offline)
from .online import (OnlineTestableCircuit, add_parity_checker, convert_mct_to_mctf_online,
                     make_parity_preserving_mcf, make_parity_preserving_mct, modify_mcf_online, modify_mct_online)
from .tfc import TfcError, parse_tfc, read_tfc, write_tfc

__version__ = "0.1.0"
