"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Each workload runs on both backends; outputs are checked for equality before
timings are reported.
"""
import argparse
import random
import statistics
import sys
import time

from revdft import fixtures, kernels
from revdft.circuit import Circuit, Control, Gate, GateKind
from revdft.faults import ResponseRule, TestSet, detection_matrix, enumerate_faults, grade
from revdft.offline import gts_stuck_at, modify_mct_offline
from revdft.online import modify_mct_online


def random_circuit(rng, n, g):
    gates = []
    for _ in range(g):
        lines = rng.sample(range(n), n)
        kind = rng.choice((GateKind.MCT, GateKind.MCF))
        k = 1 if kind is GateKind.MCT else 2
        ctl = tuple(Control(l, rng.random() < 0.7) for l in lines[k:k + rng.randint(0, min(4, n - k))])
        gates.append(Gate(kind, ctl, tuple(lines[:k])))
    return Circuit(tuple(f"x{i}" for i in range(n)), tuple(gates))


def workloads(seed):
    rng = random.Random(seed)
    wide = random_circuit(rng, 16, 40)
    yield "truth table, 16 lines x 40 gates", lambda py: kernels.truth_table(wide, force_python=py)

    off = modify_mct_offline(fixtures.load("mct6")).circuit
    u3 = enumerate_faults(off, "stuck-at", 3)
    gts = gts_stuck_at(off.n)
    yield f"GTS grading, {len(u3)} stuck-at sets (k<=3)", lambda py: grade(off, gts, u3, force_python=py).undetected

    on = modify_mct_online(fixtures.load("mct6"))
    flips = enumerate_faults(on.circuit, "bit-flip", lines=on.original_lines, segments=on.region_segments())
    vecs = tuple(tuple((x >> i) & 1 for i in range(on.circuit.n)) for x in range(1 << 6))
    ts = TestSet("all", vecs, ResponseRule.CHECK_LINE_ZERO, on.check_line)
    yield (f"detection matrix, {len(flips)} bit-flips x {len(vecs)} vectors",
           lambda py: detection_matrix(on.circuit, ts, flips, force_python=py))


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print(f"compiled kernels not available (backend={kernels.BACKEND}); nothing to compare", file=sys.stderr)
        return 1
    print(f"{'workload':52} {'cython':>10} {'python':>10} {'speedup':>8}")
    for name, fn in workloads(args.seed):
        fast, t_c = timed(lambda: fn(False), args.repeat)
        slow, t_p = timed(lambda: fn(True), args.repeat)
        if fast != slow:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        print(f"{name:52} {t_c:9.4f}s {t_p:9.4f}s {t_p / t_c:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
