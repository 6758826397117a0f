"""Pure-Python simulation kernels.

Reference implementation; the Cython module ``_ckernels`` mirrors it for
circuits of at most 64 lines.  States are ints with bit i holding line i.

A circuit is a flat *gate table*, five words per gate::

    kind pos neg t1 t2        kind 0 = MCT (target t1), 1 = MCF (swap t1, t2)

Faults arrive as *records*, five words each, sorted by (slot, op)::

    slot op a b c

Slot ``2*k + 1`` is segment k (after gate k); slot ``2*L`` is gate level L.
Segment ops: FLIP (a = mask), BAND / BOR (a, b = line indices),
STUCK (a = mask, b = value).  Gate ops: SKIP, ADDCTL (a = mask,
b = positive), DELCTL (a = mask).  Lines currently stuck are re-forced
after every gate and every segment op, which makes stuck-at faults persist
from their segment to the outputs.
"""

MCT = 0
MCF = 1

OP_FLIP = 0
OP_BAND = 1
OP_BOR = 2
OP_STUCK = 3
OP_SKIP = 4
OP_ADDCTL = 5
OP_DELCTL = 6

STRIDE = 5
BACKEND = "python"


def simulate(table, g, recs, lo, hi, s):
    keep = -1
    force = 0
    r = lo
    for level in range(g + 1):
        if level:
            b = (level - 1) * 5
            pos = table[b + 1]
            negm = table[b + 2]
            skip = False
            slot = 2 * level
            while r < hi and recs[r] == slot:
                op = recs[r + 1]
                if op == OP_SKIP:
                    skip = True
                elif op == OP_ADDCTL:
                    if recs[r + 3]:
                        pos |= recs[r + 2]
                    else:
                        negm |= recs[r + 2]
                else:
                    pos &= ~recs[r + 2]
                    negm &= ~recs[r + 2]
                r += 5
            if not skip and (s & pos) == pos and not (s & negm):
                t1 = table[b + 3]
                if table[b] == MCT:
                    s ^= 1 << t1
                else:
                    t2 = table[b + 4]
                    if ((s >> t1) ^ (s >> t2)) & 1:
                        s ^= (1 << t1) | (1 << t2)
            s = (s & keep) | force
        slot = 2 * level + 1
        while r < hi and recs[r] == slot:
            op = recs[r + 1]
            if op == OP_FLIP:
                s ^= recs[r + 2]
            elif op == OP_STUCK:
                m = recs[r + 2]
                keep &= ~m
                force = (force & ~m) | (m if recs[r + 3] else 0)
            else:
                a = recs[r + 2]
                bl = recs[r + 3]
                va = (s >> a) & 1
                vb = (s >> bl) & 1
                v = (va & vb) if op == OP_BAND else (va | vb)
                s &= ~((1 << a) | (1 << bl))
                if v:
                    s |= (1 << a) | (1 << bl)
            s = (s & keep) | force
            r += 5
    return s


def run_many(table, g, recs, vectors):
    hi = len(recs)
    return [simulate(table, g, recs, 0, hi, v) for v in vectors]


def detect_any(table, g, recs, offsets, vectors, expected, mask):
    out = bytearray(len(offsets) - 1)
    pairs = list(zip(vectors, expected))
    for p in range(len(offsets) - 1):
        lo, hi = offsets[p], offsets[p + 1]
        for v, e in pairs:
            if (simulate(table, g, recs, lo, hi, v) ^ e) & mask:
                out[p] = 1
                break
    return out


def detect_matrix(table, g, recs, offsets, vectors, expected, mask):
    nv = len(vectors)
    out = bytearray((len(offsets) - 1) * nv)
    for p in range(len(offsets) - 1):
        lo, hi = offsets[p], offsets[p + 1]
        row = p * nv
        for j in range(nv):
            if (simulate(table, g, recs, lo, hi, vectors[j]) ^ expected[j]) & mask:
                out[row + j] = 1
    return out
