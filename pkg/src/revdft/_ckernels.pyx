# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels (circuits of at most 64 lines).

Same gate-table / fault-record layout and semantics as ``_pykernels``.
"""
from libc.stdint cimport uint64_t, int64_t

BACKEND = "cython"

cdef enum:
    MCT = 0
    MCF = 1
    OP_FLIP = 0
    OP_BAND = 1
    OP_BOR = 2
    OP_STUCK = 3
    OP_SKIP = 4
    OP_ADDCTL = 5
    OP_DELCTL = 6


cdef inline uint64_t _simulate(const uint64_t[:] table, Py_ssize_t g, const uint64_t[:] recs,
                               Py_ssize_t r, Py_ssize_t hi, uint64_t s) noexcept nogil:
    cdef uint64_t keep = <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef uint64_t force = 0
    cdef uint64_t one = 1
    cdef uint64_t pos, negm, op, m, v, both
    cdef Py_ssize_t level, b
    cdef uint64_t slot
    cdef unsigned int t1, t2, la, lb
    cdef bint skip
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
            if not skip and (s & pos) == pos and (s & negm) == 0:
                t1 = <unsigned int>table[b + 3]
                if table[b] == MCT:
                    s ^= one << t1
                else:
                    t2 = <unsigned int>table[b + 4]
                    if ((s >> t1) ^ (s >> t2)) & one:
                        s ^= (one << t1) | (one << t2)
            s = (s & keep) | force
        slot = 2 * level + 1
        while r < hi and recs[r] == slot:
            op = recs[r + 1]
            if op == OP_FLIP:
                s ^= recs[r + 2]
            elif op == OP_STUCK:
                m = recs[r + 2]
                keep &= ~m
                if recs[r + 3]:
                    force |= m
                else:
                    force &= ~m
            else:
                la = <unsigned int>recs[r + 2]
                lb = <unsigned int>recs[r + 3]
                if op == OP_BAND:
                    v = (s >> la) & (s >> lb) & one
                else:
                    v = ((s >> la) | (s >> lb)) & one
                both = (one << la) | (one << lb)
                s &= ~both
                if v:
                    s |= both
            s = (s & keep) | force
            r += 5
    return s


def run_many(const uint64_t[:] table, Py_ssize_t g, const uint64_t[:] recs, const uint64_t[:] vectors):
    cdef Py_ssize_t j, nv = vectors.shape[0], hi = recs.shape[0]
    out = [0] * nv
    for j in range(nv):
        out[j] = _simulate(table, g, recs, 0, hi, vectors[j])
    return out


def detect_any(const uint64_t[:] table, Py_ssize_t g, const uint64_t[:] recs, const int64_t[:] offsets,
               const uint64_t[:] vectors, const uint64_t[:] expected, uint64_t mask):
    cdef Py_ssize_t p, j, nprog = offsets.shape[0] - 1, nv = vectors.shape[0]
    result = bytearray(nprog)
    cdef unsigned char[:] out = result
    with nogil:
        for p in range(nprog):
            for j in range(nv):
                if (_simulate(table, g, recs, offsets[p], offsets[p + 1], vectors[j]) ^ expected[j]) & mask:
                    out[p] = 1
                    break
    return result


def detect_matrix(const uint64_t[:] table, Py_ssize_t g, const uint64_t[:] recs, const int64_t[:] offsets,
                  const uint64_t[:] vectors, const uint64_t[:] expected, uint64_t mask):
    cdef Py_ssize_t p, j, nprog = offsets.shape[0] - 1, nv = vectors.shape[0]
    result = bytearray(nprog * nv)
    cdef unsigned char[:] out = result
    with nogil:
        for p in range(nprog):
            for j in range(nv):
                if (_simulate(table, g, recs, offsets[p], offsets[p + 1], vectors[j]) ^ expected[j]) & mask:
                    out[p * nv + j] = 1
    return result
