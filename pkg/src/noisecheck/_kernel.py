"""Fused numba kernel for one noise level of a degradation curve.

Reproduces, sample by sample, ``perturb_table`` -> ``score_dataset`` ->
``spearman_rho`` without materialising the uniforms in Python. The Philox
implementation here is bit-identical to ``numpy.random.Philox`` (checked in
the test suite); per-coordinate noise is bit-identical to
``vector_space.noise_matrix``. Cosines and correlations are summed
sequentially, so they agree with the numpy route to rounding, not bitwise.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np
from llvmlite import ir
from numba import types
from numba.extending import intrinsic

_U = np.uint64
_M0 = _U(0xD2E7470EE14C6C93)
_M1 = _U(0xCA5A826395121157)
_W0 = _U(0x9E3779B97F4A7C15)
_W1 = _U(0xBB67AE8584CAA73B)
_SHIFT = _U(11)
_ONE = _U(1)
_UNIT = 1.0 / (1 << 53)

SHAPE_PER_COORDINATE = 0
SHAPE_BALL = 1


@intrinsic
def _mulhilo(typingctx, a, b):
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        i128 = ir.IntType(128)
        i64 = ir.IntType(64)
        p = builder.mul(builder.zext(args[0], i128), builder.zext(args[1], i128))
        lo = builder.trunc(p, i64)
        hi = builder.trunc(builder.lshr(p, ir.Constant(i128, 64)), i64)
        return context.make_tuple(builder, signature.return_type, [hi, lo])

    return sig, codegen


@nb.njit(inline="always")
def _round(c0, c1, c2, c3, k0, k1):
    h0, l0 = _mulhilo(_M0, c0)
    h1, l1 = _mulhilo(_M1, c2)
    return h1 ^ c1 ^ k0, l1, h0 ^ c3 ^ k1, l0


@nb.njit(inline="always")
def philox4x64_10(c0, c1, c2, c3, k0, k1):
    # rounds unrolled by hand; a loop here runs ~3x slower
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    c0, c1, c2, c3 = _round(c0, c1, c2, c3, k0, k1)
    k0 += _W0; k1 += _W1
    return _round(c0, c1, c2, c3, k0, k1)


@nb.njit(cache=True)
def raw_stream(k0, k1, c1, c2, c3, nblocks):
    """First ``4 * nblocks`` raw words of a stream (test hook)."""
    out = np.empty(4 * nblocks, dtype=np.uint64)
    for b in range(nblocks):
        x0, x1, x2, x3 = philox4x64_10(_U(b) + _ONE, c1, c2, c3, k0, k1)
        out[4 * b] = x0
        out[4 * b + 1] = x1
        out[4 * b + 2] = x2
        out[4 * b + 3] = x3
    return out


@nb.njit(inline="always")
def _fill_uniforms(k0, k1, c1, c2, c3, start, count, out):
    j = 0
    b = start >> 2
    lane = start & 3
    while j < count:
        x0, x1, x2, x3 = philox4x64_10(_U(b) + _ONE, c1, c2, c3, k0, k1)
        while lane < 4 and j < count:
            if lane == 0:
                r = x0
            elif lane == 1:
                r = x1
            elif lane == 2:
                r = x2
            else:
                r = x3
            out[j] = float(r >> _SHIFT) * _UNIT
            j += 1
            lane += 1
        lane = 0
        b += 1


@nb.njit(cache=True)
def uniforms(k0, k1, c1, c2, c3, start, count):
    """Uniforms ``[start, start + count)`` of a stream (test hook)."""
    out = np.empty(count)
    _fill_uniforms(k0, k1, c1, c2, c3, start, count, out)
    return out


@nb.njit(inline="always")
def _ball_direction(u, d, eps, out):
    half = (u.size - 1) // 2
    ss = 0.0
    for i in range(half):
        r = math.sqrt(-2.0 * math.log1p(-u[2 * i]))
        theta = 2.0 * math.pi * u[2 * i + 1]
        if 2 * i < d:
            out[2 * i] = r * math.cos(theta)
        if 2 * i + 1 < d:
            out[2 * i + 1] = r * math.sin(theta)
    for i in range(d):
        ss += out[i] * out[i]
    norm = math.sqrt(ss)
    if norm > 0.0:
        scale = eps * u[u.size - 1] ** (1.0 / d) / norm
        for i in range(d):
            out[i] *= scale
    else:
        for i in range(d):
            out[i] = 0.0


@nb.njit(inline="always")
def _rank_pearson(gold_ranks, scores, order, ranks):
    """Spearman's rho of scores against precomputed gold ranks; NaN if undefined."""
    n = scores.size
    order[:] = np.argsort(scores, kind="mergesort")
    i = 0
    while i < n:
        j = i + 1
        while j < n and scores[order[j]] == scores[order[i]]:
            j += 1
        avg = (i + j + 1) / 2.0
        for t in range(i, j):
            ranks[order[t]] = avg
        i = j
    if ranks[order[0]] == ranks[order[n - 1]]:
        return np.nan
    mg = 0.0
    mr = 0.0
    for t in range(n):
        mg += gold_ranks[t]
        mr += ranks[t]
    mg /= n
    mr /= n
    sgg = 0.0
    srr = 0.0
    sgr = 0.0
    for t in range(n):
        dg = gold_ranks[t] - mg
        dr = ranks[t] - mr
        sgg += dg * dg
        srr += dr * dr
        sgr += dg * dr
    rho = sgr / math.sqrt(sgg * srr)
    return min(1.0, max(-1.0, rho))


@nb.njit(cache=True)
def level_rhos(clean, pairs, gold_ranks, k0, k1, repetition, level, eps, shape, first_sample, k):
    """Spearman's rho for samples ``first_sample .. first_sample + k - 1`` at one level.

    ``clean`` is the (words, d) table restricted to the dataset vocabulary,
    ``pairs`` the (n, 2) row indices of each pair. Returns the rho values
    and a boolean mask of degenerate samples (rho undefined, reported as 0).
    """
    n_words, d = clean.shape
    n = pairs.shape[0]
    if shape == SHAPE_PER_COORDINATE:
        stride = d
    else:
        stride = 2 * ((d + 1) // 2) + 1
    u = np.empty(stride)
    buf = np.empty(d)
    noisy = np.empty((n_words, d))
    sq = np.empty(n_words)
    scores = np.empty(n)
    order = np.empty(n, dtype=np.int64)
    ranks = np.empty(n)
    rhos = np.empty(k)
    degenerate = np.zeros(k, dtype=np.bool_)
    c3 = _U(repetition)
    c2 = _U(level)
    for s in range(k):
        c1 = _U(first_sample + s)
        for w in range(n_words):
            _fill_uniforms(k0, k1, c1, c2, c3, w * stride, stride, u)
            if shape == SHAPE_PER_COORDINATE:
                for i in range(d):
                    noisy[w, i] = clean[w, i] + eps * (2.0 * u[i] - 1.0)
            else:
                _ball_direction(u, d, eps, buf)
                for i in range(d):
                    noisy[w, i] = clean[w, i] + buf[i]
            acc = 0.0
            for i in range(d):
                acc += noisy[w, i] * noisy[w, i]
            sq[w] = acc
        bad = False
        for p in range(n):
            a = pairs[p, 0]
            b = pairs[p, 1]
            if sq[a] == 0.0 or sq[b] == 0.0:
                bad = True
                break
            dot = 0.0
            for i in range(d):
                dot += noisy[a, i] * noisy[b, i]
            c = dot / math.sqrt(sq[a] * sq[b])
            scores[p] = min(1.0, max(-1.0, c))
        rho = np.nan if bad else _rank_pearson(gold_ranks, scores, order, ranks)
        if np.isnan(rho):
            degenerate[s] = True
            rhos[s] = 0.0
        else:
            rhos[s] = rho
    return rhos, degenerate
