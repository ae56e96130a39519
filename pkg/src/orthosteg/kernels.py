"""Batched per-block embed/extract kernels.

Each block is an 8x8 pixel tile together with a gather order (from the
permutation mask), up to 8 message bits and the number of bits it carries.
Two implementations share one summation order, so the numba loops and the
vectorized numpy code give bit-identical results:

* matrix products accumulate ``k = 0..7`` starting from ``0.0``;
* rounding is half away from zero via ``copysign(floor(|x| + 0.5), x)``.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit
from .transform import ZIGZAG

_ZZ = ZIGZAG.astype(np.int64)


# numba implementation ---------------------------------------------------


@njit(cache=True)
def _nb_round(x):
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


@njit(cache=True)
def _nb_coeffs(block, A, C, Q, zz, out):
    """Quantized zigzag vector of one pixel block into ``out`` (64 floats)."""
    T = np.empty((8, 8))
    for m in range(8):
        for j in range(8):
            s = 0.0
            for i in range(8):
                s += A[m, i] * block[i, j]
            T[m, j] = s
    M = np.empty(64)
    for m in range(8):
        for n in range(8):
            s = 0.0
            for j in range(8):
                s += T[m, j] * C[n, j]
            M[8 * m + n] = _nb_round(s / Q[m, n])
    for t in range(64):
        out[t] = M[zz[t]]


@njit(cache=True)
def _nb_pixels(v, A, C, Q, zz, out):
    """Rounded, clipped pixel block from a quantized zigzag vector."""
    M = np.empty((8, 8))
    for t in range(64):
        r = zz[t]
        M[r // 8, r % 8] = v[t] * Q[r // 8, r % 8]
    U = np.empty((8, 8))
    for i in range(8):
        for n in range(8):
            s = 0.0
            for m in range(8):
                s += A[m, i] * M[m, n]
            U[i, n] = s
    for i in range(8):
        for j in range(8):
            s = 0.0
            for n in range(8):
                s += U[i, n] * C[n, j]
            p = _nb_round(s)
            if p < 0.0:
                p = 0.0
            elif p > 255.0:
                p = 255.0
            out[i, j] = p


@njit(cache=True)
def _nb_write(v, perm, bits, nbits):
    for q in range(nbits):
        pos = 1 + perm[q]
        a = v[pos]
        mag = np.int64(np.abs(a))
        mag = (mag & ~np.int64(1)) | np.int64(bits[q])
        v[pos] = -float(mag) if a < 0 else float(mag)


@njit(cache=True)
def _nb_mismatch(v, perm, bits, nbits):
    bad = 0
    for q in range(nbits):
        if (np.int64(np.abs(v[1 + perm[q]])) & 1) != bits[q]:
            bad += 1
    return bad


@njit(cache=True)
def _nb_embed(blocks, A, C, Q, zz, perms, bits, nbits, max_iters, out, iters, mismatches):
    v = np.empty(64)
    check = np.empty(64)
    px = np.empty((8, 8))
    for b in range(blocks.shape[0]):
        _nb_coeffs(blocks[b], A, C, Q, zz, v)
        best = -1
        it = 0
        while True:
            _nb_write(v, perms[b], bits[b], nbits[b])
            _nb_pixels(v, A, C, Q, zz, px)
            _nb_coeffs(px, A, C, Q, zz, check)
            bad = _nb_mismatch(check, perms[b], bits[b], nbits[b])
            if best < 0 or bad < best:
                best = bad
                iters[b] = it
                for i in range(8):
                    for j in range(8):
                        out[b, i, j] = px[i, j]
            if bad == 0 or it >= max_iters:
                break
            it += 1
            for t in range(64):
                v[t] = check[t]
        mismatches[b] = best


@njit(cache=True)
def _nb_extract(blocks, A, C, Q, zz, perms, out):
    v = np.empty(64)
    for b in range(blocks.shape[0]):
        _nb_coeffs(blocks[b], A, C, Q, zz, v)
        for q in range(8):
            out[b, q] = np.int64(np.abs(v[1 + perms[b, q]])) & 1


# numpy implementation ---------------------------------------------------


def _np_round(x):
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def _np_coeffs(blocks, A, C, Q):
    n = blocks.shape[0]
    T = np.zeros((n, 8, 8))
    for i in range(8):
        T = T + A[None, :, i, None] * blocks[:, None, i, :]
    M = np.zeros((n, 8, 8))
    for j in range(8):
        M = M + T[:, :, j, None] * C[None, None, :, j]
    return _np_round(M / Q).reshape(n, 64)[:, _ZZ]


def _np_pixels(v, A, C, Q):
    n = v.shape[0]
    M = np.empty((n, 64))
    M[:, _ZZ] = v
    M = M.reshape(n, 8, 8) * Q
    U = np.zeros((n, 8, 8))
    for m in range(8):
        U = U + A[None, m, :, None] * M[:, None, m, :]
    P = np.zeros((n, 8, 8))
    for k in range(8):
        P = P + U[:, :, k, None] * C[None, None, k, :]
    return np.clip(_np_round(P), 0.0, 255.0)


def _np_active(perms, nbits):
    cols = 1 + perms
    active = np.arange(8)[None, :] < nbits[:, None]
    return cols, active


def _np_write(v, perms, bits, nbits):
    cols, active = _np_active(perms, nbits)
    rows = np.arange(v.shape[0])[:, None]
    a = v[rows, cols]
    mag = np.abs(a).astype(np.int64)
    mag = (mag & ~np.int64(1)) | bits.astype(np.int64)
    new = np.where(a < 0, -mag.astype(np.float64), mag.astype(np.float64))
    v = v.copy()
    v[rows, cols] = np.where(active, new, a)
    return v


def _np_mismatch(v, perms, bits, nbits):
    cols, active = _np_active(perms, nbits)
    got = np.abs(v[np.arange(v.shape[0])[:, None], cols]).astype(np.int64) & 1
    return ((got != bits) & active).sum(axis=1)


def _np_embed(blocks, A, C, Q, perms, bits, nbits, max_iters):
    n = blocks.shape[0]
    out = np.empty((n, 8, 8))
    iters = np.zeros(n, dtype=np.int64)
    best = np.full(n, -1, dtype=np.int64)
    v = _np_coeffs(blocks, A, C, Q)
    idx = np.arange(n)
    it = 0
    while idx.size:
        v = _np_write(v, perms[idx], bits[idx], nbits[idx])
        px = _np_pixels(v, A, C, Q)
        check = _np_coeffs(px, A, C, Q)
        bad = _np_mismatch(check, perms[idx], bits[idx], nbits[idx])
        better = (best[idx] < 0) | (bad < best[idx])
        upd = idx[better]
        out[upd] = px[better]
        best[upd] = bad[better]
        iters[upd] = it
        if it >= max_iters:
            break
        keep = bad > 0
        idx, v = idx[keep], check[keep]
        it += 1
    return out, iters, best


def _np_extract(blocks, A, C, Q, perms):
    v = _np_coeffs(blocks, A, C, Q)
    got = np.abs(v[np.arange(v.shape[0])[:, None], 1 + perms]).astype(np.int64) & 1
    return got.astype(np.uint8)


# public entry points ----------------------------------------------------


def _resolve(backend):
    backend = backend or _accel.default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def _prep(blocks, A, C, Q, perms):
    blocks = np.ascontiguousarray(blocks, dtype=np.float64).reshape(-1, 8, 8)
    A = np.ascontiguousarray(A, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    perms = np.ascontiguousarray(perms, dtype=np.int64).reshape(-1, 8)
    if perms.shape[0] != blocks.shape[0]:
        raise ValueError("one gather order per block is required")
    return blocks, A, C, Q, perms


def embed_blocks(blocks, A, C, Q, perms, bits, nbits, max_iters=16, backend=None):
    """Embed bits into each block and verify through the pixel domain.

    ``perms[b]`` is the gather order applied to zigzag positions 1..8,
    ``bits[b, :nbits[b]]`` the bits written in permuted order. When a block's
    re-extracted bits disagree, the write is repeated on the re-quantized
    coefficients, at most ``max_iters`` more times; the attempt with the
    fewest mismatches is kept.

    Returns ``(pixels uint8 (N, 8, 8), iterations (N,), mismatches (N,))``.
    """
    blocks, A, C, Q, perms = _prep(blocks, A, C, Q, perms)
    n = blocks.shape[0]
    bits = np.ascontiguousarray(bits, dtype=np.int64).reshape(n, 8)
    nbits = np.ascontiguousarray(nbits, dtype=np.int64).reshape(n)
    if np.any((nbits < 0) | (nbits > 8)):
        raise ValueError("nbits must lie in 0..8")
    max_iters = int(max_iters)
    if _resolve(backend) == "numba":
        out = np.empty((n, 8, 8))
        iters = np.zeros(n, dtype=np.int64)
        bad = np.zeros(n, dtype=np.int64)
        if n:
            _nb_embed(blocks, A, C, Q, _ZZ, perms, bits, nbits, max_iters, out, iters, bad)
    else:
        out, iters, bad = _np_embed(blocks, A, C, Q, perms, bits, nbits, max_iters)
    return out.astype(np.uint8), iters, bad


def extract_blocks(blocks, A, C, Q, perms, backend=None):
    """The 8 LSBs of ``|a_q|`` per block, in permuted order, as uint8 (N, 8)."""
    blocks, A, C, Q, perms = _prep(blocks, A, C, Q, perms)
    n = blocks.shape[0]
    if _resolve(backend) == "numba":
        out = np.zeros((n, 8), dtype=np.int64)
        if n:
            _nb_extract(blocks, A, C, Q, _ZZ, perms, out)
        return out.astype(np.uint8)
    return _np_extract(blocks, A, C, Q, perms)


def warmup():
    """Compile the numba kernels once (no-op on the numpy backend)."""
    if _accel.USE_NUMBA:
        z = np.zeros((1, 8, 8))
        eye = np.eye(8)
        p = np.arange(8)[None, :]
        embed_blocks(z, eye, eye, np.ones((8, 8)), p, np.zeros((1, 8)), [8], 1, "numba")
        extract_blocks(z, eye, eye, np.ones((8, 8)), p, "numba")
