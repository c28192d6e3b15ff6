"""Hot numeric loops: Gram matrix, SMO pair updates, ectopic window scan.

Each routine exists as a plain function (``*_py``) and, when numba is
available, as a compiled twin (``*_jit``). The public names (``gram``,
``smo``, ``ectopic_mask``) point at whichever backend :mod:`hrvsvm._accel`
selected at import time.
"""

from __future__ import annotations

import math
import types

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

LINEAR = 0
GAUSSIAN = 1
POLYNOMIAL = 2

# alphas inside (BOUND_EPS, C - BOUND_EPS) count as non-bound
BOUND_EPS = 1e-8


def _kernel_scalar(code, sigma, degree, coef0, a, b):
    if code == GAUSSIAN:
        sq = 0.0
        for k in range(a.shape[0]):
            d = a[k] - b[k]
            sq += d * d
        return math.exp(-sq / (2.0 * sigma * sigma))
    dot = 0.0
    for k in range(a.shape[0]):
        dot += a[k] * b[k]
    if code == LINEAR:
        return dot
    return (dot + coef0) ** degree


def gram_loop(points, code, sigma, degree, coef0):
    n = points.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = _kernel_scalar(code, sigma, degree, coef0, points[i], points[j])
            out[i, j] = v
            out[j, i] = v
    return out


def gram_py(points, code, sigma, degree, coef0):
    """Vectorised NumPy Gram matrix; the upper triangle is mirrored for exact symmetry."""
    points = np.asarray(points, dtype=np.float64)
    if code == GAUSSIAN:
        diff = points[:, None, :] - points[None, :, :]
        full = np.exp(-np.einsum("ijk,ijk->ij", diff, diff) / (2.0 * sigma * sigma))
    else:
        dots = np.einsum("ik,jk->ij", points, points)
        full = dots if code == LINEAR else (dots + coef0) ** degree
    upper = np.triu(full)
    return upper + np.triu(full, 1).T


def ectopic_mask_py(rr, tol):
    """One pass of the moving-median rule: True where the interval is kept."""
    n = rr.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        lo = max(0, i - 2)
        hi = min(n, i + 3)
        med = np.median(rr[lo:hi])
        if abs(rr[i] - med) > tol * med:
            keep[i] = False
    return keep


def _objective(alphas, y, f0):
    total = 0.0
    quad = 0.0
    for i in range(alphas.shape[0]):
        total += alphas[i]
        quad += alphas[i] * y[i] * f0[i]
    return total - 0.5 * quad


def _is_violator(alpha, r, c_bound, tol):
    return (r < -tol and alpha < c_bound - BOUND_EPS) or (r > tol and alpha > BOUND_EPS)


def _take_step(i1, i2, K, y, alphas, f0, state, c_bound):
    # state = [bias, eps]; returns True when the pair moved
    if i1 == i2:
        return False
    b = state[0]
    eps = state[1]
    a1_old = alphas[i1]
    a2_old = alphas[i2]
    y1 = y[i1]
    y2 = y[i2]
    s = y1 * y2
    if y1 != y2:
        lo = max(0.0, a2_old - a1_old)
        hi = min(c_bound, c_bound + a2_old - a1_old)
    else:
        lo = max(0.0, a1_old + a2_old - c_bound)
        hi = min(c_bound, a1_old + a2_old)
    if lo >= hi:
        return False
    k11 = K[i1, i1]
    k12 = K[i1, i2]
    k22 = K[i2, i2]
    eta = k11 + k22 - 2.0 * k12
    # objective gain is lin*d - 0.5*eta*d^2 for a move d of alpha2
    lin = (1.0 - s) + s * y1 * f0[i1] - y2 * f0[i2]
    if eta > 0.0:
        a2 = a2_old + lin / eta
        if a2 < lo:
            a2 = lo
        elif a2 > hi:
            a2 = hi
    else:
        d_lo = lo - a2_old
        d_hi = hi - a2_old
        gain_lo = lin * d_lo - 0.5 * eta * d_lo * d_lo
        gain_hi = lin * d_hi - 0.5 * eta * d_hi * d_hi
        if gain_lo > gain_hi + eps:
            a2 = lo
        elif gain_hi > gain_lo + eps:
            a2 = hi
        else:
            a2 = a2_old
    if abs(a2 - a2_old) < eps * (a2 + a2_old + eps):
        return False
    a1 = a1_old + s * (a2_old - a2)
    if a1 < 0.0:
        a1 = 0.0
    elif a1 > c_bound:
        a1 = c_bound
    d1 = y1 * (a1 - a1_old)
    d2 = y2 * (a2 - a2_old)
    for k in range(f0.shape[0]):
        f0[k] += d1 * K[i1, k] + d2 * K[i2, k]
    alphas[i1] = a1
    alphas[i2] = a2
    b1 = y1 - f0[i1]
    b2 = y2 - f0[i2]
    if BOUND_EPS < a1 < c_bound - BOUND_EPS:
        b = b1
    elif BOUND_EPS < a2 < c_bound - BOUND_EPS:
        b = b2
    else:
        b = 0.5 * (b1 + b2)
    state[0] = b
    return True


def _examine(i2, K, y, alphas, f0, state, c_bound, tol):
    n = alphas.shape[0]
    b = state[0]
    e2 = f0[i2] + b - y[i2]
    if not _is_violator(alphas[i2], e2 * y[i2], c_bound, tol):
        return False
    n_free = 0
    best = -1
    best_gap = -1.0
    for k in range(n):
        if BOUND_EPS < alphas[k] < c_bound - BOUND_EPS:
            n_free += 1
            gap = abs(f0[k] + b - y[k] - e2)
            if gap > best_gap:
                best_gap = gap
                best = k
    if n_free > 1 and best >= 0:
        if _take_step(best, i2, K, y, alphas, f0, state, c_bound):
            return True
    for off in range(n):
        k = (i2 + 1 + off) % n
        if BOUND_EPS < alphas[k] < c_bound - BOUND_EPS:
            if _take_step(k, i2, K, y, alphas, f0, state, c_bound):
                return True
    for off in range(n):
        k = (i2 + 1 + off) % n
        if _take_step(k, i2, K, y, alphas, f0, state, c_bound):
            return True
    return False


def smo_py(K, y, c_bound, tol, max_passes, eps, record_trace):
    """Platt-style SMO on a precomputed Gram matrix.

    Returns ``(alphas, bias, passes, updates, converged, trace)``. ``bias`` is
    the running threshold of the pair updates; callers recompute the final
    bias from the margin support vectors. ``trace`` holds the dual objective
    after every accepted pair update when ``record_trace`` is set.
    """
    n = y.shape[0]
    alphas = np.zeros(n)
    f0 = np.zeros(n)
    state = np.zeros(2)
    state[1] = eps
    trace = np.zeros(0)
    buf = np.zeros(64)
    n_trace = 0
    passes = 0
    updates = 0
    changed = 0
    examine_all = True
    while (changed > 0 or examine_all) and passes < max_passes:
        changed = 0
        for i in range(n):
            if examine_all or (BOUND_EPS < alphas[i] < c_bound - BOUND_EPS):
                if _examine(i, K, y, alphas, f0, state, c_bound, tol):
                    changed += 1
                    updates += 1
                    if record_trace:
                        if n_trace == buf.shape[0]:
                            grown = np.zeros(2 * n_trace)
                            grown[:n_trace] = buf
                            buf = grown
                        buf[n_trace] = _objective(alphas, y, f0)
                        n_trace += 1
        passes += 1
        if examine_all:
            examine_all = False
        elif changed == 0:
            examine_all = True
    converged = True
    for i in range(n):
        if _is_violator(alphas[i], (f0[i] + state[0] - y[i]) * y[i], c_bound, tol):
            converged = False
            break
    if record_trace:
        trace = buf[:n_trace].copy()
    return alphas, state[0], passes, updates, converged, trace


def _compiled_twins():
    # rebuild every loop over a private globals dict so the compiled versions
    # call each other while the *_py functions stay pure Python
    names = [
        "_kernel_scalar", "gram_loop", "ectopic_mask_py", "_objective",
        "_is_violator", "_take_step", "_examine", "smo_py",
    ]
    ns = {"__name__": __name__, "np": np, "math": math, "LINEAR": LINEAR, "GAUSSIAN": GAUSSIAN,
          "POLYNOMIAL": POLYNOMIAL, "BOUND_EPS": BOUND_EPS}
    src = globals()
    for name in names:
        fn = src[name]
        ns[name] = njit(types.FunctionType(fn.__code__, ns, name))
    return ns["gram_loop"], ns["ectopic_mask_py"], ns["smo_py"]


if HAVE_NUMBA:
    gram_jit, ectopic_mask_jit, smo_jit = _compiled_twins()
else:  # pragma: no cover
    gram_jit = ectopic_mask_jit = smo_jit = None

if USE_NUMBA:
    gram, ectopic_mask, smo = gram_jit, ectopic_mask_jit, smo_jit
else:
    gram, ectopic_mask, smo = gram_py, ectopic_mask_py, smo_py
