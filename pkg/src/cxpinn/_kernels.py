"""Fused numba kernels for batched jets and parameter adjoints.

These compute exactly what :func:`cxpinn.network.forward_jet` and
:func:`cxpinn.network.param_grad_accumulate` compute, without materialising
``(N, width)`` temporaries. The forward pass is parallel over points and the
adjoint is parallel over neurons, so each output entry is reduced by a single
thread in a fixed order whatever the thread count. Sums over points are
blocked (partial sums of ``BLOCK`` points, then a sum of partials) to keep
rounding growth at roughly ``BLOCK + N / BLOCK`` ulps.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import njit, prange

from .network import ActivationKind, CauchyNet

BLOCK = 256
_CAUCHY, _TANH = 0, 1
# reassociation lets LLVM vectorise the reductions; no approximate functions
_FLAGS = {"reassoc", "contract", "nsz"}


@njit(cache=True, inline="always", fastmath=_FLAGS)
def _phi4(z, mu1, mu2, d, kind):
    if kind == _CAUCHY:
        inv = 1.0 / (z * z + d * d)
        p0 = (mu1 * z + mu2) * inv
        p1 = (mu1 - 2.0 * z * p0) * inv
        p2 = -(4.0 * z * p1 + 2.0 * p0) * inv
        p3 = -(6.0 * z * p2 + 6.0 * p1) * inv
        return p0, p1, p2, p3, inv
    t = np.tanh(z)
    s = 1.0 - t * t
    return t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0), 0.0


@njit(parallel=True, cache=True, fastmath=_FLAGS)
def _forward(X, W, b, mu1, mu2, d, v, c, kind, value, grad, diag2):
    N, D = X.shape
    m = W.shape[0]
    for n in prange(N):
        u = c
        for i in range(D):
            grad[n, i] = 0.0
            diag2[n, i] = 0.0
        for k in range(m):
            z = b[k]
            for j in range(D):
                z += W[k, j] * X[n, j]
            p0, p1, p2, _, _ = _phi4(z, mu1[k], mu2[k], d[k], kind)
            u += v[k] * p0
            g = v[k] * p1
            h = v[k] * p2
            for i in range(D):
                w = W[k, i]
                grad[n, i] += g * w
                diag2[n, i] += h * w * w
        value[n] = u


@njit(parallel=True, cache=True, fastmath=_FLAGS)
def _value(X, W, b, mu1, mu2, d, v, c, kind, value):
    N, D = X.shape
    m = W.shape[0]
    for n in prange(N):
        u = c
        for k in range(m):
            z = b[k]
            for j in range(D):
                z += W[k, j] * X[n, j]
            if kind == _CAUCHY:
                u += v[k] * (mu1[k] * z + mu2[k]) / (z * z + d[k] * d[k])
            else:
                u += v[k] * np.tanh(z)
        value[n] = u


@njit(parallel=True, cache=True, fastmath=_FLAGS)
def _adjoint(X, W, b, mu1, mu2, d, v, kind, cv, cg, cd, gW, gb, gmu1, gmu2, gd, gv):
    N, D = X.shape
    m = W.shape[0]
    for k in prange(m):
        # per-coordinate sums: [0:D] z-path t*x, [D:2D] cg*phi1, [2D:3D] cd*phi2
        totw = np.zeros(3 * D)
        blkw = np.zeros(3 * D)
        wk = W[k].copy()
        w2 = wk * wk
        bk, mk1, mk2, dk = b[k], mu1[k], mu2[k], d[k]
        tv = tb = tm1 = tm2 = td = 0.0
        for start in range(0, N, BLOCK):
            sv = sb = sm1 = sm2 = sd = 0.0
            for n in range(start, min(start + BLOCK, N)):
                z = bk
                P = 0.0
                Q = 0.0
                for j in range(D):
                    z += wk[j] * X[n, j]
                    P += cg[n, j] * wk[j]
                    Q += cd[n, j] * w2[j]
                p0, p1, p2, p3, inv = _phi4(z, mk1, mk2, dk, kind)
                a = cv[n]
                sv += a * p0 + P * p1 + Q * p2
                t = a * p1 + P * p2 + Q * p3
                sb += t
                for j in range(D):
                    blkw[j] += t * X[n, j]
                    blkw[D + j] += cg[n, j] * p1
                    blkw[2 * D + j] += cd[n, j] * p2
                if kind == _CAUCHY:
                    b1 = -2.0 * z * inv * inv
                    b2 = -(4.0 * z * b1 + 2.0 * inv) * inv
                    d0 = -2.0 * dk * p0 * inv
                    d1 = -(2.0 * dk * p1 + 2.0 * z * d0) * inv
                    d2 = -(2.0 * dk * p2 + 4.0 * z * d1 + 2.0 * d0) * inv
                    sm1 += a * z * inv + P * (inv + z * b1) + Q * (2.0 * b1 + z * b2)
                    sm2 += a * inv + P * b1 + Q * b2
                    sd += a * d0 + P * d1 + Q * d2
            tv += sv
            tb += sb
            tm1 += sm1
            tm2 += sm2
            td += sd
            for r in range(3 * D):
                totw[r] += blkw[r]
                blkw[r] = 0.0
        vk = v[k]
        gv[k] = tv
        gb[k] = vk * tb
        for j in range(D):
            gW[k, j] = vk * (totw[j] + totw[D + j] + 2.0 * wk[j] * totw[2 * D + j])
        if kind == _CAUCHY:
            gmu1[k] = vk * tm1
            gmu2[k] = vk * tm2
            gd[k] = vk * td


def _args(net: CauchyNet):
    kind = _CAUCHY if net.activation is ActivationKind.CAUCHY else _TANH
    if kind == _CAUCHY:
        mu1, mu2, d = net.mu1, net.mu2, net.d
    else:
        mu1 = mu2 = d = np.zeros(net.width)
    return net.W, net.b, mu1, mu2, d, net.v, kind


def set_threads(n: int) -> int:
    """Set the kernel thread count, capped at what numba was started with; returns the value used."""
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def batch_jet(net: CauchyNet, X: np.ndarray):
    """Return ``(value, grad, diag2)`` for a batch ``X`` of shape ``(N, D)``."""
    X = np.ascontiguousarray(X, dtype=float)
    N, D = X.shape
    value = np.empty(N)
    grad = np.empty((N, D))
    diag2 = np.empty((N, D))
    W, b, mu1, mu2, d, v, kind = _args(net)
    _forward(X, W, b, mu1, mu2, d, v, net.c, kind, value, grad, diag2)
    return value, grad, diag2


def batch_value(net: CauchyNet, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    value = np.empty(X.shape[0])
    W, b, mu1, mu2, d, v, kind = _args(net)
    _value(X, W, b, mu1, mu2, d, v, net.c, kind, value)
    return value


def batch_adjoint(net: CauchyNet, X: np.ndarray, cv: np.ndarray, cg: np.ndarray, cd: np.ndarray) -> np.ndarray:
    """Flat parameter gradient of ``sum_n cv*u + cg.grad + cd.diag2`` (same layout as ``flatten_params``)."""
    X = np.ascontiguousarray(X, dtype=float)
    cv = np.ascontiguousarray(cv, dtype=float)
    cg = np.ascontiguousarray(cg, dtype=float)
    cd = np.ascontiguousarray(cd, dtype=float)
    m, D = net.W.shape
    gW = np.empty((m, D))
    gb = np.empty(m)
    gmu1, gmu2, gd = np.empty(m), np.empty(m), np.empty(m)
    gv = np.empty(m)
    W, b, mu1, mu2, d, v, kind = _args(net)
    _adjoint(X, W, b, mu1, mu2, d, v, kind, cv, cg, cd, gW, gb, gmu1, gmu2, gd, gv)
    parts = [gW.ravel(), gb]
    if kind == _CAUCHY:
        parts += [gmu1, gmu2, gd]
    parts += [gv, np.array([np.sum(cv)])]
    return np.concatenate(parts)
