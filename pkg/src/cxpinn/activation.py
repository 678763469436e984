"""Cauchy and tanh activations with closed-form input derivatives.

The Cauchy activation is the rational bump

    phi(x; mu1, mu2, d) = (mu1 * x + mu2) / (x**2 + d**2)

Writing ``s = x**2 + d**2`` and differentiating the identity ``phi * s = mu1 * x + mu2``
gives a short recurrence for the input derivatives, which is what the kernels use:

    phi'   = (mu1 - 2 x phi) / s
    phi''  = -(4 x phi' + 2 phi) / s
    phi''' = -(6 x phi'' + 6 phi') / s

The same trick applied to the trainable parameters yields the sensitivities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

D_FLOOR = 1e-6


@dataclass(frozen=True)
class CauchyParams:
    """Trainable triple of a single Cauchy neuron."""

    mu1: float = 0.1
    mu2: float = 0.1
    d: float = 0.1

    def __post_init__(self) -> None:
        for name in ("mu1", "mu2", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"CauchyParams.{name} must be finite, got {getattr(self, name)!r}")
        if self.d == 0.0:
            raise ValueError("CauchyParams.d must be non-zero")


def clamp_d(d: np.ndarray, floor: float = D_FLOOR) -> np.ndarray:
    """Push ``|d|`` up to ``floor`` in place, keeping the sign (zero maps to +floor)."""
    small = np.abs(d) < floor
    if np.any(small):
        d[small] = np.where(d[small] < 0.0, -floor, floor)
    return d


def _check_input(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("activation input must be finite")
    return arr


def _check_order(order: int, highest: int) -> int:
    if int(order) != order or not 0 <= order <= highest:
        raise ValueError(f"derivative order must be an integer in 0..{highest}, got {order!r}")
    return int(order)


def _unwrap(a: np.ndarray):
    return float(a) if a.ndim == 0 else a


def cauchy_jet(z, mu1, mu2, d, max_order: int = 3) -> list[np.ndarray]:
    """Return ``[phi, phi', ..., phi^(max_order)]`` evaluated elementwise.

    Arguments broadcast against each other, so ``z`` of shape ``(N, m)`` with
    per-neuron parameter vectors of shape ``(m,)`` evaluates a whole layer.
    """
    z = np.asarray(z, dtype=float)
    inv_s = 1.0 / (z * z + d * d)
    out = [(mu1 * z + mu2) * inv_s]
    if max_order >= 1:
        out.append((mu1 - 2.0 * z * out[0]) * inv_s)
    if max_order >= 2:
        out.append(-(4.0 * z * out[1] + 2.0 * out[0]) * inv_s)
    if max_order >= 3:
        out.append(-(6.0 * z * out[2] + 6.0 * out[1]) * inv_s)
    return out


def cauchy_sensitivities(z, mu1, mu2, d, phi: list[np.ndarray] | None = None):
    """Parameter sensitivities of phi, phi', phi''.

    Returns three lists ``(d_mu1, d_mu2, d_d)``, each holding the derivative of
    ``phi^(j)`` for ``j = 0, 1, 2`` with respect to that parameter.
    """
    z = np.asarray(z, dtype=float)
    if phi is None:
        phi = cauchy_jet(z, mu1, mu2, d, max_order=2)
    inv_s = 1.0 / (z * z + d * d)
    # phi = mu1 * (z/s) + mu2 * (1/s); derivatives of 1/s first, then z/s = z * (1/s)
    b0 = inv_s
    b1 = -2.0 * z * b0 * inv_s
    b2 = -(4.0 * z * b1 + 2.0 * b0) * inv_s
    a0 = z * b0
    a1 = b0 + z * b1
    a2 = 2.0 * b1 + z * b2
    two_d = 2.0 * d
    d0 = -two_d * phi[0] * inv_s
    d1 = -(two_d * phi[1] + 2.0 * z * d0) * inv_s
    d2 = -(two_d * phi[2] + 4.0 * z * d1 + 2.0 * d0) * inv_s
    return [a0, a1, a2], [b0, b1, b2], [d0, d1, d2]


def tanh_jet(z, max_order: int = 3) -> list[np.ndarray]:
    t = np.tanh(np.asarray(z, dtype=float))
    sech2 = 1.0 - t * t
    out = [t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)]
    return out[: max_order + 1]


def cauchy_eval(x, p: CauchyParams, order: int = 0):
    """Evaluate the ``order``-th input derivative of the Cauchy activation.

    Args:
        x: Scalar or array of finite inputs.
        p: Activation parameters.
        order: Derivative order in 0..3.

    Returns:
        A float for scalar ``x``, otherwise an array of the same shape.
    """
    order = _check_order(order, 3)
    arr = _check_input(x)
    return _unwrap(cauchy_jet(arr, p.mu1, p.mu2, p.d, max_order=order)[order])


def cauchy_param_sens(x, p: CauchyParams, deriv_order: int = 0):
    """Return ``(d/dmu1, d/dmu2, d/dd)`` of ``phi^(deriv_order)(x)``; order in 0..2."""
    deriv_order = _check_order(deriv_order, 2)
    arr = _check_input(x)
    sa, sb, sd = cauchy_sensitivities(arr, p.mu1, p.mu2, p.d)
    return _unwrap(sa[deriv_order]), _unwrap(sb[deriv_order]), _unwrap(sd[deriv_order])


def tanh_eval(x, order: int = 0):
    order = _check_order(order, 3)
    arr = _check_input(x)
    return _unwrap(tanh_jet(arr, max_order=order)[order])
