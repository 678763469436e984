"""Riemann-sum realisation of Cauchy's integral formula on circular contours.

This is an independent route to the Cauchy activation: discretising
``f(z) = (1 / 2 pi i) \\oint f(zeta) / (zeta - z) dzeta`` at ``m`` nodes gives
``f(z) ~ sum_k lam_k / (zeta_k - z)``, and for real ``x`` the real part of
each term is exactly one Cauchy neuron.

Two weight rules are offered. ``"trapezoid"`` uses the exact tangent,
``dzeta_k = i (zeta_k - center) * 2 pi / m``, and converges geometrically for
analytic ``f``. ``"forward_difference"`` uses the chord ``zeta_{k+1} - zeta_k``
(closing with ``zeta_{m+1} = zeta_1``); it has the same functional form but
only first-order accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .activation import CauchyParams
from .network import CauchyNet

RULES = ("trapezoid", "forward_difference")
MAX_DIM = 3


@dataclass(frozen=True)
class CircleContour:
    center: complex = 0j
    radius: float = 1.0
    offset: float = 0.5  # node phase, in units of the angular step

    def nodes(self, m: int) -> np.ndarray:
        theta = 2.0 * np.pi * (np.arange(m) + self.offset) / m
        return self.center + self.radius * np.exp(1j * theta)

    def contains(self, z) -> bool:
        return bool(np.all(np.abs(np.asarray(z) - self.center) < self.radius))


def real_line_contour(a: float = -1.0, b: float = 1.0, scale: float = 1.5) -> CircleContour:
    """Circle around the midpoint of ``[a, b]`` with radius ``scale`` times the half-width."""
    if not scale > 1.0:
        raise ValueError("scale must exceed 1 so the whole interval lies strictly inside")
    return CircleContour(0.5 * (a + b), scale * 0.5 * (b - a))


@dataclass
class ContourSampling:
    nodes: np.ndarray  # complex
    weights: np.ndarray  # complex lambda_k
    contour: CircleContour
    rule: str

    @property
    def m(self) -> int:
        return self.nodes.size


def contour_sampling(f: Callable, contour: CircleContour, m: int, rule: str = "trapezoid") -> ContourSampling:
    if m < 1:
        raise ValueError("m must be positive")
    zeta = contour.nodes(m)
    return ContourSampling(zeta, f(zeta) * _differentials(contour, zeta, rule) / (2j * np.pi), contour, rule)


def _differentials(contour: CircleContour, zeta: np.ndarray, rule: str) -> np.ndarray:
    if rule == "trapezoid":
        return 1j * (zeta - contour.center) * (2.0 * np.pi / zeta.size)
    if rule == "forward_difference":
        return np.roll(zeta, -1) - zeta
    raise ValueError(f"rule must be one of {RULES}")


def _require_inside(contour: CircleContour, z) -> None:
    if not contour.contains(z):
        raise ValueError("evaluation point must lie strictly inside the contour")


def cauchy_approx_1d(f: Callable, contour: CircleContour, z, m: int, rule: str = "trapezoid"):
    """Approximate ``f(z)`` from ``m`` contour samples; ``z`` may be an array."""
    _require_inside(contour, z)
    cs = contour_sampling(f, contour, m, rule)
    z = np.asarray(z, dtype=complex)
    out = (cs.weights / (cs.nodes - z[..., None])).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def cauchy_approx_real_1d(f: Callable, contour: CircleContour, x, m: int, rule: str = "trapezoid"):
    """Real-part reduction for real ``x``, summed term by term in real arithmetic."""
    _require_inside(contour, x)
    cs = contour_sampling(f, contour, m, rule)
    x = np.asarray(x, dtype=float)[..., None]
    lr, li = cs.weights.real, cs.weights.imag
    zr, zi = cs.nodes.real, cs.nodes.imag
    out = ((lr * zr + li * zi - lr * x) / ((x - zr) ** 2 + zi**2)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass
class CauchyNeuron:
    shift: float  # the neuron sees x - shift
    params: CauchyParams


def cauchy_neurons(f: Callable, contour: CircleContour, m: int, rule: str = "trapezoid") -> list[CauchyNeuron]:
    """One Cauchy neuron per contour node whose sum reproduces :func:`cauchy_approx_real_1d`.

    With ``y = x - Re zeta`` each real term equals ``(mu1 y + mu2) / (y^2 + d^2)`` for
    ``mu1 = -Re lam``, ``mu2 = Im lam * Im zeta`` and ``d = |Im zeta|``.
    """
    cs = contour_sampling(f, contour, m, rule)
    return [
        CauchyNeuron(float(z.real), CauchyParams(float(-lam.real), float(lam.imag * z.imag), float(abs(z.imag))))
        for z, lam in zip(cs.nodes, cs.weights)
    ]


def neurons_as_net(neurons: Sequence[CauchyNeuron]) -> CauchyNet:
    """Pack the neurons into a one-input network (``W = 1``, ``b = -shift``, ``v = 1``, ``c = 0``)."""
    m = len(neurons)
    return CauchyNet(
        np.ones((m, 1)),
        np.array([-n.shift for n in neurons]),
        np.array([n.params.mu1 for n in neurons]),
        np.array([n.params.mu2 for n in neurons]),
        np.array([n.params.d for n in neurons]),
        np.ones(m),
        0.0,
    )


def cauchy_approx_nd(f: Callable, contours: Sequence[CircleContour], z, ms: Sequence[int] | int, rule: str = "trapezoid") -> complex:
    """Tensor-product Riemann sum for ``f(z_1, ..., z_N)``, ``N <= 3``.

    ``f`` takes ``N`` broadcastable complex arrays. The term count is ``prod(ms)``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.size
    if n > MAX_DIM:
        raise ValueError(f"tensor-product formula is limited to {MAX_DIM} dimensions (cost grows as prod m_l)")
    if len(contours) != n:
        raise ValueError("one contour per dimension is required")
    ms = [ms] * n if np.isscalar(ms) else list(ms)
    nodes, kernels = [], []
    for c, zl, ml in zip(contours, z, ms):
        _require_inside(c, zl)
        zeta = c.nodes(ml)
        nodes.append(zeta)
        kernels.append(_differentials(c, zeta, rule) / (2j * np.pi * (zeta - zl)))
    grids = np.meshgrid(*nodes, indexing="ij")
    weight = kernels[0]
    for k in kernels[1:]:
        weight = np.multiply.outer(weight, k)
    return complex(np.sum(f(*grids) * weight))
