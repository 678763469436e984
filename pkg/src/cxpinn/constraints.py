"""Hard-constraint ansatz ``u_hat = A(x) * u_nn(x) + B(x)``.

``A`` and ``B`` are :class:`AnalyticField` objects that report value, gradient
and pure second derivatives in closed form. Every benchmark field is a product
of one-dimensional factors, so a single separable implementation covers them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .network import JetCoeffs, NetJet

FieldJet = tuple[np.ndarray, np.ndarray, np.ndarray]


class AnalyticField:
    kind: str = "field"

    def evaluate(self, X: np.ndarray) -> FieldJet:
        """Return ``(value (N,), grad (N, D), diag2 (N, D))`` at points ``X``."""
        raise NotImplementedError

    def value(self, X) -> np.ndarray:
        return self.evaluate(np.atleast_2d(X))[0]

    def __mul__(self, other: "AnalyticField") -> "AnalyticField":
        return ProductField(self, other)


@dataclass
class ConstantField(AnalyticField):
    c: float = 0.0
    kind = "constant"

    def evaluate(self, X):
        X = np.atleast_2d(X)
        N, D = X.shape
        return np.full(N, float(self.c)), np.zeros((N, D)), np.zeros((N, D))


# one-dimensional factors: x -> (f, f', f'')
Factor = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


def box_factor(x):
    return 1.0 - x * x, -2.0 * x, np.full_like(x, -2.0)


def unit_factor(x):
    return x * (1.0 - x), 1.0 - 2.0 * x, np.full_like(x, -2.0)


def linear_factor(x):
    return x.copy(), np.ones_like(x), np.zeros_like(x)


def sine_factor(a: float) -> Factor:
    w = a * np.pi

    def f(x):
        s = np.sin(w * x)
        return s, w * np.cos(w * x), -w * w * s

    return f


class SeparableProduct(AnalyticField):
    """``prod_i f_i(x[axis_i])`` over the given axes; other coordinates are ignored."""

    def __init__(self, axes: Sequence[int], factors: Sequence[Factor], kind: str = "product"):
        if len(axes) != len(factors):
            raise ValueError("one factor per axis is required")
        self.axes = list(axes)
        self.factors = list(factors)
        self.kind = kind

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        N, D = X.shape
        vals = [f(X[:, ax]) for ax, f in zip(self.axes, self.factors)]
        f0 = [v[0] for v in vals]
        # products of all factors but one, built from prefix/suffix products (no division by zero)
        n = len(f0)
        prefix = [np.ones(N)]
        for f in f0:
            prefix.append(prefix[-1] * f)
        suffix = [np.ones(N)]
        for f in reversed(f0):
            suffix.append(suffix[-1] * f)
        suffix.reverse()
        grad = np.zeros((N, D))
        diag2 = np.zeros((N, D))
        for i, ax in enumerate(self.axes):
            others = prefix[i] * suffix[i + 1]
            grad[:, ax] += vals[i][1] * others
            diag2[:, ax] += vals[i][2] * others
        return prefix[n], grad, diag2


class ProductField(AnalyticField):
    kind = "product_of_fields"

    def __init__(self, left: AnalyticField, right: AnalyticField):
        self.left, self.right = left, right

    def evaluate(self, X):
        a, ag, ad = self.left.evaluate(X)
        b, bg, bd = self.right.evaluate(X)
        return a * b, ag * b[:, None] + a[:, None] * bg, ad * b[:, None] + 2.0 * ag * bg + a[:, None] * bd


def box_product(axes: Sequence[int]) -> SeparableProduct:
    """``prod (1 - x_i^2)``, vanishing on the faces of ``[-1, 1]^n``."""
    return SeparableProduct(axes, [box_factor] * len(axes), "box_product")


def unit_box_product(axes: Sequence[int]) -> SeparableProduct:
    return SeparableProduct(axes, [unit_factor] * len(axes), "unit_box_product")


def time_factor(axis: int) -> SeparableProduct:
    return SeparableProduct([axis], [linear_factor], "time_factor")


def sine_product(axes: Sequence[int], freqs: Sequence[float]) -> SeparableProduct:
    """``prod sin(a_i * pi * x_i)``."""
    return SeparableProduct(axes, [sine_factor(a) for a in freqs], "sine_product")


@dataclass
class HardConstraint:
    A: AnalyticField
    B: AnalyticField
    name: str = "none"

    @property
    def is_identity(self) -> bool:
        return self.name == "none"


def identity_constraint() -> HardConstraint:
    return HardConstraint(ConstantField(1.0), ConstantField(0.0), "none")


def constrained_jet(A: AnalyticField, B: AnalyticField, net_jet: NetJet, x) -> NetJet:
    """Compose the analytic factors with a network jet via the product rule."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.ndim(net_jet.value) == 0
    u = np.atleast_1d(net_jet.value)
    ug = np.atleast_2d(net_jet.grad)
    ud = np.atleast_2d(net_jet.diag2)
    a, ag, ad = A.evaluate(X)
    b, bg, bd = B.evaluate(X)
    value = a * u + b
    grad = a[:, None] * ug + ag * u[:, None] + bg
    diag2 = a[:, None] * ud + 2.0 * ag * ug + ad * u[:, None] + bd
    if single:
        return NetJet(value[0], grad[0], diag2[0], net_jet.z, net_jet.phi)
    return NetJet(value, grad, diag2, net_jet.z, net_jet.phi)


def adjoint_coeffs(A: AnalyticField, x, coeffs: JetCoeffs) -> JetCoeffs:
    """Map weights on the constrained jet to weights on the raw network jet.

    This is the transpose of the linear map ``(u, u_i, u_ii) -> (u_hat, u_hat_i, u_hat_ii)``
    in :func:`constrained_jet`; the ``B`` part is constant and drops out.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    N, D = X.shape
    a, ag, ad = A.evaluate(X)
    bv = np.broadcast_to(np.asarray(coeffs.val, dtype=float), (N,))
    bg = np.broadcast_to(np.asarray(coeffs.grad, dtype=float), (N, D))
    bd = np.broadcast_to(np.asarray(coeffs.diag2, dtype=float), (N, D))
    val = a * bv + (bg * ag).sum(axis=1) + (bd * ad).sum(axis=1)
    grad = a[:, None] * bg + 2.0 * bd * ag
    diag2 = a[:, None] * bd
    return JetCoeffs(val, grad, diag2)


CONSTRAINT_NAMES = ("box_product", "unit_box_time", "sine_product", "none")
