"""Benchmark PDEs: residual operators, exact solutions, sources and domains.

Every residual here is linear with constant coefficients,

    r(x) = c_val * u + c_grad . grad(u) + c_diag2 . diag2(u) - source(x),

which is what lets the loss pre-compute per-point adjoint weights once.
Time-dependent problems carry time as the last input coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constraints import (
    AnalyticField,
    ConstantField,
    HardConstraint,
    SeparableProduct,
    box_product,
    identity_constraint,
    sine_product,
    time_factor,
    unit_box_product,
)
from .network import JetCoeffs, NetJet

PI = np.pi


@dataclass
class LossWeights:
    lambda_f: float = 1.0
    lambda_b: float = 1.0
    lambda_i: float = 1.0


@dataclass
class PdeProblem:
    name: str
    domain: np.ndarray  # (input_dim, 2) rows of (lo, hi)
    op_val: float
    op_grad: np.ndarray
    op_diag2: np.ndarray
    source_fn: Callable[[np.ndarray], np.ndarray]
    exact_fn: Callable[[np.ndarray], np.ndarray]
    exact_jet_fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    constraint: HardConstraint = field(default_factory=identity_constraint)
    weights: LossWeights = field(default_factory=LossWeights)
    time_axis: int | None = None
    params: dict = field(default_factory=dict)
    normalize_inputs: bool = False

    def __post_init__(self) -> None:
        self.domain = np.asarray(self.domain, dtype=float).reshape(-1, 2)
        self.op_grad = np.asarray(self.op_grad, dtype=float)
        self.op_diag2 = np.asarray(self.op_diag2, dtype=float)

    @property
    def input_dim(self) -> int:
        return self.domain.shape[0]

    @property
    def spatial_axes(self) -> list[int]:
        return [i for i in range(self.input_dim) if i != self.time_axis]

    @property
    def spatial_dim(self) -> int:
        return len(self.spatial_axes)

    @property
    def has_time(self) -> bool:
        return self.time_axis is not None

    @property
    def soft_boundary(self) -> bool:
        """Boundary values enter the loss (no hard constraint)."""
        return self.constraint.is_identity

    @property
    def soft_initial(self) -> bool:
        return self.has_time and self.constraint.is_identity

    def source(self, X) -> np.ndarray:
        return self.source_fn(np.atleast_2d(X))

    def exact(self, X) -> np.ndarray:
        return self.exact_fn(np.atleast_2d(X))

    def residual_coeffs(self) -> JetCoeffs:
        return JetCoeffs(self.op_val, self.op_grad, self.op_diag2)

    def apply_operator(self, value, grad, diag2) -> np.ndarray:
        return self.op_val * value + grad @ self.op_grad + diag2 @ self.op_diag2

    def residual(self, jet: NetJet, X) -> np.ndarray:
        """PDE residual of a (constrained) solution jet at points ``X``."""
        X = np.atleast_2d(X)
        r = self.apply_operator(np.atleast_1d(jet.value), np.atleast_2d(jet.grad), np.atleast_2d(jet.diag2))
        return r - self.source(X)

    def boundary_operator(self, jet: NetJet, X) -> np.ndarray:
        """Dirichlet mismatch ``u_hat - g`` with ``g`` the exact solution on the boundary."""
        return np.atleast_1d(jet.value) - self.exact(X)

    initial_operator = boundary_operator

    def exact_residual(self, X) -> np.ndarray:
        v, g, h = self.exact_jet_fn(np.atleast_2d(X))
        return self.apply_operator(v, g, h) - self.source(X)

    def input_map(self) -> tuple[np.ndarray, np.ndarray]:
        """``(center, inv_scale)`` of the affine map applied before the network."""
        if not self.normalize_inputs:
            return np.zeros(self.input_dim), np.ones(self.input_dim)
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return 0.5 * (lo + hi), 2.0 / (hi - lo)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "input_dim": self.input_dim,
            "domain": self.domain.tolist(),
            "time_axis": self.time_axis,
            "constraint": self.constraint.name,
            "weights": vars(self.weights).copy(),
            "normalize_inputs": self.normalize_inputs,
            **{k: v for k, v in self.params.items()},
        }


def _exp_decay_factor(x):
    e = np.exp(-x)
    return e, -e, e.copy()


def make_field(name: str, spatial_axes, time_axis=None, freqs=None) -> AnalyticField:
    """Build a named analytic field used in hard constraints."""
    if name == "box_product":
        return box_product(spatial_axes)
    if name == "unit_box_time":
        if time_axis is None:
            raise ValueError("unit_box_time needs a time axis")
        return time_factor(time_axis) * unit_box_product(spatial_axes)
    if name == "sine_product":
        freqs = [2.0] * len(spatial_axes) if freqs is None else freqs
        return sine_product(spatial_axes, freqs)
    if name in ("none", "zero"):
        return ConstantField(0.0)
    raise ValueError(f"unknown field {name!r}")


def helmholtz2d(a1: float = 1.0, a2: float = 4.0, k: float = 1.0, constraint: str = "box_product",
                weights: LossWeights | None = None) -> PdeProblem:
    """``u_xx + u_yy + k^2 u = q`` on ``[-1, 1]^2`` with ``u = sin(a1 pi x) sin(a2 pi y)``."""
    exact_field = sine_product([0, 1], [a1, a2])

    def exact(X):
        return np.sin(a1 * PI * X[:, 0]) * np.sin(a2 * PI * X[:, 1])

    def source(X):
        u = exact(X)
        return k**2 * u - (a1 * PI) ** 2 * u - (a2 * PI) ** 2 * u

    cons = _constraint(constraint, [0, 1])
    return PdeProblem(
        "helmholtz2d", [[-1, 1], [-1, 1]], k**2, [0.0, 0.0], [1.0, 1.0], source, exact,
        exact_field.evaluate, cons, weights or LossWeights(), None, {"a1": a1, "a2": a2, "k": k},
    )


def helmholtz3d(k: float = 1.0, constraint: str = "box_product", weights: LossWeights | None = None) -> PdeProblem:
    exact_field = sine_product([0, 1, 2], [2.0, 2.0, 2.0])

    def exact(X):
        return np.sin(2 * PI * X[:, 0]) * np.sin(2 * PI * X[:, 1]) * np.sin(2 * PI * X[:, 2])

    def source(X):
        return (k**2 - 12 * PI**2) * exact(X)

    cons = _constraint(constraint, [0, 1, 2])
    return PdeProblem(
        "helmholtz3d", [[-1, 1]] * 3, k**2, np.zeros(3), np.ones(3), source, exact,
        exact_field.evaluate, cons, weights or LossWeights(), None, {"k": k},
    )


def heat3d(t_max: float = 10.0, constraint: str = "unit_box_time", weights: LossWeights | None = None,
           normalize_inputs: bool = False) -> PdeProblem:
    """``Laplace(u) = 12 pi^2 u_t`` on ``[0, 1]^3 x [0, t_max]``; inputs ``(x1, x2, x3, t)``."""
    spatial = [0, 1, 2]
    initial = sine_product(spatial, [2.0, 2.0, 2.0])
    exact_field = SeparableProduct([3], [_exp_decay_factor]) * initial

    def exact(X):
        return np.exp(-X[:, 3]) * initial.value(X)

    def source(X):
        return np.zeros(X.shape[0])

    if constraint == "none":
        cons = identity_constraint()
    else:
        cons = HardConstraint(make_field(constraint, spatial, 3), initial, constraint)
    return PdeProblem(
        "heat3d", [[0, 1], [0, 1], [0, 1], [0, t_max]], 0.0, [0, 0, 0, -12 * PI**2], [1, 1, 1, 0],
        source, exact, exact_field.evaluate, cons, weights or LossWeights(), 3, {"t_max": t_max},
        normalize_inputs,
    )


def poisson_nd(dim: int, weights: LossWeights | None = None) -> PdeProblem:
    """``-Laplace(u) = f`` on ``[-1, 1]^dim`` with ``u = sum sin(pi x_i)`` and soft Dirichlet data."""
    if dim < 1:
        raise ValueError("dim must be positive")

    def exact(X):
        return np.sin(PI * X).sum(axis=1)

    def exact_jet(X):
        s = np.sin(PI * X)
        return s.sum(axis=1), PI * np.cos(PI * X), -(PI**2) * s

    def source(X):
        return PI**2 * np.sin(PI * X).sum(axis=1)

    return PdeProblem(
        f"poisson{dim}d", [[-1, 1]] * dim, 0.0, np.zeros(dim), -np.ones(dim), source, exact, exact_jet,
        identity_constraint(), weights or LossWeights(1.0, 100.0, 1.0), None, {"dim": dim},
    )


def _constraint(name: str, axes) -> HardConstraint:
    if name == "none":
        return identity_constraint()
    return HardConstraint(make_field(name, axes), ConstantField(0.0), name)


PROBLEMS: dict[str, Callable[..., PdeProblem]] = {
    "helmholtz2d": helmholtz2d,
    "helmholtz3d": helmholtz3d,
    "heat3d": heat3d,
    "poisson5d": lambda **kw: poisson_nd(5, **kw),
    "poisson10d": lambda **kw: poisson_nd(10, **kw),
    "poisson": poisson_nd,
}


def get_problem(name: str, **params) -> PdeProblem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**params)
