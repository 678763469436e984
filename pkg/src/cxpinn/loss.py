"""Composite PINN objective and its exact parameter gradient.

Each loss term is a mean of squared operator values over a fixed point set.
Because every benchmark operator is linear in the solution jet, the operator
at point ``n`` can be written against the *raw* network jet as

    r_n = cv_n * u + cg_n . grad(u) + cd_n . diag2(u) + offset_n

once the hard constraint, the source term and any input scaling are folded in.
:func:`build_terms` does that folding once; afterwards a loss evaluation is a
forward jet plus one adjoint pass with weights ``2 * lambda * r_n / N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constraints import adjoint_coeffs, constrained_jet
from .network import CauchyNet, JetCoeffs, NetJet, flatten_params, forward_jet, param_grad_accumulate, predict, unflatten_params
from .problems import LossWeights, PdeProblem
from .sampling import PointSet

ENGINES = ("numba", "numpy")


@dataclass
class LossBreakdown:
    total: float
    residual_term: float
    boundary_term: float
    initial_term: float
    weights: LossWeights
    counts: dict

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "loss_F": self.residual_term,
            "loss_B": self.boundary_term,
            "loss_I": self.initial_term,
        }


@dataclass
class LinearTerm:
    """One loss component written against the raw network jet at network-input points."""

    role: str  # "F", "B" or "I"
    X: np.ndarray
    cv: np.ndarray
    cg: np.ndarray
    cd: np.ndarray
    offset: np.ndarray
    weight: float

    @property
    def n(self) -> int:
        return self.X.shape[0]


def _fold(problem: PdeProblem, X: np.ndarray, coeffs: JetCoeffs, target: np.ndarray, role: str, weight: float) -> LinearTerm:
    cons = problem.constraint
    raw = adjoint_coeffs(cons.A, X, coeffs)
    bv, bg, bd = cons.B.evaluate(X)
    N, D = X.shape
    cv = np.broadcast_to(np.asarray(coeffs.val, dtype=float), (N,))
    cg = np.broadcast_to(np.asarray(coeffs.grad, dtype=float), (N, D))
    cd = np.broadcast_to(np.asarray(coeffs.diag2, dtype=float), (N, D))
    offset = cv * bv + (cg * bg).sum(axis=1) + (cd * bd).sum(axis=1) - target
    center, inv = problem.input_map()
    return LinearTerm(
        role,
        np.ascontiguousarray((X - center) * inv),
        np.ascontiguousarray(raw.val),
        np.ascontiguousarray(raw.grad * inv),
        np.ascontiguousarray(raw.diag2 * inv * inv),
        offset,
        float(weight),
    )


def build_terms(
    problem: PdeProblem,
    interior: PointSet,
    boundary: PointSet | None = None,
    initial: PointSet | None = None,
    weights: LossWeights | None = None,
) -> list[LinearTerm]:
    weights = weights or problem.weights
    if interior is None or len(interior) == 0:
        raise ValueError("the interior point set is empty")
    terms = [_fold(problem, interior.points, problem.residual_coeffs(), problem.source(interior.points), "F", weights.lambda_f)]
    if problem.soft_boundary:
        if boundary is None or len(boundary) == 0:
            raise ValueError(f"{problem.name} uses soft boundary conditions and needs a boundary point set")
        terms.append(_fold(problem, boundary.points, JetCoeffs(1.0), problem.exact(boundary.points), "B", weights.lambda_b))
    if problem.soft_initial:
        if initial is None or len(initial) == 0:
            raise ValueError(f"{problem.name} uses a soft initial condition and needs an initial point set")
        terms.append(_fold(problem, initial.points, JetCoeffs(1.0), problem.exact(initial.points), "I", weights.lambda_i))
    return terms


def _raw_jet(net: CauchyNet, X: np.ndarray, engine: str):
    if engine == "numba":
        return _kernels.batch_jet(net, X), None
    jet = forward_jet(net, X)
    return (jet.value, jet.grad, jet.diag2), jet


def term_residual(net: CauchyNet, term: LinearTerm, engine: str = "numba") -> np.ndarray:
    (u, g, h), _ = _raw_jet(net, term.X, engine)
    return term.cv * u + (term.cg * g).sum(axis=1) + (term.cd * h).sum(axis=1) + term.offset


def evaluate_terms(net: CauchyNet, terms: list[LinearTerm], engine: str = "numba", with_grad: bool = True):
    """Return ``(LossBreakdown, gradient or None)`` for pre-folded terms."""
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    parts = {"F": 0.0, "B": 0.0, "I": 0.0}
    lam = {"F": 0.0, "B": 0.0, "I": 0.0}
    counts = {"F": 0, "B": 0, "I": 0}
    grad = np.zeros(net.parameter_count) if with_grad else None
    for term in terms:
        (u, g, h), jet = _raw_jet(net, term.X, engine)
        r = term.cv * u + (term.cg * g).sum(axis=1) + (term.cd * h).sum(axis=1) + term.offset
        parts[term.role] = float(np.mean(r * r))
        lam[term.role] = term.weight
        counts[term.role] = term.n
        if with_grad:
            e = (2.0 * term.weight / term.n) * r
            cv, cg, cd = e * term.cv, e[:, None] * term.cg, e[:, None] * term.cd
            if engine == "numba":
                grad += _kernels.batch_adjoint(net, term.X, cv, cg, cd)
            else:
                grad += param_grad_accumulate(net, term.X, JetCoeffs(cv, cg, cd), jet)
    total = sum(lam[k] * parts[k] for k in parts)
    weights = LossWeights(lam["F"], lam["B"], lam["I"])
    breakdown = LossBreakdown(total, parts["F"], parts["B"], parts["I"], weights,
                              {"N_f": counts["F"], "N_b": counts["B"], "N_0": counts["I"]})
    return breakdown, grad


def loss_and_grad(
    net: CauchyNet,
    problem: PdeProblem,
    interior: PointSet,
    boundary: PointSet | None = None,
    initial: PointSet | None = None,
    weights: LossWeights | None = None,
    engine: str = "numba",
):
    """Total loss breakdown and flat gradient for ``net`` on ``problem``."""
    return evaluate_terms(net, build_terms(problem, interior, boundary, initial, weights), engine)


class PinnObjective:
    """Loss of a fixed problem/point-set setup as a function of the flat parameter vector."""

    def __init__(self, net: CauchyNet, terms: list[LinearTerm], engine: str = "numba"):
        self.net = net
        self.terms = terms
        self.engine = engine
        self.n_evals = 0
        self.last: LossBreakdown | None = None

    def breakdown(self, theta: np.ndarray | None = None, with_grad: bool = True):
        if theta is not None:
            unflatten_params(self.net, theta)
        self.n_evals += 1
        self.last, grad = evaluate_terms(self.net, self.terms, self.engine, with_grad)
        return self.last, grad

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        bd, grad = self.breakdown(theta)
        return bd.total, grad

    def theta(self) -> np.ndarray:
        return flatten_params(self.net)


def solution_value(net: CauchyNet, problem: PdeProblem, X, engine: str = "numba") -> np.ndarray:
    """Constrained prediction ``A(x) u_nn(xi) + B(x)`` at physical points ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    center, inv = problem.input_map()
    Xn = (X - center) * inv
    u = _kernels.batch_value(net, Xn) if engine == "numba" else predict(net, Xn)
    cons = problem.constraint
    if cons.is_identity:
        return u
    return cons.A.value(X) * u + cons.B.value(X)


def solution_jet(net: CauchyNet, problem: PdeProblem, X) -> NetJet:
    """Constrained jet in physical coordinates (numpy reference path)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    center, inv = problem.input_map()
    raw = forward_jet(net, (X - center) * inv)
    raw = NetJet(raw.value, raw.grad * inv, raw.diag2 * inv * inv, raw.z, raw.phi)
    return constrained_jet(problem.constraint.A, problem.constraint.B, raw, X)
