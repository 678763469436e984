"""Adam with a stepped exponential learning-rate schedule, and L-BFGS with a strong-Wolfe line search."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

LossFn = Callable[[np.ndarray], tuple[float, np.ndarray]]
Projection = Callable[[np.ndarray], np.ndarray]


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    decay_rate: float = 1.0
    decay_step: int = 1000
    lr_floor: float = 0.0
    step: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if self.decay_step < 1:
            raise ValueError("decay_step must be >= 1")

    def lr_at(self, step: int) -> float:
        """Learning rate used by the update with zero-based index ``step``."""
        lr = self.lr * self.decay_rate ** (step // self.decay_step)
        return max(lr, self.lr_floor)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray, project: Projection | None = None) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameter vector.

    ``project`` (for example the activation ``d`` floor) is applied to the result.
    """
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    if state.m.shape != params.shape or grad.shape != params.shape:
        raise ValueError("parameter, gradient and moment shapes differ")
    lr = state.lr_at(state.step)
    state.step += 1
    t = state.step
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**t)
    denom = np.sqrt(state.v / (1.0 - state.beta2**t)) + state.eps
    update = np.divide(m_hat, denom, out=np.zeros_like(m_hat), where=denom > 0)
    new = params - lr * update
    return project(new) if project is not None else new


# --- L-BFGS -----------------------------------------------------------------

@dataclass
class LbfgsState:
    history_size: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    max_ls: int = 25
    tol_grad: float = 1e-10
    s: deque = field(default_factory=deque)
    y: deque = field(default_factory=deque)
    n_skipped: int = 0

    def push(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Store a curvature pair; pairs with ``s.y <= 0`` are skipped."""
        sy = float(s @ y)
        if not sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            self.n_skipped += 1
            return False
        self.s.append(s)
        self.y.append(y)
        while len(self.s) > self.history_size:
            self.s.popleft()
            self.y.popleft()
        return True

    def direction(self, g: np.ndarray) -> np.ndarray:
        """Two-loop recursion: ``-H g`` for the current inverse-Hessian estimate."""
        if not self.s:
            return -g
        q = g.copy()
        rhos = [1.0 / float(s @ y) for s, y in zip(self.s, self.y)]
        alphas = []
        for s, y, rho in zip(reversed(self.s), reversed(self.y), reversed(rhos)):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        s_last, y_last = self.s[-1], self.y[-1]
        q *= float(s_last @ y_last) / float(y_last @ y_last)
        for (s, y, rho), a in zip(zip(self.s, self.y, rhos), reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        return -q

    def reset(self) -> None:
        self.s.clear()
        self.y.clear()


@dataclass
class LineSearchResult:
    alpha: float
    f: float
    g: np.ndarray | None
    n_evals: int
    wolfe: bool  # both strong-Wolfe conditions hold at alpha

    @property
    def ok(self) -> bool:
        return self.alpha > 0 and self.g is not None


def _cubic_min(a, fa, ga, b, fb, gb, lo, hi) -> float:
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc >= 0 and a != b:
        d2 = math.copysign(math.sqrt(disc), b - a)
        denom = gb - ga + 2.0 * d2
        if denom != 0:
            x = b - (b - a) * (gb + d2 - d1) / denom
            if math.isfinite(x):
                return min(max(x, lo), hi)
    return 0.5 * (lo + hi)


def strong_wolfe(fn: LossFn, x: np.ndarray, f0: float, g0: np.ndarray, d: np.ndarray, alpha0: float = 1.0,
                 c1: float = 1e-4, c2: float = 0.9, max_ls: int = 25) -> LineSearchResult:
    """Bracketing/zoom line search for the strong Wolfe conditions.

    When the evaluation budget runs out, the best point found that satisfies
    sufficient decrease is returned with ``wolfe=False``; ``alpha=0`` signals
    that no such point exists.
    """
    dphi0 = float(g0 @ d)
    n_evals = 0

    def phi(a):
        nonlocal n_evals
        n_evals += 1
        f, g = fn(x + a * d)
        return f, g, (float(g @ d) if np.all(np.isfinite(g)) else math.nan)

    def armijo(a, f):
        return math.isfinite(f) and f <= f0 + c1 * a * dphi0

    def curvature(dp):
        return abs(dp) <= -c2 * dphi0

    a_prev, f_prev, dp_prev, g_prev = 0.0, f0, dphi0, g0
    a = alpha0
    lo = hi = None
    for i in range(max_ls):
        f, g, dp = phi(a)
        if not armijo(a, f) or (i > 0 and f >= f_prev):
            lo, hi = (a_prev, f_prev, dp_prev, g_prev), (a, f, dp, g)
            break
        if curvature(dp):
            return LineSearchResult(a, f, g, n_evals, True)
        if dp >= 0:
            lo, hi = (a, f, dp, g), (a_prev, f_prev, dp_prev, g_prev)
            break
        a_prev, f_prev, dp_prev, g_prev = a, f, dp, g
        a *= 2.0
    else:
        return LineSearchResult(a_prev, f_prev, g_prev if a_prev > 0 else None, n_evals, False)

    while n_evals < max_ls:
        a_lo, f_lo, dp_lo, g_lo = lo
        a_hi, f_hi, dp_hi, g_hi = hi
        left, right = min(a_lo, a_hi), max(a_lo, a_hi)
        width = right - left
        if width <= 1e-16 * max(1.0, right):
            break
        pad = 0.1 * width
        if math.isfinite(f_hi) and math.isfinite(dp_hi):
            a = _cubic_min(a_lo, f_lo, dp_lo, a_hi, f_hi, dp_hi, left + pad, right - pad)
        else:
            a = 0.5 * (a_lo + a_hi)
        f, g, dp = phi(a)
        if not armijo(a, f) or f >= f_lo:
            hi = (a, f, dp, g)
        else:
            if curvature(dp):
                return LineSearchResult(a, f, g, n_evals, True)
            if dp * (a_hi - a_lo) >= 0:
                hi = lo
            lo = (a, f, dp, g)
    a_lo, f_lo, _, g_lo = lo
    return LineSearchResult(a_lo, f_lo, g_lo if a_lo > 0 else None, n_evals, False)


@dataclass
class LbfgsStep:
    iteration: int
    f_before: float
    f_after: float
    alpha: float
    dphi0: float
    wolfe: bool


@dataclass
class LbfgsResult:
    x: np.ndarray
    f: float
    grad: np.ndarray
    n_iter: int
    n_evals: int
    status: str  # converged | max_iter | line_search_failed | nonfinite | stopped
    steps: list[LbfgsStep]

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))


def lbfgs_minimize(
    loss_fn: LossFn,
    x0: np.ndarray,
    max_iter: int = 1000,
    state: LbfgsState | None = None,
    callback: Callable[[int, np.ndarray, float, np.ndarray], bool | None] | None = None,
    project: Projection | None = None,
) -> LbfgsResult:
    """Minimise ``loss_fn`` (returning ``(f, grad)``) from ``x0``.

    Stops after ``max_iter`` iterations, when the gradient 2-norm drops below
    ``state.tol_grad``, or when the line search cannot find a decrease (reported
    in ``status``, not raised). ``callback(iteration, x, f, g)`` runs after every
    accepted step and may return True to stop early.
    """
    state = state or LbfgsState()
    x = np.array(x0, dtype=float)
    f, g = loss_fn(x)
    n_evals = 1
    steps: list[LbfgsStep] = []
    if not math.isfinite(f):
        return LbfgsResult(x, f, g, 0, n_evals, "nonfinite", steps)
    status = "max_iter"
    it = 0
    while it < max_iter:
        if np.linalg.norm(g) < state.tol_grad:
            status = "converged"
            break
        d = state.direction(g)
        dphi0 = float(g @ d)
        if not dphi0 < 0:
            state.reset()
            d = -g
            dphi0 = float(g @ d)
        alpha0 = min(1.0, 1.0 / float(np.abs(g).sum())) if not state.s else 1.0
        ls = strong_wolfe(loss_fn, x, f, g, d, alpha0, state.c1, state.c2, state.max_ls)
        n_evals += ls.n_evals
        if not ls.ok:
            status = "line_search_failed"
            log.info("L-BFGS line search failed at iteration %d (f=%.6e)", it, f)
            break
        x_new = x + ls.alpha * d
        f_new, g_new = ls.f, ls.g
        if project is not None:
            projected = project(x_new.copy())
            if not np.array_equal(projected, x_new):
                x_new = projected
                f_new, g_new = loss_fn(x_new)
                n_evals += 1
        state.push(x_new - x, g_new - g)
        steps.append(LbfgsStep(it, f, f_new, ls.alpha, dphi0, ls.wolfe))
        x, f, g = x_new, f_new, g_new
        it += 1
        if not math.isfinite(f):
            status = "nonfinite"
            break
        if callback is not None and callback(it, x, f, g):
            status = "stopped"
            break
    else:
        if np.linalg.norm(g) < state.tol_grad:
            status = "converged"
    return LbfgsResult(x, f, g, it, n_evals, status, steps)
