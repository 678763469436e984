"""Finite-difference validation of the closed-form derivative kernels.

Each check compares an analytic quantity against central differences of a
lower-order quantity: activation derivatives of order k against the
difference quotient of order k-1, network gradients and pure second
derivatives against the network value, and parameter gradients against the
scalar they differentiate. Differences use one Richardson step, so the
truncation error is fourth order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .activation import CauchyParams, cauchy_eval, cauchy_param_sens, tanh_eval
from .constraints import constrained_jet
from .loss import build_terms, evaluate_terms, solution_jet, solution_value
from .network import CauchyNet, JetCoeffs, flatten_params, forward_jet, init_net, param_grad_accumulate, predict, unflatten_params
from .problems import PdeProblem, get_problem
from .sampling import sample_boundary, sample_initial, sample_interior

RTOL = 1e-5
ATOL = 1e-7


def d1(f: Callable[[float], float], h: float) -> float:
    """Richardson-refined central first difference of ``f`` at 0."""
    def c(s):
        return (f(s) - f(-s)) / (2.0 * s)
    return (4.0 * c(h / 2) - c(h)) / 3.0


def d2(f: Callable[[float], float], h: float) -> float:
    """Richardson-refined central second difference of ``f`` at 0."""
    f0 = f(0.0)

    def c(s):
        return (f(s) - 2.0 * f0 + f(-s)) / (s * s)
    return (4.0 * c(h / 2) - c(h)) / 3.0


def fd_gradient(fn: Callable[[np.ndarray], float], theta: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference gradient with steps ``rel_step * max(1, |theta_j|)``."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for j in range(theta.size):
        h = rel_step * max(1.0, abs(theta[j]))

        def f(s, j=j):
            t = theta.copy()
            t[j] += s
            return fn(t)

        out[j] = d1(f, h)
    return out


def max_violation(analytic, numeric, rtol: float = RTOL, atol: float = ATOL) -> float:
    """``max |a - n| / (rtol |n| + atol)``; at most 1 means the check passes."""
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    return float(np.max(np.abs(a - n) / (rtol * np.abs(n) + atol)))


@dataclass
class CheckResult:
    name: str
    instances: int
    worst: float  # max_violation; <= 1 passes

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.worst) and self.worst <= 1.0)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name:<28} n={self.instances:<5d} worst={self.worst:.3g}"


def _random_params(rng, lo=0.05, hi=1.0) -> CauchyParams:
    mu1, mu2, d = rng.uniform(lo, hi, 3)
    return CauchyParams(mu1, mu2, d)


def check_activation(n: int = 1000, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst_c, worst_t, worst_s = 0.0, 0.0, 0.0
    for _ in range(n):
        x = rng.uniform(-5, 5)
        p = _random_params(rng)
        h = 1e-3 * p.d
        for k in (1, 2, 3):
            num = d1(lambda s: cauchy_eval(x + s, p, k - 1), h)
            worst_c = max(worst_c, max_violation(cauchy_eval(x, p, k), num))
            num_t = d1(lambda s: tanh_eval(x + s, k - 1), 1e-3)
            worst_t = max(worst_t, max_violation(tanh_eval(x, k), num_t))
        for k in (0, 1, 2):
            sens = cauchy_param_sens(x, p, k)
            nums = [
                d1(lambda s: cauchy_eval(x, CauchyParams(p.mu1 + s, p.mu2, p.d), k), 1e-3),
                d1(lambda s: cauchy_eval(x, CauchyParams(p.mu1, p.mu2 + s, p.d), k), 1e-3),
                d1(lambda s: cauchy_eval(x, CauchyParams(p.mu1, p.mu2, p.d + s), k), 1e-3 * p.d),
            ]
            worst_s = max(worst_s, max_violation(sens, nums))
    return [
        CheckResult("activation orders 1-3", n, worst_c),
        CheckResult("tanh orders 1-3", n, worst_t),
        CheckResult("activation param sens", n, worst_s),
    ]


def random_net(input_dim: int, width: int, rng, d_range=(0.3, 1.0)) -> CauchyNet:
    net = init_net(input_dim, width, int(rng.integers(1 << 31)))
    net.mu1[:] = rng.uniform(0.05, 1.0, width)
    net.mu2[:] = rng.uniform(0.05, 1.0, width)
    net.d[:] = rng.uniform(*d_range, width)
    net.v[:] = rng.uniform(-1, 1, width)
    net.c = float(rng.uniform(-1, 1))
    return net


def _length_scale(net: CauchyNet) -> float:
    d = net.d if net.d.size else np.ones(net.width)
    return float(np.min(np.abs(d) / np.maximum(np.abs(net.W).max(axis=1), 1e-12)))


def _jet_fd(value: Callable[[np.ndarray], float], x: np.ndarray, h: float):
    D = x.size
    grad, diag2 = np.empty(D), np.empty(D)
    for i in range(D):
        e = np.zeros(D)
        e[i] = 1.0
        grad[i] = d1(lambda s: value(x + s * e), h)
        diag2[i] = d2(lambda s: value(x + s * e), h)
    return grad, diag2


def check_network_jet(n: int = 100, seed: int = 0, width: int = 20, input_dim: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        net = random_net(input_dim, width, rng)
        x = rng.uniform(-1, 1, input_dim)
        jet = forward_jet(net, x)
        g, h2 = _jet_fd(lambda y: float(predict(net, y)), x, 1e-2 * _length_scale(net))
        worst = max(worst, max_violation(jet.grad, g), max_violation(jet.diag2, h2))
    return CheckResult("network jet", n, worst)


def check_param_adjoint(n: int = 100, seed: int = 0, width: int = 5, input_dim: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        net = random_net(input_dim, width, rng)
        X = rng.uniform(-1, 1, (3, input_dim))
        coeffs = JetCoeffs(rng.normal(size=3), rng.normal(size=(3, input_dim)), rng.normal(size=(3, input_dim)))
        analytic = param_grad_accumulate(net, X, coeffs)
        probe = net.copy()

        def G(theta):
            unflatten_params(probe, theta)
            jet = forward_jet(probe, X)
            return float(np.sum(coeffs.val * jet.value + (coeffs.grad * jet.grad).sum(1) + (coeffs.diag2 * jet.diag2).sum(1)))

        worst = max(worst, max_violation(analytic, fd_gradient(G, flatten_params(net))))
    return CheckResult("parameter adjoint", n, worst)


def check_constrained_jet(problem: PdeProblem, n: int = 100, seed: int = 0, width: int = 10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        net = random_net(problem.input_dim, width, rng)
        x = sample_interior(problem, 1, int(rng.integers(1 << 31))).points[0]
        jet = solution_jet(net, problem, x[None, :])
        h = 1e-2 * min(_length_scale(net), 0.05)
        g, h2 = _jet_fd(lambda y: float(solution_value(net, problem, y[None, :], "numpy")[0]), x, h)
        worst = max(worst, max_violation(jet.grad[0], g), max_violation(jet.diag2[0], h2))
    return CheckResult(f"constrained jet ({problem.name})", n, worst)


def check_loss_gradient(problem: PdeProblem, n: int = 3, seed: int = 0, width: int = 5, engine: str = "numba",
                        n_points: int = 16) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        net = random_net(problem.input_dim, width, rng)
        s = int(rng.integers(1 << 31))
        interior = sample_interior(problem, n_points, s)
        boundary = sample_boundary(problem, n_points, s) if problem.soft_boundary else None
        initial = sample_initial(problem, n_points, s) if problem.soft_initial else None
        terms = build_terms(problem, interior, boundary, initial)
        _, analytic = evaluate_terms(net, terms, engine)
        probe = net.copy()

        def L(theta):
            unflatten_params(probe, theta)
            return evaluate_terms(probe, terms, "numpy", with_grad=False)[0].total

        worst = max(worst, max_violation(analytic, fd_gradient(L, flatten_params(net))))
    return CheckResult(f"loss gradient ({problem.name}, {engine})", n, worst)


def run_checks(problem_name: str = "helmholtz2d", width: int = 5, seed: int = 0, quick: bool = False, **params) -> list[CheckResult]:
    problem = get_problem(problem_name, **params)
    scale = 10 if quick else 1
    results = check_activation(1000 // scale, seed)
    results.append(check_network_jet(100 // scale, seed))
    results.append(check_param_adjoint(100 // scale, seed))
    results.append(check_constrained_jet(problem, 100 // scale, seed))
    for engine in ("numba", "numpy"):
        results.append(check_loss_gradient(problem, 3, seed, width, engine))
    return results
