"""Training driver: phases, history sampling, trials and the initialisation sweep."""

from __future__ import annotations

import logging
import math
import platform
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__, _kernels
from .cauchy_oracle import RULES, CircleContour, cauchy_approx_1d
from .config import PhaseConfig, TrainConfig
from .loss import PinnObjective, build_terms, solution_value
from .metrics import HistoryRecord, RunReport, l_inf, relative_l2
from .network import CauchyNet, flatten_params, init_net, unflatten_params
from .optim import AdamState, LbfgsState, adam_step, lbfgs_minimize
from .sampling import PRNG_NAME, sample_boundary, sample_initial, sample_interior, test_points

log = logging.getLogger(__name__)

SWEEP_PARAMS = ("mu1", "mu2", "d")


@dataclass
class RunResult:
    report: RunReport
    net: CauchyNet

    @property
    def ok(self) -> bool:
        return self.report.status == "ok"


def _projection(net: CauchyNet, floor: float) -> Callable[[np.ndarray], np.ndarray]:
    n_d = net.d.size
    if n_d == 0:
        return lambda theta: theta
    start = net.W.size + net.b.size + net.mu1.size + net.mu2.size
    sl = slice(start, start + n_d)

    def project(theta):
        d = theta[sl]
        small = np.abs(d) < floor
        if np.any(small):
            d[small] = np.where(d[small] < 0, -floor, floor)
        return theta

    return project


class _Trainer:
    def __init__(self, config: TrainConfig, seed: int):
        self.cfg = config
        self.seed = seed
        self.problem = config.build_problem()
        pts = config.points
        self.net = init_net(self.problem.input_dim, config.width, seed, config.init, config.activation)
        interior = sample_interior(self.problem, pts.n_interior, seed)
        boundary = sample_boundary(self.problem, pts.n_boundary, seed) if self.problem.soft_boundary else None
        initial = sample_initial(self.problem, pts.n_initial, seed) if self.problem.soft_initial else None
        self.test = test_points(self.problem, seed, pts.n_test, pts.test_grid)
        self.truth = self.problem.exact(self.test.points)
        self.terms = build_terms(self.problem, interior, boundary, initial, config.resolved_weights())
        self.objective = PinnObjective(self.net, self.terms, config.engine)
        self.project = _projection(self.net, config.d_floor)
        self.iteration = 0
        self.t0 = time.perf_counter()
        deterministic = config.deterministic or config.threads == 1
        self.report = RunReport(
            config=config.to_dict() | {"seed": seed},
            seed=seed,
            parameter_count=self.net.parameter_count,
            provenance={
                "package_version": __version__,
                "prng": PRNG_NAME,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "threads": config.threads,
                "test_points": len(self.test),
                "test_generator": self.test.generator,
            },
            deterministic=deterministic,
        )

    def errors(self) -> tuple[float, float]:
        pred = solution_value(self.net, self.problem, self.test.points, self.cfg.engine)
        return relative_l2(pred, self.truth), l_inf(pred, self.truth)

    def record(self, breakdown) -> HistoryRecord:
        rel, linf = self.errors() if math.isfinite(breakdown.total) else (math.nan, math.nan)
        rec = HistoryRecord(self.iteration, time.perf_counter() - self.t0, breakdown.total, breakdown.residual_term,
                            breakdown.boundary_term, breakdown.initial_term, rel, linf)
        self.report.record(rec)
        return rec

    def due(self, last: bool) -> bool:
        return last or self.iteration % self.cfg.metric_every == 0

    def adam(self, ph: PhaseConfig) -> str:
        state = AdamState(ph.lr, ph.beta1, ph.beta2, ph.eps, ph.decay_rate, ph.decay_step, ph.lr_floor)
        theta = flatten_params(self.net)
        bd, g = self.objective.breakdown(theta)
        for i in range(ph.iterations):
            theta = adam_step(state, theta, g, self.project)
            self.iteration += 1
            last = i == ph.iterations - 1
            bd, g = self.objective.breakdown(theta, with_grad=not last)
            if not math.isfinite(bd.total):
                self.record(bd)
                return "nonfinite"
            if self.due(last):
                self.record(bd)
        return "ok"

    def lbfgs(self, ph: PhaseConfig) -> tuple[str, dict]:
        state = LbfgsState(ph.history_size, ph.c1, ph.c2, ph.max_ls, ph.tol_grad)
        theta0 = flatten_params(self.net)
        start = self.iteration
        last_recorded = [None]

        def callback(k, x, f, g):
            self.iteration = start + k
            if self.iteration % self.cfg.metric_every == 0:
                bd, _ = self.objective.breakdown(x, with_grad=False)
                self.record(bd)
                last_recorded[0] = self.iteration

        res = lbfgs_minimize(self.objective, theta0, ph.iterations, state, callback, self.project)
        unflatten_params(self.net, res.x)
        self.iteration = start + res.n_iter
        bd, _ = self.objective.breakdown(res.x, with_grad=False)
        if last_recorded[0] != self.iteration and self.iteration > (self.report.history[-1].iteration if self.report.history else -1):
            self.record(bd)
        info = {"n_iter": res.n_iter, "n_evals": res.n_evals, "lbfgs_status": res.status,
                "grad_norm": res.grad_norm, "skipped_pairs": state.n_skipped}
        return ("nonfinite" if res.status == "nonfinite" or not math.isfinite(bd.total) else "ok"), info

    def run(self) -> RunResult:
        _kernels.set_threads(self.cfg.threads)
        bd, _ = self.objective.breakdown(with_grad=False)
        self.record(bd)
        status = "ok"
        for idx, ph in enumerate(self.cfg.phases):
            it0, t0 = self.iteration, time.perf_counter()
            if ph.optimizer == "adam":
                status, info = self.adam(ph), {}
            else:
                status, info = self.lbfgs(ph)
            self.report.phases.append({"index": idx, "optimizer": ph.optimizer, "start_iter": it0,
                                       "end_iter": self.iteration, "wall_s": time.perf_counter() - t0, **info})
            log.info("phase %d (%s) finished at iteration %d: %s", idx, ph.optimizer, self.iteration, status)
            if status != "ok":
                break
        last = self.report.history[-1]
        rel, linf = self.errors() if status == "ok" else (last.rel_l2, last.l_inf)
        if not (math.isfinite(rel) and math.isfinite(linf)):
            status = "nonfinite"
        self.report.status = status
        self.report.final = {"iteration": self.iteration, "loss_total": last.loss_total, "loss_F": last.loss_F,
                             "loss_B": last.loss_B, "loss_I": last.loss_I, "rel_l2": rel, "l_inf": linf,
                             "wall_s": time.perf_counter() - self.t0}
        return RunResult(self.report, self.net)


def run(config: TrainConfig, seed: int | None = None) -> RunResult:
    """Train one network for ``config`` (seed defaults to ``config.seed``)."""
    config.validate()
    return _Trainer(config, config.seed if seed is None else int(seed)).run()


def run_trials(config: TrainConfig) -> list[RunResult]:
    """``config.trials`` runs with seeds ``seed, seed + 1, ...``."""
    return [run(config, config.seed + t) for t in range(config.trials)]


def best_result(results: Sequence[RunResult]) -> RunResult:
    def key(r):
        e = r.report.final.get("rel_l2", math.nan)
        return e if r.ok and math.isfinite(e) else math.inf
    return min(results, key=key)


@dataclass
class SweepRow:
    param: str
    value: float
    errors: list[float] = field(default_factory=list)  # nan marks an unstable run

    @property
    def finite(self) -> list[float]:
        return [e for e in self.errors if math.isfinite(e)]

    @property
    def mean(self) -> float:
        f = self.finite
        return sum(f) / len(f) if f else math.nan

    @property
    def std(self) -> float:
        f = self.finite
        if len(f) < 2:
            return 0.0 if f else math.nan
        return float(np.std(f, ddof=1))

    def as_dict(self) -> dict:
        return {"param": self.param, "value": self.value, "mean_rel_l2": self.mean, "std_rel_l2": self.std,
                "n_finite": len(self.finite), "n_trials": len(self.errors),
                "errors": " ".join("NaN" if not math.isfinite(e) else f"{e:.6e}" for e in self.errors)}


def sweep_init(config: TrainConfig, param: str, values: Sequence[float], trials: int | None = None) -> list[SweepRow]:
    """Vary one activation initial value; the others keep their configured values."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"param must be one of {SWEEP_PARAMS}")
    trials = config.trials if trials is None else trials
    rows = []
    for value in values:
        init = config.init.__class__(**{**config.init.__dict__, param: float(value)})
        cfg = config.replace(init=init)
        row = SweepRow(param, float(value))
        for t in range(trials):
            res = run(cfg, config.seed + t)
            err = res.report.final.get("rel_l2", math.nan)
            row.errors.append(err if res.ok and math.isfinite(err) else math.nan)
        rows.append(row)
    return rows


def cauchy_demo(m_list: Sequence[int], target: Callable | None = None, z: complex = 0.5,
                contour: CircleContour | None = None, exact: complex | None = None,
                rules: Sequence[str] = RULES) -> list[dict]:
    """Absolute error of the contour Riemann sum against ``m``.

    The default target is ``1 / (zeta - 2)`` on the unit circle at ``z = 0.5``.
    """
    if target is None:
        target = lambda zeta: 1.0 / (zeta - 2.0)  # noqa: E731
        exact = 1.0 / (z - 2.0) if exact is None else exact
    if exact is None:
        exact = complex(target(np.asarray(z, dtype=complex)))
    contour = contour or CircleContour()
    rows = []
    for rule in rules:
        for m in m_list:
            approx = cauchy_approx_1d(target, contour, z, int(m), rule)
            rows.append({"rule": rule, "m": int(m), "error": abs(approx - exact)})
    return rows
