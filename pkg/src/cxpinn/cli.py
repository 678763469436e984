"""Command-line interface: ``cxpinn run|sweep-init|check-grad|cauchy-demo|report``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (overrides the config)")
    p.add_argument("--threads", type=int, default=None, help="kernel threads; 1 gives the deterministic path")
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cxpinn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train from a config file or preset name")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None, help="override the iteration count of every phase")
    _common(p)

    p = sub.add_parser("sweep-init", help="sweep one activation initial value")
    p.add_argument("config")
    p.add_argument("--param", choices=("mu1", "mu2", "d"), required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=None)
    _common(p)

    p = sub.add_parser("check-grad", help="finite-difference checks of every analytic derivative")
    p.add_argument("--problem", default="helmholtz2d")
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="ten times fewer random instances")
    _common(p)

    p = sub.add_parser("cauchy-demo", help="contour Riemann-sum error against m for 1/(zeta-2)")
    p.add_argument("--m", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128])
    p.add_argument("--rule", choices=("trapezoid", "forward_difference", "both"), default="both")
    _common(p)

    p = sub.add_parser("report", help="summarise a finished run directory")
    p.add_argument("dir", type=Path)
    return parser


def _load(args):
    from .config import load_config

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.out is not None:
        cfg.out_dir = str(args.out)
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    if getattr(args, "iterations", None) is not None:
        for ph in cfg.phases:
            ph.iterations = args.iterations
    cfg.validate()
    return cfg


def cmd_run(args) -> int:
    from .metrics import emit_report
    from .train import best_result, run

    cfg = _load(args)
    out = Path(cfg.out_dir)
    results = []
    for t in range(cfg.trials):
        res = run(cfg, cfg.seed + t)
        target = out if cfg.trials == 1 else out / f"seed{cfg.seed + t}"
        emit_report(res.report, target, res.net)
        f = res.report.final
        print(f"seed={res.report.seed} status={res.report.status} rel_l2={f['rel_l2']:.6e} l_inf={f['l_inf']:.6e} -> {target}")
        results.append(res)
    if cfg.trials > 1:
        best = best_result(results)
        summary = {"best_seed": best.report.seed, "best_rel_l2": best.report.final["rel_l2"],
                   "trials": [{"seed": r.report.seed, "status": r.report.status, **r.report.final} for r in results]}
        (out / "trials.json").write_text(json.dumps(summary, indent=2) + "\n")
        print(f"best seed={best.report.seed} rel_l2={best.report.final['rel_l2']:.6e}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_NUMERIC


def cmd_sweep(args) -> int:
    from .train import sweep_init

    cfg = _load(args)
    rows = sweep_init(cfg, args.param, args.values, args.trials)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dicts = [r.as_dict() for r in rows]
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(dicts[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(dicts)
    for r in rows:
        mean = "NaN" if math.isnan(r.mean) else f"{r.mean:.3e} +- {r.std:.1e}"
        print(f"{r.param}={r.value:g}: {mean} ({len(r.finite)}/{len(r.errors)} finite)")
    return EXIT_OK


def cmd_check_grad(args) -> int:
    from . import _kernels
    from .gradcheck import run_checks

    if args.threads is not None:
        _kernels.set_threads(args.threads)
    results = run_checks(args.problem, args.width, args.seed or 0, args.quick)
    for r in results:
        print(r.line())
    ok = all(r.ok for r in results)
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_cauchy_demo(args) -> int:
    from .train import cauchy_demo

    rules = ("trapezoid", "forward_difference") if args.rule == "both" else (args.rule,)
    rows = cauchy_demo(args.m, rules=rules)
    fh = sys.stdout
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        fh = args.out.open("w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["rule", "m", "error"])
    for r in rows:
        w.writerow([r["rule"], r["m"], f"{r['error']:.17g}"])
    if fh is not sys.stdout:
        fh.close()
    return EXIT_OK


def cmd_report(args) -> int:
    from .metrics import load_report

    rep = load_report(args.dir)
    cfg = rep.config
    print(f"run: {cfg.get('name')} problem={cfg['problem']['name']} width={cfg['width']} seed={rep.seed}")
    print(f"parameters: {rep.parameter_count}  status: {rep.status}")
    for ph in rep.phases:
        print(f"  phase {ph['index']}: {ph['optimizer']} iterations {ph['start_iter']}..{ph['end_iter']} ({ph['wall_s']:.1f} s)")
    f = rep.final
    print(f"final: iteration={f['iteration']} loss={f['loss_total']:.6e} rel_l2={f['rel_l2']:.6e} l_inf={f['l_inf']:.6e}")
    return EXIT_OK if rep.status == "ok" else EXIT_NUMERIC


COMMANDS = {"run": cmd_run, "sweep-init": cmd_sweep, "check-grad": cmd_check_grad,
            "cauchy-demo": cmd_cauchy_demo, "report": cmd_report}


def main(argv=None) -> int:
    from .config import ConfigError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
