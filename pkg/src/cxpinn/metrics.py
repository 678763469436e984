"""Error metrics, training history and run reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

HISTORY_COLUMNS = ("iter", "time_s", "loss_total", "loss_F", "loss_B", "loss_I", "rel_l2", "l_inf")


def relative_l2(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0.0:
        raise ValueError("relative L2 error is undefined for an all-zero reference")
    return float(np.linalg.norm(pred - truth) / denom)


def l_inf(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    return float(np.max(np.abs(pred - truth)))


@dataclass
class HistoryRecord:
    iteration: int
    time_s: float
    loss_total: float
    loss_F: float
    loss_B: float
    loss_I: float
    rel_l2: float
    l_inf: float

    def row(self) -> tuple:
        return (self.iteration, self.time_s, self.loss_total, self.loss_F, self.loss_B, self.loss_I, self.rel_l2, self.l_inf)


@dataclass
class RunReport:
    config: dict
    seed: int
    parameter_count: int
    history: list[HistoryRecord] = field(default_factory=list)
    final: dict = field(default_factory=dict)
    status: str = "ok"
    checkpoint: str | None = None
    provenance: dict = field(default_factory=dict)
    phases: list[dict] = field(default_factory=list)
    deterministic: bool = True

    def record(self, rec: HistoryRecord) -> None:
        if self.history and rec.iteration <= self.history[-1].iteration:
            raise ValueError("history iterations must be strictly increasing")
        self.history.append(rec)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["history"] = [asdict(h) for h in self.history]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        data = dict(data)
        data["history"] = [HistoryRecord(**h) for h in data.get("history", [])]
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def write_history_csv(report: RunReport, path) -> Path:
    """Fixed-header CSV; ``time_s`` is written as ``nan`` when the run is deterministic."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for rec in report.history:
            row = list(rec.row())
            if report.deterministic:
                row[1] = math.nan
            w.writerow([_fmt(x) for x in row])
    return path


def read_history_csv(path) -> list[HistoryRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != HISTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [HistoryRecord(int(r[0]), *(float(x) for x in r[1:])) for r in reader]


def emit_report(report: RunReport, out_dir, net=None) -> dict[str, Path]:
    """Write ``report.json``, ``history.csv`` and (given ``net``) ``checkpoint.bin``."""
    from .network import save_checkpoint

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    if net is not None:
        paths["checkpoint"] = save_checkpoint(net, out_dir / "checkpoint.bin")
        report.checkpoint = "checkpoint.bin"
    paths["history"] = write_history_csv(report, out_dir / "history.csv")
    paths["report"] = out_dir / "report.json"
    paths["report"].write_text(json.dumps(report.to_dict(), indent=2, default=_json_default) + "\n")
    return paths


def load_report(out_dir) -> RunReport:
    return RunReport.from_dict(json.loads((Path(out_dir) / "report.json").read_text()))


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
