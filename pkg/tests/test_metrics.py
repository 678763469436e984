import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cxpinn.metrics import (
    HISTORY_COLUMNS, HistoryRecord, RunReport, emit_report, l_inf, load_report, read_history_csv, relative_l2,
)
from cxpinn.network import flatten_params, init_net, load_checkpoint

vec = arrays(np.float64, st.integers(1, 50), elements=st.floats(-1e3, 1e3))


def test_relative_l2_examples():
    t = np.array([1.0, -2.0, 3.0])
    assert relative_l2(t, t) == 0.0
    assert relative_l2(np.zeros(3), t) == 1.0
    assert relative_l2(2 * t, t) == 1.0


def test_relative_l2_errors():
    with pytest.raises(ValueError):
        relative_l2(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        relative_l2(np.zeros(3), np.ones(4))


def test_l_inf_examples():
    t = np.linspace(0, 1, 10)
    assert l_inf(t, t) == 0.0
    p = t.copy()
    p[4] += 0.25
    assert l_inf(p, t) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        l_inf(np.zeros(2), np.zeros(3))


@settings(max_examples=100, deadline=None)
@given(vec, st.data())
def test_l_inf_brute_force(a, data):
    b = data.draw(arrays(np.float64, a.shape, elements=st.floats(-1e3, 1e3)))
    worst = 0.0
    for x, y in zip(a, b):
        worst = max(worst, abs(x - y))
    assert l_inf(a, b) == worst


@settings(max_examples=100, deadline=None)
@given(vec, st.data())
def test_relative_l2_permutation_invariant(a, data):
    b = data.draw(arrays(np.float64, a.shape, elements=st.floats(0.5, 10)))
    perm = np.random.default_rng(0).permutation(a.size)
    assert relative_l2(a[perm], b[perm]) == pytest.approx(relative_l2(a, b), rel=1e-12)
    ref = math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b))) / math.sqrt(sum(y * y for y in b))
    assert relative_l2(a, b) == pytest.approx(ref, rel=1e-12)


def _report(deterministic=False):
    rep = RunReport({"name": "t", "problem": {"name": "helmholtz2d"}, "width": 3}, 4, 21, deterministic=deterministic)
    rng = np.random.default_rng(0)
    for it in (0, 100, 200):
        rep.record(HistoryRecord(it, float(rng.random()), *(float(x) for x in rng.random(6) / 7)))
    rep.final = {"iteration": 200, "rel_l2": 1 / 3, "l_inf": 2 / 7}
    return rep


def test_history_strictly_increasing():
    rep = _report()
    with pytest.raises(ValueError):
        rep.record(HistoryRecord(200, 0, 0, 0, 0, 0, 0, 0))


def test_emit_and_roundtrip(tmp_path):
    rep = _report()
    net = init_net(2, 3, 1)
    paths = emit_report(rep, tmp_path, net)
    assert set(paths) == {"report", "history", "checkpoint"}
    back = load_report(tmp_path)
    assert back.history == rep.history
    assert back.final == rep.final and back.seed == 4 and back.parameter_count == 21
    assert read_history_csv(paths["history"]) == rep.history
    np.testing.assert_array_equal(flatten_params(load_checkpoint(tmp_path / back.checkpoint)), flatten_params(net))


def test_csv_format(tmp_path):
    rep = _report(deterministic=True)
    emit_report(rep, tmp_path)
    lines = (tmp_path / "history.csv").read_text().splitlines()
    assert lines[0] == ",".join(HISTORY_COLUMNS) == "iter,time_s,loss_total,loss_F,loss_B,loss_I,rel_l2,l_inf"
    fields = lines[1].split(",")
    assert fields[0] == "0" and fields[1] == "nan"
    assert float(fields[2]) == rep.history[0].loss_total
    assert len(read_history_csv(tmp_path / "history.csv")) == 3


def test_read_rejects_wrong_header(tmp_path):
    f = tmp_path / "h.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_history_csv(f)
