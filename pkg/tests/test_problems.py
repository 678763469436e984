import numpy as np
import pytest

from cxpinn.problems import PROBLEMS, LossWeights, get_problem, helmholtz2d, helmholtz3d

PI = np.pi
NAMES = ["helmholtz2d", "helmholtz3d", "heat3d", "poisson5d", "poisson10d"]


def _interior(p, n=1000, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(p.domain[:, 0], p.domain[:, 1], (n, p.input_dim))


def test_registry_names():
    assert set(NAMES) <= set(PROBLEMS)
    with pytest.raises(KeyError):
        get_problem("wave7d")


@pytest.mark.parametrize("name", NAMES + ["helmholtz2d_88"])
def test_exact_solution_satisfies_operator(name):
    p = helmholtz2d(8, 8) if name == "helmholtz2d_88" else get_problem(name)
    assert np.max(np.abs(p.exact_residual(_interior(p)))) < 1e-6


def test_helmholtz2d_examples():
    p = helmholtz2d(1, 4, 1)
    assert p.exact(np.array([[0.5, 0.5]]))[0] == pytest.approx(0.0, abs=1e-14)
    assert p.domain.tolist() == [[-1, 1], [-1, 1]]
    assert p.constraint.name == "box_product"


def test_helmholtz_source_frozen_values():
    # (Laplace + k^2) u evaluated symbolically
    p = helmholtz2d(8, 8, 1)
    q = p.source(np.array([[0.25, 0.25], [0.3, -0.7]]))
    assert q[0] == pytest.approx(0.0, abs=1e-10)
    assert q[1] == pytest.approx(-1141.7695452198317008, rel=1e-12)


def test_helmholtz_source_three_term_formula():
    p = helmholtz2d(1, 4, 2)
    X = _interior(p, 20)
    s = np.sin(PI * X[:, 0]) * np.sin(4 * PI * X[:, 1])
    np.testing.assert_allclose(p.source(X), 4 * s - PI**2 * s - 16 * PI**2 * s, rtol=1e-13)


def test_helmholtz3d_source():
    p = helmholtz3d(1)
    q = p.source(np.array([[0.0, 0.0, 0.0], [0.25, 0.25, 0.25], [0.1, 0.2, -0.3]]))
    assert q[0] == 0.0
    assert q[1] == pytest.approx(-117.43525281307230343, rel=1e-12)
    assert q[2] == pytest.approx(62.435245459041328942, rel=1e-12)


def test_heat_examples():
    p = get_problem("heat3d")
    assert p.input_dim == 4 and p.time_axis == 3 and p.has_time
    assert p.domain.tolist() == [[0, 1], [0, 1], [0, 1], [0, 10]]
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, (10, 3))
    u0 = p.exact(np.column_stack([x, np.zeros(10)]))
    np.testing.assert_allclose(u0, p.constraint.B.value(np.column_stack([x, np.zeros(10)])), rtol=1e-15)
    u1 = p.exact(np.column_stack([x, np.ones(10)]))
    np.testing.assert_allclose(u1, np.exp(-1) * u0, rtol=1e-14)


@pytest.mark.parametrize("dim", [5, 10])
def test_poisson_examples(dim):
    p = get_problem(f"poisson{dim}d")
    assert p.exact(np.zeros((1, dim)))[0] == 0.0
    X = _interior(p, 50)
    np.testing.assert_allclose(p.source(X), PI**2 * p.exact(X), rtol=1e-13)
    assert p.weights == LossWeights(1.0, 100.0, 1.0)
    assert p.soft_boundary and not p.soft_initial


def test_hard_vs_soft():
    assert not get_problem("helmholtz2d").soft_boundary
    assert get_problem("helmholtz2d", constraint="none").soft_boundary
    assert not get_problem("heat3d").soft_boundary and not get_problem("heat3d").soft_initial
    assert get_problem("helmholtz3d").weights.lambda_f == 1.0


def test_boundary_operator_is_difference_to_exact():
    p = get_problem("poisson5d")
    X = _interior(p, 10)
    from cxpinn.network import NetJet
    jet = NetJet(p.exact(X) + 0.5, None, None, None, None)
    np.testing.assert_allclose(p.boundary_operator(jet, X), 0.5)


def test_normalize_inputs_map():
    p = get_problem("heat3d", normalize_inputs=True)
    center, inv = p.input_map()
    np.testing.assert_allclose(center, [0.5, 0.5, 0.5, 5.0])
    np.testing.assert_allclose(inv, [2, 2, 2, 0.2])
    center, inv = get_problem("heat3d").input_map()
    assert np.all(center == 0) and np.all(inv == 1)
