import numpy as np
import pytest

from cxpinn.loss import PinnObjective, build_terms, evaluate_terms, loss_and_grad, solution_jet, solution_value
from cxpinn.network import flatten_params, forward_jet, init_net, unflatten_params
from cxpinn.problems import LossWeights, get_problem
from cxpinn.sampling import sample_boundary, sample_initial, sample_interior

from oracles import assert_fd_close, grad_fd

PROBLEMS = {
    "helmholtz2d": {},
    "helmholtz2d_soft": {"constraint": "none"},
    "helmholtz3d": {},
    "heat3d": {},
    "heat3d_norm": {"normalize_inputs": True},
    "heat3d_soft": {"constraint": "none"},
    "poisson5d": {},
    "poisson10d": {},
}


def _problem(key):
    return get_problem(key.split("_")[0], **PROBLEMS[key])


def _sets(p, n=20, seed=0):
    return (
        sample_interior(p, n, seed),
        sample_boundary(p, n, seed) if p.soft_boundary else None,
        sample_initial(p, n, seed) if p.soft_initial else None,
    )


def _net(p, m=5, seed=0):
    rng = np.random.default_rng(seed)
    net = init_net(p.input_dim, m, seed)
    net.mu1[:] = rng.uniform(0.05, 1, m)
    net.mu2[:] = rng.uniform(0.05, 1, m)
    net.d[:] = rng.uniform(0.3, 1, m)
    net.v[:] = rng.uniform(-1, 1, m)
    return net


def _reference_loss(net, p, interior, boundary, initial, weights=None):
    """Loss assembled from the constrained jet directly, term by term."""
    w = weights or p.weights
    X = interior.points
    jet = solution_jet(net, p, X)
    total = w.lambda_f * np.mean(p.residual(jet, X) ** 2)
    if boundary is not None:
        total += w.lambda_b * np.mean((solution_value(net, p, boundary.points, "numpy") - p.exact(boundary.points)) ** 2)
    if initial is not None:
        total += w.lambda_i * np.mean((solution_value(net, p, initial.points, "numpy") - p.exact(initial.points)) ** 2)
    return total


@pytest.mark.parametrize("key", PROBLEMS)
@pytest.mark.parametrize("engine", ["numba", "numpy"])
def test_loss_matches_reference(key, engine):
    p = _problem(key)
    sets = _sets(p)
    net = _net(p)
    bd, _ = loss_and_grad(net, p, *sets, engine=engine)
    assert bd.total == pytest.approx(_reference_loss(net, p, *sets), rel=1e-11)
    assert bd.total == pytest.approx(bd.weights.lambda_f * bd.residual_term + bd.weights.lambda_b * bd.boundary_term
                                     + bd.weights.lambda_i * bd.initial_term, rel=1e-14)
    assert min(bd.residual_term, bd.boundary_term, bd.initial_term) >= 0


@pytest.mark.parametrize("key", PROBLEMS)
@pytest.mark.parametrize("engine", ["numba", "numpy"])
def test_gradient_matches_fd(key, engine):
    p = _problem(key)
    sets = _sets(p)
    net = _net(p, seed=1)
    _, g = loss_and_grad(net, p, *sets, engine=engine)
    probe = net.copy()

    def L(theta):
        unflatten_params(probe, theta)
        return _reference_loss(probe, p, *sets)

    assert_fd_close(g, grad_fd(L, flatten_params(net)))


def test_engines_agree():
    p = get_problem("helmholtz2d")
    sets = _sets(p, 500)
    net = _net(p, 40)
    b1, g1 = loss_and_grad(net, p, *sets, engine="numba")
    b2, g2 = loss_and_grad(net, p, *sets, engine="numpy")
    assert b1.total == pytest.approx(b2.total, rel=1e-12)
    np.testing.assert_allclose(g1, g2, rtol=1e-9, atol=1e-9 * np.abs(g2).max())


def test_zero_net_poisson():
    p = get_problem("poisson5d")
    interior, boundary, _ = _sets(p, 100)
    net = init_net(5, 4)
    net.v[:] = 0.0
    bd, _ = loss_and_grad(net, p, interior, boundary)
    assert bd.residual_term == pytest.approx(np.mean(p.source(interior.points) ** 2), rel=1e-14)
    assert bd.boundary_term == pytest.approx(np.mean(p.exact(boundary.points) ** 2), rel=1e-14)


def test_hard_constraint_has_no_boundary_term():
    p = get_problem("helmholtz2d")
    terms = build_terms(p, sample_interior(p, 10, 0))
    assert [t.role for t in terms] == ["F"]
    bd, _ = evaluate_terms(_net(p), terms)
    assert bd.boundary_term == 0.0 and bd.counts["N_b"] == 0


def test_missing_sets_rejected():
    p = get_problem("poisson5d")
    with pytest.raises(ValueError):
        build_terms(p, sample_interior(p, 10, 0))
    with pytest.raises(ValueError):
        build_terms(p, None, sample_boundary(p, 10, 0))
    with pytest.raises(ValueError):
        build_terms(get_problem("heat3d", constraint="none"), sample_interior(get_problem("heat3d"), 5, 0),
                    sample_boundary(get_problem("heat3d"), 5, 0))


def test_permutation_invariance():
    p = get_problem("poisson5d")
    interior, boundary, _ = _sets(p, 50)
    net = _net(p, 10)
    perm = np.random.default_rng(0).permutation(50)
    from cxpinn.sampling import PointSet
    shuffled = PointSet(interior.points[perm], interior.role, interior.seed)
    a, ga = loss_and_grad(net, p, interior, boundary)
    b, gb = loss_and_grad(net, p, shuffled, boundary)
    assert a.total == pytest.approx(b.total, rel=1e-13)
    np.testing.assert_allclose(ga, gb, rtol=1e-10, atol=1e-12)


def test_weight_linearity():
    p = get_problem("poisson5d")
    sets = _sets(p, 30)
    net = _net(p, 8)
    a, ga = loss_and_grad(net, p, *sets, weights=LossWeights(1.0, 100.0))
    b, gb = loss_and_grad(net, p, *sets, weights=LossWeights(2.0, 100.0))
    f_only = loss_and_grad(net, p, *sets, weights=LossWeights(1.0, 0.0))
    assert b.total - a.total == pytest.approx(a.residual_term, rel=1e-12)
    np.testing.assert_allclose(gb - ga, f_only[1], rtol=1e-9, atol=1e-12)


def test_objective_wraps_flat_vector():
    p = get_problem("helmholtz2d")
    net = _net(p)
    obj = PinnObjective(net, build_terms(p, sample_interior(p, 20, 0)))
    theta = obj.theta()
    f, g = obj(theta + 0.01)
    assert obj.n_evals == 1 and g.shape == theta.shape
    np.testing.assert_array_equal(flatten_params(net), theta + 0.01)


def test_solution_jet_matches_raw_jet_without_constraint():
    p = get_problem("poisson5d")
    net = _net(p)
    X = sample_interior(p, 5, 0).points
    raw = forward_jet(net, X)
    jet = solution_jet(net, p, X)
    np.testing.assert_array_equal(jet.value, raw.value)
    np.testing.assert_allclose(solution_value(net, p, X), raw.value, rtol=1e-14)
