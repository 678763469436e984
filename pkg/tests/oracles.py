"""Independent reference implementations used by the tests.

Everything here is written directly from the defining formulas and does not
import the package's derivative code.
"""

import numpy as np


def central(f, x, h):
    """Central first difference with one Richardson step."""
    c = lambda s: (f(x + s) - f(x - s)) / (2 * s)  # noqa: E731
    return (4 * c(h / 2) - c(h)) / 3


def central2(f, x, h):
    f0 = f(x)
    c = lambda s: (f(x + s) - 2 * f0 + f(x - s)) / (s * s)  # noqa: E731
    return (4 * c(h / 2) - c(h)) / 3


def cauchy_phi(x, mu1, mu2, d):
    return (mu1 * x + mu2) / (x * x + d * d)


def net_value(W, b, mu1, mu2, d, v, c, x):
    """Brute-force network value, one neuron at a time."""
    total = c
    for k in range(W.shape[0]):
        z = sum(W[k, i] * x[i] for i in range(W.shape[1])) + b[k]
        total += v[k] * cauchy_phi(z, mu1[k], mu2[k], d[k])
    return total


def input_jet_fd(value, x, h):
    """Gradient and pure second derivatives of a scalar field by central differences."""
    x = np.asarray(x, dtype=float)
    g, d2 = np.empty(x.size), np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = 1.0
        g[i] = central(lambda s: value(x + s * e), 0.0, h)
        d2[i] = central2(lambda s: value(x + s * e), 0.0, h)
    return g, d2


def grad_fd(fn, theta, rel=1e-4):
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for j in range(theta.size):
        def f(s, j=j):
            t = theta.copy()
            t[j] += s
            return fn(t)
        out[j] = central(f, 0.0, rel * max(1.0, abs(theta[j])))
    return out


def assert_fd_close(analytic, numeric, rtol=1e-5, atol=1e-7):
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    bad = np.abs(a - n) > rtol * np.abs(n) + atol
    assert not bad.any(), f"max abs diff {np.max(np.abs(a - n)):.3e} at {np.argwhere(bad)[:5].tolist()}"
