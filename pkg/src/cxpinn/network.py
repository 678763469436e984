"""Single-hidden-layer network with closed-form jets and parameter adjoints.

The model is ``u(x) = c + sum_k v_k * phi_k(W_k . x + b_k)`` where each
``phi_k`` is a Cauchy activation carrying its own ``(mu1, mu2, d)``, or a
plain tanh for the reference network.

Flat parameter ordering is fixed: ``W`` (row-major), ``b``, ``mu1``, ``mu2``,
``d``, ``v``, ``c``. Tanh networks omit the three activation blocks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .activation import D_FLOOR, CauchyParams, cauchy_jet, cauchy_sensitivities, clamp_d, tanh_jet


class ActivationKind(str, Enum):
    CAUCHY = "cauchy"
    TANH = "tanh"


@dataclass
class InitConfig:
    """Initial values for the activation parameters.

    ``cauchy_init`` applies to all three unless a per-parameter override is set.
    """

    cauchy_init: float = 0.1
    mu1: float | None = None
    mu2: float | None = None
    d: float | None = None

    def resolved(self) -> dict[str, float]:
        return {
            name: self.cauchy_init if getattr(self, name) is None else float(getattr(self, name))
            for name in ("mu1", "mu2", "d")
        }


@dataclass
class CauchyNet:
    W: np.ndarray
    b: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    d: np.ndarray
    v: np.ndarray
    c: float = 0.0
    activation: ActivationKind = ActivationKind.CAUCHY

    def __post_init__(self) -> None:
        self.activation = ActivationKind(self.activation)
        self.W = np.ascontiguousarray(self.W, dtype=float)
        m = self.W.shape[0]
        self.b = np.asarray(self.b, dtype=float).reshape(m)
        self.v = np.asarray(self.v, dtype=float).reshape(m)
        n_act = m if self.activation is ActivationKind.CAUCHY else 0
        self.mu1 = np.asarray(self.mu1, dtype=float).reshape(n_act)
        self.mu2 = np.asarray(self.mu2, dtype=float).reshape(n_act)
        self.d = np.asarray(self.d, dtype=float).reshape(n_act)
        self.c = float(self.c)
        if n_act and np.any(self.d == 0.0):
            raise ValueError("activation scale d must be non-zero")

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @property
    def parameter_count(self) -> int:
        return parameter_count(self.input_dim, self.width, self.activation)

    @property
    def cauchy(self) -> list[CauchyParams]:
        return [CauchyParams(float(a), float(b), float(d)) for a, b, d in zip(self.mu1, self.mu2, self.d)]

    def clamp(self, floor: float = D_FLOOR) -> None:
        clamp_d(self.d, floor)

    def copy(self) -> "CauchyNet":
        return CauchyNet(
            self.W.copy(), self.b.copy(), self.mu1.copy(), self.mu2.copy(), self.d.copy(),
            self.v.copy(), self.c, self.activation,
        )


@dataclass
class NetJet:
    """Value, gradient and pure second derivatives of the network output.

    ``value`` has shape ``(N,)``, ``grad`` and ``diag2`` shape ``(N, D)``; a
    single-point evaluation drops the leading axis. ``z`` and ``phi`` are the
    neuron cache (pre-activations and ``[phi, phi', phi'', phi''']``).
    """

    value: np.ndarray
    grad: np.ndarray
    diag2: np.ndarray
    z: np.ndarray | None = None
    phi: list[np.ndarray] = field(default_factory=list)

    def laplacian(self, axes=None) -> np.ndarray:
        d2 = self.diag2 if axes is None else self.diag2[..., list(axes)]
        return d2.sum(axis=-1)


@dataclass
class JetCoeffs:
    """Weights on the value, gradient and diag2 channels of a jet.

    Shapes broadcast to ``(N,)``, ``(N, D)``, ``(N, D)``.
    """

    val: np.ndarray | float = 0.0
    grad: np.ndarray | float = 0.0
    diag2: np.ndarray | float = 0.0


def parameter_count(input_dim: int, width: int, activation=ActivationKind.CAUCHY) -> int:
    act = 3 if ActivationKind(activation) is ActivationKind.CAUCHY else 0
    return (input_dim + 1 + act) * width + (width + 1)


def init_net(
    input_dim: int,
    width: int,
    seed: int = 0,
    init_cfg: InitConfig | None = None,
    activation=ActivationKind.CAUCHY,
) -> CauchyNet:
    """Build a network with Glorot-uniform ``W``, ``b``, ``v`` and constant activation params.

    The hidden layer uses the bound ``sqrt(6 / (input_dim + width))`` for both
    ``W`` and ``b``; the output weights use ``sqrt(6 / (width + 1))``. ``c``
    starts at zero. Draws come from a Philox stream keyed by ``seed``.
    """
    if input_dim < 1 or width < 1:
        raise ValueError(f"input_dim and width must be positive, got {input_dim}, {width}")
    activation = ActivationKind(activation)
    init_cfg = init_cfg or InitConfig()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x1E7])))
    hidden = np.sqrt(6.0 / (input_dim + width))
    out = np.sqrt(6.0 / (width + 1))
    W = rng.uniform(-hidden, hidden, size=(width, input_dim))
    b = rng.uniform(-hidden, hidden, size=width)
    v = rng.uniform(-out, out, size=width)
    n_act = width if activation is ActivationKind.CAUCHY else 0
    vals = init_cfg.resolved()
    return CauchyNet(
        W, b,
        np.full(n_act, vals["mu1"]), np.full(n_act, vals["mu2"]), np.full(n_act, vals["d"]),
        v, 0.0, activation,
    )


# --- parameter vector -------------------------------------------------------

def _blocks(net: CauchyNet) -> list[np.ndarray]:
    return [net.W.ravel(), net.b, net.mu1, net.mu2, net.d, net.v, np.array([net.c])]


def flatten_params(net: CauchyNet) -> np.ndarray:
    return np.concatenate(_blocks(net))


def unflatten_params(net: CauchyNet, theta: np.ndarray) -> None:
    """Write ``theta`` into ``net`` in place, using the ordering of :func:`flatten_params`."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (net.parameter_count,):
        raise ValueError(f"expected {net.parameter_count} parameters, got shape {theta.shape}")
    m, D = net.W.shape
    n_act = net.mu1.size
    i = 0
    net.W[...] = theta[i : i + m * D].reshape(m, D)
    i += m * D
    for arr, n in ((net.b, m), (net.mu1, n_act), (net.mu2, n_act), (net.d, n_act), (net.v, m)):
        arr[...] = theta[i : i + n]
        i += n
    net.c = float(theta[i])


def _pack(net, gW, gb, gmu1, gmu2, gd, gv, gc) -> np.ndarray:
    parts = [gW.ravel(), gb]
    if net.activation is ActivationKind.CAUCHY:
        parts += [gmu1, gmu2, gd]
    parts += [gv, np.array([gc])]
    return np.concatenate(parts)


# --- evaluation -------------------------------------------------------------

def _as_batch(net: CauchyNet, x) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise ValueError(f"expected points with {net.input_dim} coordinates, got shape {np.shape(x)}")
    return X, single


def _activation_jet(net: CauchyNet, z: np.ndarray, max_order: int = 3) -> list[np.ndarray]:
    if net.activation is ActivationKind.CAUCHY:
        return cauchy_jet(z, net.mu1, net.mu2, net.d, max_order)
    return tanh_jet(z, max_order)


def predict(net: CauchyNet, x) -> np.ndarray:
    """Network value only (no derivatives)."""
    X, single = _as_batch(net, x)
    out = _activation_jet(net, X @ net.W.T + net.b, 0)[0] @ net.v + net.c
    return out[0] if single else out


def forward_jet(net: CauchyNet, x) -> NetJet:
    """Evaluate value, input gradient and per-coordinate second derivatives.

    ``x`` is a single point of length ``input_dim`` or a batch ``(N, input_dim)``.
    """
    X, single = _as_batch(net, x)
    z = X @ net.W.T + net.b
    phi = _activation_jet(net, z, 3)
    value = phi[0] @ net.v + net.c
    grad = (phi[1] * net.v) @ net.W
    diag2 = (phi[2] * net.v) @ (net.W * net.W)
    if single:
        return NetJet(value[0], grad[0], diag2[0], z[0], [p[0] for p in phi])
    return NetJet(value, grad, diag2, z, phi)


def param_grad_accumulate(net: CauchyNet, x, coeffs: JetCoeffs, jet: NetJet | None = None) -> np.ndarray:
    """Gradient over all parameters of ``G = sum_points (a_val*u + a_grad.grad + a_diag2.diag2)``.

    Passing the ``jet`` from :func:`forward_jet` at the same points reuses its
    neuron cache.
    """
    X, _ = _as_batch(net, x)
    N, D = X.shape
    try:
        cv = np.broadcast_to(np.asarray(coeffs.val, dtype=float), (N,))
        cg = np.broadcast_to(np.asarray(coeffs.grad, dtype=float), (N, D))
        cd = np.broadcast_to(np.asarray(coeffs.diag2, dtype=float), (N, D))
    except ValueError as exc:
        raise ValueError(f"coefficient shapes do not match {N} points of dimension {D}") from exc
    if jet is None or jet.z is None:
        z = X @ net.W.T + net.b
        phi = _activation_jet(net, z, 3)
    else:
        z = np.atleast_2d(jet.z)
        phi = [np.atleast_2d(p) for p in jet.phi]

    W, v = net.W, net.v
    P = cg @ W.T
    Q = cd @ (W * W).T
    gc = cv.sum()
    gv = cv @ phi[0] + (phi[1] * P).sum(axis=0) + (phi[2] * Q).sum(axis=0)
    T = (cv[:, None] * phi[1] + phi[2] * P + phi[3] * Q) * v
    gb = T.sum(axis=0)
    gW = T.T @ X + v[:, None] * (phi[1].T @ cg) + 2.0 * v[:, None] * W * (phi[2].T @ cd)

    gmu1 = gmu2 = gd = None
    if net.activation is ActivationKind.CAUCHY:
        sens = cauchy_sensitivities(z, net.mu1, net.mu2, net.d, phi)
        gmu1, gmu2, gd = (
            v * (cv @ s[0] + (P * s[1]).sum(axis=0) + (Q * s[2]).sum(axis=0)) for s in sens
        )
    return _pack(net, gW, gb, gmu1, gmu2, gd, gv, gc)


# --- checkpoints ------------------------------------------------------------

CHECKPOINT_MAGIC = b"CXPINNCK"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<8sBBxxIIQ")
_KIND_CODES = {ActivationKind.CAUCHY: 0, ActivationKind.TANH: 1}


def save_checkpoint(net: CauchyNet, path) -> Path:
    """Write the flat parameter vector behind a fixed 28-byte header.

    Layout (little-endian): magic ``CXPINNCK``, version ``u8``, activation
    code ``u8`` (0 cauchy, 1 tanh), two pad bytes, ``input_dim`` ``u32``,
    ``width`` ``u32``, parameter count ``u64``, then ``float64`` values.
    """
    path = Path(path)
    theta = flatten_params(net)
    header = _HEADER.pack(
        CHECKPOINT_MAGIC, CHECKPOINT_VERSION, _KIND_CODES[net.activation],
        net.input_dim, net.width, theta.size,
    )
    path.write_bytes(header + theta.astype("<f8").tobytes())
    return path


def load_checkpoint(path) -> CauchyNet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated checkpoint")
    magic, version, kind, input_dim, width, n = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a version-{CHECKPOINT_VERSION} checkpoint")
    activation = {code: k for k, code in _KIND_CODES.items()}[kind]
    theta = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if theta.size != n or n != parameter_count(input_dim, width, activation):
        raise ValueError(f"{path}: parameter count mismatch")
    net = init_net(input_dim, width, 0, activation=activation)
    unflatten_params(net, theta.astype(float))
    return net
