"""Seeded point sets for training and testing.

All draws use numpy's Philox-4x64-10 bit generator. It is counter-based, and
seeding goes through ``SeedSequence([seed, role_tag])``, so each role gets an
independent stream and a given seed reproduces the same points on any platform.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .problems import PdeProblem

PRNG_NAME = "philox4x64-10 (numpy.random.Philox, SeedSequence([seed, role]))"


class Role(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    INITIAL = "initial"
    TEST = "test"


_ROLE_TAGS = {Role.INTERIOR: 1, Role.BOUNDARY: 2, Role.INITIAL: 3, Role.TEST: 4}


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    role: Role
    seed: int
    generator: str = "uniform-random"

    def __len__(self) -> int:
        return self.points.shape[0]


def rng_for(seed: int, role: Role) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), _ROLE_TAGS[Role(role)]])))


def _uniform_box(rng, domain: np.ndarray, n: int) -> np.ndarray:
    lo, hi = domain[:, 0], domain[:, 1]
    return lo + (hi - lo) * rng.random((n, domain.shape[0]))


def sample_interior(problem: PdeProblem, n: int, seed: int) -> PointSet:
    """``n`` points uniform over the domain box (time included when present)."""
    if n < 1:
        raise ValueError("need at least one interior point")
    pts = _uniform_box(rng_for(seed, Role.INTERIOR), problem.domain, n)
    return PointSet(pts, Role.INTERIOR, seed)


def sample_boundary(problem: PdeProblem, n: int, seed: int) -> PointSet:
    """Uniform over the spatial faces: pick one of the ``2 * spatial_dim`` faces, then uniform on it."""
    rng = rng_for(seed, Role.BOUNDARY)
    pts = _uniform_box(rng, problem.domain, n)
    axes = np.asarray(problem.spatial_axes)
    face = rng.integers(0, 2 * axes.size, size=n)
    ax = axes[face // 2]
    side = face % 2
    pts[np.arange(n), ax] = problem.domain[ax, side]
    return PointSet(pts, Role.BOUNDARY, seed)


def sample_initial(problem: PdeProblem, n: int, seed: int) -> PointSet:
    if not problem.has_time:
        raise ValueError(f"{problem.name} has no time coordinate")
    pts = _uniform_box(rng_for(seed, Role.INITIAL), problem.domain, n)
    pts[:, problem.time_axis] = problem.domain[problem.time_axis, 0]
    return PointSet(pts, Role.INITIAL, seed)


def test_points(problem: PdeProblem, seed: int, n: int = 90_000, grid_side: int = 300) -> PointSet:
    """Evaluation set: a closed ``grid_side^2`` grid for two-input problems, else ``n`` random points."""
    if problem.input_dim == 2:
        axes = [np.linspace(lo, hi, grid_side) for lo, hi in problem.domain]
        gx, gy = np.meshgrid(*axes, indexing="ij")
        return PointSet(np.column_stack([gx.ravel(), gy.ravel()]), Role.TEST, seed, "grid")
    pts = _uniform_box(rng_for(seed, Role.TEST), problem.domain, n)
    return PointSet(pts, Role.TEST, seed)


# --- binary export ----------------------------------------------------------

POINTS_MAGIC = b"CXPINNPT"
POINTS_VERSION = 1
_HEADER = struct.Struct("<8sBBBxIQQ")
_GENERATORS = {"uniform-random": 0, "grid": 1}


def save_points(ps: PointSet, path) -> Path:
    """Write a point set: 32-byte little-endian header then row-major ``float64`` points.

    Header: magic ``CXPINNPT``, version ``u8``, role tag ``u8``, generator code
    ``u8`` (0 random, 1 grid), pad, dimension ``u32``, row count ``u64``, seed ``u64``.
    """
    path = Path(path)
    n, dim = ps.points.shape
    header = _HEADER.pack(POINTS_MAGIC, POINTS_VERSION, _ROLE_TAGS[ps.role], _GENERATORS[ps.generator],
                          dim, n, int(ps.seed) & 0xFFFFFFFFFFFFFFFF)
    path.write_bytes(header + np.ascontiguousarray(ps.points, dtype="<f8").tobytes())
    return path


def load_points(path) -> PointSet:
    raw = Path(path).read_bytes()
    magic, version, role, gen, dim, n, seed = _HEADER.unpack_from(raw)
    if magic != POINTS_MAGIC or version != POINTS_VERSION:
        raise ValueError(f"{path}: not a version-{POINTS_VERSION} point file")
    pts = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if pts.size != n * dim:
        raise ValueError(f"{path}: truncated point file")
    roles = {v: k for k, v in _ROLE_TAGS.items()}
    gens = {v: k for k, v in _GENERATORS.items()}
    return PointSet(pts.reshape(n, dim).astype(float), roles[role], seed, gens[gen])


test_points.__test__ = False  # not a pytest test
