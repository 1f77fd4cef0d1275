"""Shared builders for the test suite."""

import numpy as np

from idla.distributions import DiscreteDistribution
from idla.polyhedra import Polyhedron


def law(*pairs):
    return DiscreteDistribution.from_atoms([(np.atleast_1d(p), w) for p, w in pairs])


def unit_square() -> Polyhedron:
    return Polyhedron.from_arrays(
        [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0]
    )


def triangle() -> Polyhedron:
    s = 1 / np.sqrt(2)
    return Polyhedron.from_arrays(
        [[-1, 0], [0, -1], [s, s]], [0, 0, s]
    )


def box(d: int) -> Polyhedron:
    eye = np.eye(d)
    return Polyhedron.from_arrays(
        np.concatenate([eye, -eye]), np.ones(2 * d)
    )


def random_polytope(gen, d: int) -> Polyhedron:
    """A bounded random polytope with at most six facets in dimension <= 3."""
    c = gen.uniform(-1, 1, d)
    if d == 1:
        normals = np.array([[1.0], [-1.0]])
    elif d == 2:
        m = int(gen.integers(3, 7))
        ang = 2 * np.pi * np.arange(m) / m + gen.uniform(-0.3, 0.3, m)
        normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        base = np.concatenate([np.eye(3), -np.eye(3)])
        q, _ = np.linalg.qr(gen.normal(size=(3, 3)))
        normals = base @ q.T + 0.15 * gen.normal(size=(6, 3))
        normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = normals @ c + gen.uniform(0.2, 1.0, len(normals))
    return Polyhedron.from_arrays(normals, offsets)


def ball_grid_oracle(dist, tau, resolution=1e-3):
    """Exhaustive grid search over ball centers (lower bounds the supremum)."""
    lo = dist.points.min(axis=0) - tau
    hi = dist.points.max(axis=0) + tau
    axes = [np.arange(lo[j], hi[j] + resolution, resolution) for j in range(dist.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.reshape(-1) for m in mesh], axis=1)
    pts_sq = np.sum(dist.points**2, axis=1)
    best = 0.0
    for start in range(0, centers.shape[0], 200_000):
        cs = centers[start : start + 200_000]
        d2 = np.sum(cs**2, axis=1)[:, None] - 2.0 * cs @ dist.points.T + pts_sq
        masses = (d2 <= tau * tau + 1e-12) @ dist.weights
        best = max(best, float(masses.max()))
    return best


def random_law(gen, d: int, max_atoms: int = 6, dyadic: bool = False):
    n = int(gen.integers(1, max_atoms + 1))
    if dyadic:
        pts = gen.integers(-4, 5, size=(n, d)) / 2.0
        raw = gen.integers(1, 17, size=n)
        w = raw / 64.0
        w[0] += 1.0 - w.sum()  # dyadic weights summing to one exactly
        if w[0] <= 0:
            return random_law(gen, d, max_atoms, dyadic)
    else:
        pts = gen.normal(size=(n, d))
        w = gen.dirichlet(np.ones(n))
    return DiscreteDistribution.from_atoms(list(zip(pts, w)))
