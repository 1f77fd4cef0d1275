"""Finite discrete probability laws on R^d.

Atoms are arbitrary real vectors; coincident atoms (exact coordinate
equality) are merged, and nothing is ever snapped to a grid.  All operations
are pure and return new objects; the backing arrays are frozen after
construction, so values are safe to share across threads.  Reductions use
numpy's pairwise summation in a fixed order, so results are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rng import stream

#: weights below this are pruned after arithmetic (convolution); the removed
#: mass is redistributed proportionally and recorded in ``pruned_mass``.
PRUNE_EPS = 1e-15

#: tolerance on the total mass at construction time
MASS_TOL = 1e-12

_SAMPLE_TAG = 0xD157


class DimensionMismatch(ValueError):
    """Operands live in different ambient dimensions."""


class FormatError(ValueError):
    """A JSON document does not match the expected schema.

    ``path`` points at the offending field, e.g. ``$.atoms[3].w``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float vector, optionally of length ``dim``."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise ValueError(f"a point must be a 1-D vector, got shape {p.shape}")
    if p.size == 0:
        raise ValueError("a point must have dimension >= 1")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.shape[0]}")
    return p


def _canonical_arrays(points, weights, *, prune: bool):
    """Merge coincident rows, sort lexicographically, optionally prune.

    Weights of merged atoms are summed smallest-first so the result does not
    depend on the input order.  Returns ``(points, weights, pruned_mass)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    w = np.asarray(weights, dtype=float)
    if pts.shape[0] != w.shape[0]:
        raise ValueError("points and weights must have equal length")
    if pts.shape[0] == 0:
        raise ValueError("a distribution needs at least one atom")
    pts = pts + 0.0  # normalizes -0.0 to +0.0 so merge keys are unambiguous
    d = pts.shape[1]
    order = np.lexsort((w,) + tuple(pts[:, j] for j in range(d - 1, -1, -1)))
    pts = pts[order]
    w = w[order]
    new_group = np.empty(pts.shape[0], dtype=bool)
    new_group[0] = True
    if pts.shape[0] > 1:
        new_group[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    starts = np.flatnonzero(new_group)
    merged_pts = pts[starts]
    merged_w = np.add.reduceat(w, starts)
    pruned = 0.0
    if prune:
        keep = merged_w >= PRUNE_EPS
        if not keep.all():
            if not keep.any():
                raise ValueError("all mass fell below the pruning threshold")
            total = float(np.sum(merged_w))
            pruned = float(np.sum(merged_w[~keep]))
            merged_pts = merged_pts[keep]
            merged_w = merged_w[keep] * (total / float(np.sum(merged_w[keep])))
    return merged_pts, merged_w, pruned


def _check_canonical(pts: np.ndarray) -> None:
    n, d = pts.shape
    if n <= 1:
        return
    order = np.lexsort(tuple(pts[:, j] for j in range(d - 1, -1, -1)))
    if not np.array_equal(order, np.arange(n)):
        raise ValueError("atoms are not in canonical (lexicographic) order")
    if not np.any(pts[1:] != pts[:-1], axis=1).all():
        raise ValueError("atoms are not pairwise distinct")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A finitely supported probability law on R^d.

    ``points`` is an (n, d) array of distinct rows in lexicographic order and
    ``weights`` the matching positive masses summing to one.  Use
    :meth:`from_atoms` to build from unordered data; the raw constructor
    expects canonical input.
    """

    points: np.ndarray
    weights: np.ndarray
    pruned_mass: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or w.ndim != 1 or pts.shape[0] != w.shape[0]:
            raise ValueError("points must be (n, d) and weights (n,)")
        if pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("a distribution needs at least one atom in R^d, d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atom coordinates must be finite")
        if not np.all(w > 0.0):
            raise ValueError("weights must be strictly positive")
        _check_canonical(pts)
        total = float(np.sum(w))
        if abs(total - self._expected_mass()) > MASS_TOL:
            raise ValueError(
                f"weights sum to {total!r}, expected {self._expected_mass()!r}"
            )
        pts = pts.copy()
        w = w.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def _expected_mass(self) -> float:
        return 1.0

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def support_size(self) -> int:
        return self.points.shape[0]

    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def atoms(self):
        """Iterate over (point, weight) pairs."""
        for i in range(self.support_size):
            yield self.points[i].copy(), float(self.weights[i])

    def __eq__(self, other) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.weights, other.weights
        )

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(dim={self.dim}, atoms={self.support_size}, "
            f"mass={self.total_mass():.12g})"
        )

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[Sequence[float], float]], **kw):
        """Build from (coordinates, weight) pairs; merges coincident atoms."""
        pairs = list(atoms)
        if not pairs:
            raise ValueError("empty atom list")
        pts = np.asarray([as_point(p) for p, _ in pairs], dtype=float)
        w = np.asarray([float(wt) for _, wt in pairs], dtype=float)
        pts, w, _ = _canonical_arrays(pts, w, prune=False)
        return cls(pts, w, **kw)


@dataclass(frozen=True, eq=False)
class SubProbabilityDistribution(DiscreteDistribution):
    """A discrete law missing a recorded amount of mass.

    ``deficiency`` is the gap 1 - total mass, produced e.g. by truncating a
    convergent series of convolutions; it is carried, never renormalized.
    """

    deficiency: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.deficiency < 1.0:
            raise ValueError("deficiency must lie in [0, 1)")
        super().__post_init__()

    def _expected_mass(self) -> float:
        return 1.0 - self.deficiency

    def __eq__(self, other) -> bool:
        base = super().__eq__(other)
        if base is NotImplemented or base is False:
            return base
        return self.deficiency == other.deficiency


def delta(point) -> DiscreteDistribution:
    """Point mass at ``point``."""
    p = as_point(point)
    return DiscreteDistribution(p[None, :], np.array([1.0]))


def _rebuild(points, weights, pruned_mass):
    """Wrap raw merged arrays in the proper class based on total mass."""
    total = float(np.sum(weights))
    if abs(total - 1.0) <= MASS_TOL:
        return DiscreteDistribution(points, weights, pruned_mass=pruned_mass)
    deficiency = max(0.0, 1.0 - total)
    return SubProbabilityDistribution(
        points, weights, pruned_mass=pruned_mass, deficiency=deficiency
    )


def _convolve_arrays(pa, wa, pb, wb):
    n, m = pa.shape[0], pb.shape[0]
    if n * m > 50_000_000:
        raise ValueError(f"convolution would create {n * m} atom pairs; refusing")
    pts = (pa[:, None, :] + pb[None, :, :]).reshape(n * m, pa.shape[1])
    w = np.multiply.outer(wa, wb).reshape(n * m)
    return _canonical_arrays(pts, w, prune=True)


def convolve(a: DiscreteDistribution, b: DiscreteDistribution) -> DiscreteDistribution:
    """Law of the sum of independent draws from ``a`` and ``b``.

    Coincident sums are merged exactly; weights below ``PRUNE_EPS`` are pruned
    with the removed mass redistributed and recorded.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot convolve R^{a.dim} with R^{b.dim}")
    pts, w, pruned = _convolve_arrays(a.points, a.weights, b.points, b.weights)
    return _rebuild(pts, w, a.pruned_mass + b.pruned_mass + pruned)


def pushforward(dist: DiscreteDistribution, matrix) -> DiscreteDistribution:
    """Image law under a linear map given as an (m, d) matrix.

    Total mass is preserved exactly; coincident images are merged.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != dist.dim:
        raise DimensionMismatch(
            f"matrix shape {a.shape} does not act on R^{dist.dim}"
        )
    images = dist.points @ a.T
    pts, w, _ = _canonical_arrays(images, dist.weights, prune=False)
    if isinstance(dist, SubProbabilityDistribution):
        return SubProbabilityDistribution(
            pts, w, pruned_mass=dist.pruned_mass, deficiency=dist.deficiency
        )
    return DiscreteDistribution(pts, w, pruned_mass=dist.pruned_mass)


def shift(dist: DiscreteDistribution, a) -> DiscreteDistribution:
    """Translate every atom by the vector ``a``."""
    v = as_point(a, dist.dim)
    pts, w, _ = _canonical_arrays(dist.points + v, dist.weights, prune=False)
    if isinstance(dist, SubProbabilityDistribution):
        return SubProbabilityDistribution(
            pts, w, pruned_mass=dist.pruned_mass, deficiency=dist.deficiency
        )
    return DiscreteDistribution(pts, w, pruned_mass=dist.pruned_mass)


def characteristic_function(dist: DiscreteDistribution, t) -> complex:
    """E exp(i <t, X>), a complex number of modulus at most the total mass."""
    v = as_point(t, dist.dim)
    phases = dist.points @ v
    return complex(np.sum(dist.weights * np.exp(1j * phases)))


def characteristic_function_batch(dist: DiscreteDistribution, ts) -> np.ndarray:
    """Characteristic function at each row of ``ts``; chunked over atoms."""
    tarr = np.asarray(ts, dtype=float)
    if tarr.ndim == 1:
        tarr = tarr[:, None]
    if tarr.shape[1] != dist.dim:
        raise DimensionMismatch(
            f"evaluation points of dim {tarr.shape[1]} vs law in R^{dist.dim}"
        )
    out = np.zeros(tarr.shape[0], dtype=complex)
    chunk = max(1, 4_000_000 // max(1, tarr.shape[0]))
    for lo in range(0, dist.support_size, chunk):
        hi = min(dist.support_size, lo + chunk)
        phases = tarr @ dist.points[lo:hi].T
        w = dist.weights[lo:hi]
        out += np.cos(phases) @ w + 1j * (np.sin(phases) @ w)
    return out


def _draw(dist: DiscreteDistribution, gen: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-CDF draws using an existing generator (conditional on support)."""
    cum = np.cumsum(dist.weights)
    u = gen.random(n) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, u, side="right"), dist.support_size - 1)
    return dist.points[idx].copy()


def sample(dist: DiscreteDistribution, seed: int, n: int) -> np.ndarray:
    """``n`` i.i.d. draws by inverse CDF; bit-identical for a given seed."""
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    if n == 0:
        return np.empty((0, dist.dim))
    return _draw(dist, stream(seed, _SAMPLE_TAG), n)


def empirical(points) -> DiscreteDistribution:
    """Empirical law of a point cloud: distinct points weighted by frequency."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("empirical law of an empty sample is undefined")
    merged, counts, _ = _canonical_arrays(pts, np.ones(pts.shape[0]), prune=False)
    return DiscreteDistribution(merged, counts / pts.shape[0])


def total_variation(a: DiscreteDistribution, b: DiscreteDistribution) -> float:
    """Exact total-variation distance between two discrete laws."""
    if a.dim != b.dim:
        raise DimensionMismatch("total variation needs a common dimension")
    pts = np.concatenate([a.points, b.points])
    signed = np.concatenate([a.weights, -b.weights])
    pts = pts + 0.0
    d = pts.shape[1]
    order = np.lexsort(tuple(pts[:, j] for j in range(d - 1, -1, -1)))
    pts, signed = pts[order], signed[order]
    new_group = np.empty(pts.shape[0], dtype=bool)
    new_group[0] = True
    new_group[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    diffs = np.add.reduceat(signed, np.flatnonzero(new_group))
    return 0.5 * float(np.sum(np.abs(diffs)))


# ---------------------------------------------------------------------------
# JSON interface: {"dim": d, "atoms": [{"x": [...], "w": w}, ...]}
# ---------------------------------------------------------------------------


def distribution_to_json(dist: DiscreteDistribution) -> dict:
    doc = {
        "dim": dist.dim,
        "atoms": [{"x": list(map(float, p)), "w": w} for p, w in dist.atoms()],
    }
    if isinstance(dist, SubProbabilityDistribution):
        doc["deficiency"] = dist.deficiency
    return doc


def distribution_from_json(obj, path: str = "$") -> DiscreteDistribution:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    if "dim" not in obj:
        raise FormatError(f"{path}.dim", "missing field")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"{path}.dim", "must be a positive integer")
    atoms = obj.get("atoms")
    if not isinstance(atoms, list) or not atoms:
        raise FormatError(f"{path}.atoms", "must be a nonempty array")
    pts = np.empty((len(atoms), dim))
    w = np.empty(len(atoms))
    for i, atom in enumerate(atoms):
        apath = f"{path}.atoms[{i}]"
        if not isinstance(atom, dict):
            raise FormatError(apath, "expected an object")
        x = atom.get("x")
        if not isinstance(x, list) or len(x) != dim:
            raise FormatError(f"{apath}.x", f"must be an array of length {dim}")
        try:
            pts[i] = [float(c) for c in x]
        except (TypeError, ValueError):
            raise FormatError(f"{apath}.x", "entries must be numbers") from None
        wt = atom.get("w")
        if not isinstance(wt, (int, float)) or isinstance(wt, bool):
            raise FormatError(f"{apath}.w", "must be a number")
        if not wt > 0:
            raise FormatError(f"{apath}.w", "must be strictly positive")
        w[i] = float(wt)
    if not np.all(np.isfinite(pts)):
        raise FormatError(f"{path}.atoms", "coordinates must be finite")
    pts, w, _ = _canonical_arrays(pts, w, prune=False)
    deficiency = obj.get("deficiency", 0.0)
    if not isinstance(deficiency, (int, float)) or isinstance(deficiency, bool):
        raise FormatError(f"{path}.deficiency", "must be a number")
    try:
        if deficiency:
            return SubProbabilityDistribution(pts, w, deficiency=float(deficiency))
        return DiscreteDistribution(pts, w)
    except ValueError as exc:
        raise FormatError(path, str(exc)) from None


def load_distribution(path: str) -> DiscreteDistribution:
    with open(path) as fh:
        return distribution_from_json(json.load(fh))


def dump_distribution(dist: DiscreteDistribution, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(distribution_to_json(dist), fh, indent=2, sort_keys=True)
        fh.write("\n")
