"""Distance functionals between discrete laws over polyhedral events.

The orthant functional compares lower-orthant probabilities with a diagonal
shift and is exact for discrete laws.  The polyhedral functionals take a
supremum over a class of polyhedra that is not finitely computable, so they
are evaluated over explicit finite families and reported as certified lower
bounds with the family recorded.  Raw values may be negative (e.g. for
identical laws); estimates clamp at zero and keep the raw value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import DimensionMismatch, DiscreteDistribution
from .polyhedra import (
    Polyhedron,
    is_empty,
    neighborhood_contains_many,
)
from .rng import stream

_FAMILY_TAG = 0xFA31


class GridCapExceeded(RuntimeError):
    """The orthant candidate grid would be too large to enumerate."""


class MonotonicityError(ValueError):
    """A function claimed nonincreasing failed the probe check."""


@dataclass(frozen=True)
class MetricEstimate:
    """Value of a distance functional plus evaluation metadata.

    ``is_lower_bound`` is set for family-based suprema; ``raw_value`` is the
    unclamped supremum; ``mc_error`` is the caller-supplied Monte Carlo error
    of the input laws (zero for exact laws); ``argmax_index`` points at the
    first family member attaining the supremum.
    """

    value: float
    lam: float | None
    family_size: int
    is_lower_bound: bool
    mc_error: float = 0.0
    raw_value: float = 0.0
    argmax_index: int | None = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "lambda": self.lam,
            "family_size": self.family_size,
            "is_lower_bound": self.is_lower_bound,
            "mc_error": self.mc_error,
            "raw_value": self.raw_value,
            "argmax_index": self.argmax_index,
        }


@dataclass(frozen=True)
class InfResult:
    """Result of the crossing search: the infimum and a saturation flag set
    when no crossing exists below the search ceiling."""

    value: float
    saturated: bool


@dataclass(frozen=True)
class PolyhedronFamily:
    """An explicit finite stand-in for the class of m-facet polyhedra."""

    members: tuple[Polyhedron, ...]
    m: int
    provenance: str = "user"

    def __post_init__(self):
        if not self.members:
            raise ValueError("a family needs at least one member")
        d = self.members[0].dim
        for P in self.members:
            if P.dim != d:
                raise ValueError("family members must share one dimension")
            if P.n_constraints > self.m:
                raise ValueError(
                    f"member with {P.n_constraints} constraints exceeds budget {self.m}"
                )

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def __len__(self) -> int:
        return len(self.members)


def random_family(
    m: int,
    d: int,
    count: int,
    scale: float,
    seed: int,
    anchors=None,
) -> PolyhedronFamily:
    """Seeded family of ``count`` polyhedra with ``m`` unit normals each.

    Normals are uniform on the sphere; each offset is the anchor's projection
    plus a uniform [-scale, scale] perturbation, so members straddle the
    anchor points (by default the origin).
    """
    if min(m, d, count) < 1:
        raise ValueError("m, d and count must all be >= 1")
    anchor_arr = (
        np.zeros((1, d)) if anchors is None else np.atleast_2d(np.asarray(anchors, float))
    )
    gen = stream(seed, _FAMILY_TAG)
    members = []
    for _ in range(count):
        normals = gen.normal(size=(m, d))
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        c = anchor_arr[int(gen.integers(anchor_arr.shape[0]))]
        offsets = normals @ c + gen.uniform(-1.0, 1.0, size=m) * scale
        members.append(Polyhedron.from_arrays(normals, offsets))
    return PolyhedronFamily(
        members=tuple(members),
        m=m,
        provenance=f"random(seed={seed}, count={count}, scale={scale})",
    )


def family_to_json(fam: PolyhedronFamily) -> dict:
    from .polyhedra import polyhedron_to_json

    return {
        "dim": fam.dim,
        "m": fam.m,
        "provenance": fam.provenance,
        "members": [polyhedron_to_json(P) for P in fam.members],
    }


def family_from_json(obj, path: str = "$") -> PolyhedronFamily:
    from .distributions import FormatError
    from .polyhedra import polyhedron_from_json

    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    members = obj.get("members")
    if not isinstance(members, list) or not members:
        raise FormatError(f"{path}.members", "must be a nonempty array")
    polys = tuple(
        polyhedron_from_json(p, f"{path}.members[{i}]") for i, p in enumerate(members)
    )
    m = obj.get("m", max(P.n_constraints for P in polys))
    if not isinstance(m, int) or m < 1:
        raise FormatError(f"{path}.m", "must be a positive integer")
    return PolyhedronFamily(
        members=polys, m=m, provenance=str(obj.get("provenance", "user"))
    )


# ---------------------------------------------------------------------------
# Orthant functional (axis-aligned lower sets with a diagonal shift)
# ---------------------------------------------------------------------------


def _cdf_values(dist: DiscreteDistribution, xs: np.ndarray) -> np.ndarray:
    """P[X <= x] componentwise, for each row x of ``xs``."""
    if dist.dim == 1:
        order = dist.points[:, 0]  # canonical order is ascending for d = 1
        prefix = np.concatenate([[0.0], np.cumsum(dist.weights)])
        return prefix[np.searchsorted(order, xs[:, 0], side="right")]
    out = np.empty(xs.shape[0])
    chunk = max(1, 2_000_000 // max(1, dist.support_size))
    for lo in range(0, xs.shape[0], chunk):
        hi = min(xs.shape[0], lo + chunk)
        mask = np.all(dist.points[None, :, :] <= xs[lo:hi, None, :], axis=2)
        out[lo:hi] = mask @ dist.weights
    return out


def _orthant_grid(a: DiscreteDistribution, b: DiscreteDistribution, cap: int):
    axes = [
        np.unique(np.concatenate([a.points[:, j], b.points[:, j]]))
        for j in range(a.dim)
    ]
    size = math.prod(len(ax) for ax in axes)
    if size > cap:
        raise GridCapExceeded(f"orthant grid of {size} points exceeds cap {cap}")
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def levy_orthant_lambda(
    a: DiscreteDistribution,
    b: DiscreteDistribution,
    lam: float,
    *,
    mc_error: float = 0.0,
    max_grid: int = 4_000_000,
) -> MetricEstimate:
    """Exact sup_x of the shifted orthant-probability deficits.

    The supremum over all x is attained on the grid spanned by the atom
    coordinates of both laws (per axis), because the orthant CDFs only grow
    at those coordinates.
    """
    if a.dim != b.dim:
        raise DimensionMismatch("laws must share one dimension")
    if lam < 0:
        raise ValueError("shift must be nonnegative")
    grid = _orthant_grid(a, b, max_grid)
    fa = _cdf_values(a, grid)
    fb = _cdf_values(b, grid)
    fa_shift = _cdf_values(a, grid + lam)
    fb_shift = _cdf_values(b, grid + lam)
    raw = float(max(np.max(fa - fb_shift), np.max(fb - fa_shift)))
    return MetricEstimate(
        value=max(raw, 0.0),
        lam=lam,
        family_size=0,
        is_lower_bound=False,
        mc_error=mc_error,
        raw_value=raw,
    )


# ---------------------------------------------------------------------------
# Polyhedral functionals over explicit families
# ---------------------------------------------------------------------------


def _prob_in(dist: DiscreteDistribution, P: Polyhedron) -> float:
    mask = P.contains_many(dist.points)
    return float(np.sum(dist.weights[mask]))


def _prob_in_neighborhood(
    dist: DiscreteDistribution, P: Polyhedron, lam: float, tol: float
) -> float:
    if is_empty(P):
        return 0.0
    mask = neighborhood_contains_many(P, lam, dist.points, tol=tol)
    return float(np.sum(dist.weights[mask]))


def _family_sup(terms) -> tuple[float, int | None]:
    raw, arg = -np.inf, None
    for i, t in enumerate(terms):
        if t > raw:
            raw, arg = t, i
    return float(raw), arg


def slab_metric_lambda(
    a: DiscreteDistribution,
    b: DiscreteDistribution,
    lam: float,
    family: PolyhedronFamily,
    *,
    mc_error: float = 0.0,
) -> MetricEstimate:
    """Largest slab-expansion deficit over the family (a certified lower
    bound for the supremum over all m-facet polyhedra)."""
    if a.dim != b.dim or a.dim != family.dim:
        raise DimensionMismatch("laws and family must share one dimension")
    if lam < 0:
        raise ValueError("slab width must be nonnegative")
    terms = []
    for P in family.members:
        expanded = P.slab_expand(lam)
        terms.append(
            max(
                _prob_in(a, P) - _prob_in(b, expanded),
                _prob_in(b, P) - _prob_in(a, expanded),
            )
        )
    raw, arg = _family_sup(terms)
    return MetricEstimate(
        value=max(raw, 0.0),
        lam=lam,
        family_size=len(family),
        is_lower_bound=True,
        mc_error=mc_error,
        raw_value=raw,
        argmax_index=arg,
    )


def neighborhood_metric_lambda(
    a: DiscreteDistribution,
    b: DiscreteDistribution,
    lam: float,
    family: PolyhedronFamily,
    *,
    mc_error: float = 0.0,
    tol: float = 1e-9,
) -> MetricEstimate:
    """Largest metric-neighborhood deficit over the family.

    Neighborhood membership is strict (dist < lam - tol); empty members
    contribute zero.  Dominates the slab functional member by member.
    """
    if a.dim != b.dim or a.dim != family.dim:
        raise DimensionMismatch("laws and family must share one dimension")
    if lam <= 0:
        raise ValueError("neighborhood width must be positive")
    terms = []
    for P in family.members:
        if is_empty(P):
            terms.append(0.0)
            continue
        terms.append(
            max(
                _prob_in(a, P) - _prob_in_neighborhood(b, P, lam, tol),
                _prob_in(b, P) - _prob_in_neighborhood(a, P, lam, tol),
            )
        )
    raw, arg = _family_sup(terms)
    return MetricEstimate(
        value=max(raw, 0.0),
        lam=lam,
        family_size=len(family),
        is_lower_bound=True,
        mc_error=mc_error,
        raw_value=raw,
        argmax_index=arg,
    )


def rho_m(
    a: DiscreteDistribution,
    b: DiscreteDistribution,
    family: PolyhedronFamily,
    *,
    mc_error: float = 0.0,
) -> MetricEstimate:
    """Largest absolute probability gap over the family (no expansion)."""
    if a.dim != b.dim or a.dim != family.dim:
        raise DimensionMismatch("laws and family must share one dimension")
    terms = [abs(_prob_in(a, P) - _prob_in(b, P)) for P in family.members]
    raw, arg = _family_sup(terms)
    return MetricEstimate(
        value=max(raw, 0.0),
        lam=None,
        family_size=len(family),
        is_lower_bound=True,
        mc_error=mc_error,
        raw_value=raw,
        argmax_index=arg,
    )


def bisect_inf(
    f: Callable[[float], float],
    lam_max: float,
    *,
    tol: float = 1e-6,
    n_probe: int = 8,
    mono_tol: float = 1e-9,
) -> InfResult:
    """inf{lam in (0, lam_max] : f(lam) < lam} for nonincreasing ``f``.

    Monotonicity is validated on probe points first (guarding against Monte
    Carlo noise being fed in); the predicate f(lam) < lam is then monotone in
    lam, so plain bisection finds the crossing.  Returns ``lam_max`` with the
    saturated flag when there is no crossing.
    """
    if lam_max <= 0:
        raise ValueError("lam_max must be positive")
    probes = [lam_max * i / n_probe for i in range(1, n_probe + 1)]
    values = [f(lam) for lam in probes]
    for v0, v1 in zip(values, values[1:]):
        if v1 > v0 + mono_tol:
            raise MonotonicityError(
                f"f increased from {v0!r} to {v1!r} along the probe grid"
            )
    if not values[-1] < lam_max:
        return InfResult(value=lam_max, saturated=True)
    lo, hi = 0.0, lam_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < mid:
            hi = mid
        else:
            lo = mid
    return InfResult(value=hi, saturated=False)


def orthant_subfamily(
    a: DiscreteDistribution, b: DiscreteDistribution, *, max_grid: int = 100_000
) -> PolyhedronFamily:
    """Axis-aligned lower-orthant polyhedra at every candidate grid point.

    On this family the slab functional coincides with the orthant functional,
    which embeds the axis-aligned class into the polyhedral one.
    """
    grid = _orthant_grid(a, b, max_grid)
    d = a.dim
    eye = np.eye(d)
    members = tuple(Polyhedron.from_arrays(eye, x) for x in grid)
    return PolyhedronFamily(members=members, m=d, provenance="orthant-grid")
