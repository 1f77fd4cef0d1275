"""Concentration functions and the core/tail split of a summand.

The interval form (d = 1) maximizes the mass of a closed window [x, x + tau];
the ball form maximizes the mass of a closed Euclidean ball of radius tau.
Both suprema are attained for discrete laws and are computed exactly over a
finite candidate set.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .distributions import DiscreteDistribution, DimensionMismatch

#: slack when accepting enclosing-ball candidates whose radius is near tau
BALL_CANDIDATE_TOL = 1e-9


class CandidateCapExceeded(RuntimeError):
    """Candidate-center enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class ConcentrationResult:
    """Value and maximizer of a concentration function.

    ``center`` is the ball center, or the left endpoint of the window in the
    interval form.  Among optima the lexicographically smallest center is
    reported, so results are deterministic across platforms.
    """

    value: float
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class Decomposition:
    """Split of a law into a concentrated core and a contaminating tail.

    ``core`` is the conditional law inside the closed ball B(center, radius),
    ``tail`` the conditional law strictly outside (absent when everything is
    captured), and ``contamination`` the mass of the tail.  Mixing core with
    weight (1 - contamination) and tail with weight contamination restores
    the input law.
    """

    center: np.ndarray
    contamination: float
    core: DiscreteDistribution
    tail: DiscreteDistribution | None
    core_mean: np.ndarray
    radius: float


def concentration_interval_1d(
    dist: DiscreteDistribution, tau: float
) -> ConcentrationResult:
    """sup_x P[x <= X <= x + tau] for a law on the line.

    The optimum window can always be anchored with its left endpoint at an
    atom, so a sliding window over sorted atoms is exact.
    """
    if dist.dim != 1:
        raise DimensionMismatch("interval concentration is defined for d = 1 only")
    if tau < 0:
        raise ValueError("window length must be nonnegative")
    xs = dist.points[:, 0]  # canonical order: ascending
    prefix = np.concatenate([[0.0], np.cumsum(dist.weights)])
    right = np.searchsorted(xs, xs + tau, side="right")
    masses = prefix[right] - prefix[: xs.size]
    best = int(np.argmax(masses))  # first max = smallest left endpoint
    return ConcentrationResult(float(masses[best]), xs[best : best + 1].copy(), tau)


def _circumcenter(pts: np.ndarray) -> np.ndarray | None:
    """Point equidistant from the rows of ``pts`` inside their affine hull."""
    if pts.shape[0] == 1:
        return pts[0].copy()
    q = pts[1:] - pts[0]
    rhs = 0.5 * np.einsum("ij,ij->i", q, q)
    sol, *_ = np.linalg.lstsq(q, rhs, rcond=None)
    center = pts[0] + sol
    r = np.linalg.norm(pts - center, axis=1)
    if r.max() - r.min() > 1e-9 * (1.0 + r.max()):
        return None  # affinely degenerate input, no common circumsphere
    return center


def _min_enclosing_ball(pts: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact minimal enclosing ball of a few points.

    The optimum is the smallest circumsphere of a boundary subset, so for the
    small sets used here plain subset enumeration is exact.
    """
    best_c, best_r = None, np.inf
    for size in range(1, pts.shape[0] + 1):
        for sub in combinations(range(pts.shape[0]), size):
            c = _circumcenter(pts[list(sub)])
            if c is None:
                continue
            r = float(np.max(np.linalg.norm(pts - c, axis=1)))
            r_boundary = float(np.linalg.norm(pts[sub[0]] - c))
            if r <= r_boundary * (1 + 1e-12) + 1e-12 and r < best_r:
                best_c, best_r = c, r
    assert best_c is not None
    return best_c, best_r


def _ball_mass(dist: DiscreteDistribution, center: np.ndarray, tau: float) -> float:
    diff = dist.points - center
    inside = np.einsum("ij,ij->i", diff, diff) <= tau * tau
    return float(np.sum(dist.weights[inside]))


def concentration_ball(
    dist: DiscreteDistribution, tau: float, *, candidate_cap: int = 10_000_000
) -> ConcentrationResult:
    """sup_x P[|X - x| <= tau], exact for discrete laws.

    Candidate centers are every atom plus, for every subset of at most d + 1
    atoms whose minimal enclosing ball has radius <= tau, that ball's center.
    Some optimal center is always of this form.
    """
    if tau < 0:
        raise ValueError("radius must be nonnegative")
    n, d = dist.support_size, dist.dim
    n_candidates = sum(comb(n, k) for k in range(1, min(n, d + 1) + 1))
    if n_candidates > candidate_cap:
        raise CandidateCapExceeded(
            f"{n_candidates} candidate centers exceed the cap {candidate_cap}"
        )
    candidates = [dist.points]
    for size in range(2, min(n, d + 1) + 1):
        extra = []
        for sub in combinations(range(n), size):
            c, r = _min_enclosing_ball(dist.points[list(sub)])
            if r <= tau + BALL_CANDIDATE_TOL:
                extra.append(c)
        if extra:
            candidates.append(np.asarray(extra))
    centers = np.concatenate(candidates)
    best_value = -1.0
    best_center = None
    for c in centers:
        m = _ball_mass(dist, c, tau)
        if m > best_value or (
            m == best_value and tuple(c) < tuple(best_center)
        ):
            best_value, best_center = m, c
    return ConcentrationResult(best_value, np.array(best_center), tau)


def decompose(
    dist: DiscreteDistribution, tau: float, *, candidate_cap: int = 10_000_000
) -> Decomposition:
    """Split ``dist`` at a maximizing ball of radius ``tau``.

    The center is the ball-concentration maximizer (lexicographic tie-break);
    the core/tail are the conditional laws inside/outside the closed ball.
    """
    res = concentration_ball(dist, tau, candidate_cap=candidate_cap)
    diff = dist.points - res.center
    inside = np.einsum("ij,ij->i", diff, diff) <= tau * tau
    mass_in = float(np.sum(dist.weights[inside]))
    p = 1.0 - mass_in
    core = DiscreteDistribution(dist.points[inside], dist.weights[inside] / mass_in)
    core_mean = (dist.weights[inside] @ dist.points[inside]) / mass_in
    tail = None
    if np.any(~inside):
        mass_out = float(np.sum(dist.weights[~inside]))
        tail = DiscreteDistribution(
            dist.points[~inside], dist.weights[~inside] / mass_out
        )
    else:
        p = 0.0
    return Decomposition(res.center, p, core, tail, core_mean, tau)


def max_contamination(dists, tau: float) -> float:
    """Largest tail mass of the summands at the common radius ``tau``."""
    laws = list(dists)
    if not laws:
        raise ValueError("need at least one distribution")
    dim = laws[0].dim
    for law in laws:
        if law.dim != dim:
            raise DimensionMismatch("summands must share one dimension")
    return max(decompose(law, tau).contamination for law in laws)
