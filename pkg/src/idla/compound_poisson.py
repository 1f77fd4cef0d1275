"""Compound-Poisson laws and the accompanying infinitely divisible approximant.

``compound_poisson_exact`` materializes the law of a sum of Poisson(1)-many
i.i.d. copies of a discrete law, truncated at a fixed number of terms with
the missing tail mass recorded (never renormalized), so all derived
inequalities stay one-sided and auditable.  ``build_eta0`` assembles the
shifted convolution of per-summand compound-Poisson factors that approximates
a sum of independent summands; by construction it is infinitely divisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concentration import decompose
from .distributions import (
    DimensionMismatch,
    DiscreteDistribution,
    SubProbabilityDistribution,
    _canonical_arrays,
    _convolve_arrays,
    _draw,
    convolve,
    shift,
)
from .rng import stream

DEFAULT_TRUNCATION = 40
DEFAULT_SUPPORT_CAP = 200_000

_POISSON_TAG = 0xC0DE
_ETA_TAG = 0xE7A0


class SupportOverflow(RuntimeError):
    """An exact construction would exceed the configured support cap."""


def truncation_deficiency(order: int) -> float:
    """Mass of the Poisson(1) tail beyond ``order`` counts: e^-1 * sum 1/k!."""
    if order < 0:
        raise ValueError("truncation order must be nonnegative")
    term = math.exp(-1.0)
    for k in range(1, order + 1):
        term /= k
    tail = 0.0
    k = order
    while True:
        k += 1
        term /= k
        if term == 0.0 or (tail > 0 and term < tail * 1e-20):
            break
        tail += term
    return tail


# Unit Poisson sampling by CDF inversion: table up to 30 counts, sequential
# search beyond (unreachable in double precision but kept for completeness).
_POISSON_PMF = np.array(
    [math.exp(-1.0) / math.factorial(k) for k in range(31)]
)
_POISSON_CDF = np.cumsum(_POISSON_PMF)


def poisson_unit_sample(gen: np.random.Generator, n: int) -> np.ndarray:
    """Poisson(1) counts via inverse CDF; exact and reproducible."""
    u = gen.random(n)
    counts = np.searchsorted(_POISSON_CDF, u, side="right")
    high = counts >= _POISSON_CDF.size
    for i in np.flatnonzero(high):  # sequential tail search
        k, cdf, pmf = 30, float(_POISSON_CDF[-1]), float(_POISSON_PMF[-1])
        while u[i] >= cdf:
            k += 1
            pmf /= k
            cdf += pmf
        counts[i] = k
    return counts


def compound_poisson_exact(
    dist: DiscreteDistribution,
    order: int = DEFAULT_TRUNCATION,
    *,
    max_support: int = DEFAULT_SUPPORT_CAP,
) -> SubProbabilityDistribution:
    """Truncated compound-Poisson law e^-1 * sum_{k<=order} dist^(*k) / k!.

    The missing tail mass is recorded as the deficiency of the result.
    Raises :class:`SupportOverflow` if an intermediate convolution power
    exceeds ``max_support`` atoms.
    """
    if order < 0:
        raise ValueError("truncation order must be nonnegative")
    coeff = math.exp(-1.0)
    power_pts = np.zeros((1, dist.dim))
    power_w = np.ones(1)
    all_pts = [power_pts]
    all_w = [np.array([coeff])]
    for k in range(1, order + 1):
        power_pts, power_w, _ = _convolve_arrays(
            power_pts, power_w, dist.points, dist.weights
        )
        if power_pts.shape[0] > max_support:
            raise SupportOverflow(
                f"convolution power {k} has {power_pts.shape[0]} atoms "
                f"(cap {max_support})"
            )
        coeff /= k
        all_pts.append(power_pts)
        all_w.append(coeff * power_w)
    pts, w, _ = _canonical_arrays(
        np.concatenate(all_pts), np.concatenate(all_w), prune=False
    )
    return SubProbabilityDistribution(
        pts, w, deficiency=truncation_deficiency(order)
    )


def compound_poisson_sample(dist: DiscreteDistribution, seed: int, n: int) -> np.ndarray:
    """Draws of a Poisson(1)-fold sum of i.i.d. copies of ``dist``."""
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    if n == 0:
        return np.empty((0, dist.dim))
    gen = stream(seed, _POISSON_TAG)
    counts = poisson_unit_sample(gen, n)
    total = int(counts.sum())
    out = np.zeros((n, dist.dim))
    if total:
        draws = _draw(dist, gen, total)
        idx = np.repeat(np.arange(n), counts)
        np.add.at(out, idx, draws)
    return out


@dataclass(frozen=True)
class Approximant:
    """The infinitely divisible approximant of a sum of independent summands.

    In ``exact`` mode the law is materialized as a truncated sub-probability
    distribution; in ``sampler`` mode only the per-summand components
    (recentering shift, recentered base law) are stored and draws are
    generated on demand.  Either way the represented law is a convolution of
    shifted compound-Poisson laws, hence infinitely divisible.
    """

    mode: str
    component_laws: tuple[tuple[np.ndarray, DiscreteDistribution], ...]
    truncation_order: int
    deficiency_bound: float
    exact_law: SubProbabilityDistribution | None = None

    @property
    def dim(self) -> int:
        return self.component_laws[0][1].dim

    def sample(self, seed: int, n: int) -> np.ndarray:
        """Seeded draws from the approximant (either mode)."""
        if self.mode == "exact":
            return _draw(self.exact_law, stream(seed, _ETA_TAG), n)
        out = np.zeros((n, self.dim))
        for i, (center, base) in enumerate(self.component_laws):
            gen = stream(seed, _ETA_TAG, i)
            counts = poisson_unit_sample(gen, n)
            total = int(counts.sum())
            if total:
                draws = _draw(base, gen, total)
                idx = np.repeat(np.arange(n), counts)
                np.add.at(out, idx, draws)
            out += center
        return out


def build_eta0(
    dists,
    tau: float,
    mode: str = "exact",
    order: int = DEFAULT_TRUNCATION,
    *,
    max_support: int = DEFAULT_SUPPORT_CAP,
) -> Approximant:
    """Accompanying approximant for a list of independent summands.

    Each summand is split at its maximizing ball of radius ``tau``; the core
    mean recenters the summand, and the approximant is the convolution of the
    recentered compound-Poisson factors translated back.
    """
    laws = list(dists)
    if not laws:
        raise ValueError("need at least one summand")
    if mode not in ("exact", "sampler"):
        raise ValueError("mode must be 'exact' or 'sampler'")
    dim = laws[0].dim
    components = []
    for law in laws:
        if law.dim != dim:
            raise DimensionMismatch("summands must share one dimension")
        dec = decompose(law, tau)
        components.append((dec.core_mean, shift(law, -dec.core_mean)))
    per_factor = truncation_deficiency(order)
    if mode == "sampler":
        return Approximant(
            mode="sampler",
            component_laws=tuple(components),
            truncation_order=order,
            deficiency_bound=0.0,
        )
    acc = None
    for center, base in components:
        factor = shift(
            compound_poisson_exact(base, order, max_support=max_support), center
        )
        acc = factor if acc is None else convolve(acc, factor)
        if acc.support_size > max_support:
            raise SupportOverflow(
                f"approximant support {acc.support_size} exceeds cap {max_support}"
            )
    if not isinstance(acc, SubProbabilityDistribution):
        acc = SubProbabilityDistribution(
            acc.points, acc.weights, pruned_mass=acc.pruned_mass,
            deficiency=max(0.0, 1.0 - acc.total_mass()),
        )
    return Approximant(
        mode="exact",
        component_laws=tuple(components),
        truncation_order=order,
        deficiency_bound=len(laws) * per_factor,
        exact_law=acc,
    )
