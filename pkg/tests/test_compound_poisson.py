import math

import numpy as np
import pytest

from idla.compound_poisson import (
    Approximant,
    SupportOverflow,
    build_eta0,
    compound_poisson_exact,
    compound_poisson_sample,
    poisson_unit_sample,
    truncation_deficiency,
)
from idla.distributions import (
    DiscreteDistribution,
    characteristic_function,
    delta,
    empirical,
    shift,
    total_variation,
)
from idla.rng import stream


def law(*pairs):
    return DiscreteDistribution.from_atoms([(np.atleast_1d(p), w) for p, w in pairs])


COIN = law((0.0, 0.5), (1.0, 0.5))


def mass_at(dist, point):
    mask = np.all(dist.points == np.atleast_1d(point), axis=1)
    return float(dist.weights[mask].sum())


# --- exact construction ------------------------------------------------------


def test_exact_point_mass():
    got = compound_poisson_exact(delta([2.0]), order=20)
    assert got.support_size == 21
    for k in range(21):
        assert mass_at(got, [2.0 * k]) == pytest.approx(
            math.exp(-1) / math.factorial(k), rel=1e-12
        )
    assert got.deficiency == pytest.approx(truncation_deficiency(20), abs=0)


def test_exact_coin_mass_at_zero():
    got = compound_poisson_exact(COIN, order=40)
    # independent oracle: truncated double series e^-1 sum_k 2^-k / k!
    oracle = sum(math.exp(-1) * 0.5**k / math.factorial(k) for k in range(41))
    assert mass_at(got, [0.0]) == pytest.approx(oracle, abs=1e-15)
    assert mass_at(got, [0.0]) == pytest.approx(math.exp(-0.5), abs=1e-9)


def test_exact_delta_zero():
    got = compound_poisson_exact(delta([0.0]), order=15)
    assert got.support_size == 1
    assert got.points.tolist() == [[0.0]]
    assert got.deficiency > 0
    assert got.total_mass() == pytest.approx(1 - got.deficiency, abs=1e-15)


def test_exact_support_cap():
    gen = stream(61, 0)
    d = law(*[(gen.normal(size=2), w) for w in gen.dirichlet(np.ones(4))])
    with pytest.raises(SupportOverflow):
        compound_poisson_exact(d, order=40, max_support=500)


def test_cf_identity():
    gen = stream(62, 0)
    worst = 0.0
    for _ in range(20):
        d = int(gen.integers(1, 4))
        n = int(gen.integers(1, 5))
        pts = gen.integers(-4, 5, size=(n, d)) / 2.0
        w = gen.dirichlet(np.ones(n))
        dist = DiscreteDistribution.from_atoms(list(zip(pts, w)))
        e = compound_poisson_exact(dist, order=40)
        for _ in range(10):
            t = gen.normal(size=d) * 2
            lhs = characteristic_function(e, t)
            rhs = np.exp(characteristic_function(dist, t) - 1.0)
            worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-8 + truncation_deficiency(40)


def test_atom_at_zero_weight():
    # for a law without cancelling sums the zero atom carries e^(w0 - 1)
    d = law((0.0, 0.3), (1.0, 0.4), (2.5, 0.3))
    e = compound_poisson_exact(d, order=40)
    assert mass_at(e, [0.0]) == pytest.approx(math.exp(0.3 - 1.0), abs=1e-12)
    assert mass_at(e, [0.0]) >= math.exp(-1.0)


def test_total_mass_and_deficiency_accounting():
    e = compound_poisson_exact(COIN, order=10)
    assert e.total_mass() == pytest.approx(1 - e.deficiency, abs=1e-13)
    assert truncation_deficiency(10) < 1.1e-8  # e^-1 / 11! is about 1.0e-8
    assert truncation_deficiency(40) < 1e-46


# --- sampling ----------------------------------------------------------------


def test_poisson_table_sampler():
    gen = stream(63, 0)
    counts = poisson_unit_sample(gen, 200_000)
    for k in range(5):
        freq = float(np.mean(counts == k))
        pmf = math.exp(-1) / math.factorial(k)
        assert abs(freq - pmf) < 0.005
    assert counts.min() >= 0


def test_sample_delta_zero():
    draws = compound_poisson_sample(delta([0.0, 0.0]), seed=3, n=50)
    assert np.array_equal(draws, np.zeros((50, 2)))


def test_sample_delta_one_mean():
    draws = compound_poisson_sample(delta([1.0]), seed=5, n=100_000)
    # the count is Poisson(1): mean 1, sd 1, so 0.02 is > 6 sigma at n = 1e5
    assert abs(draws.mean() - 1.0) < 0.02


def test_sample_determinism():
    a = compound_poisson_sample(COIN, seed=7, n=1000)
    b = compound_poisson_sample(COIN, seed=7, n=1000)
    assert np.array_equal(a, b)


def test_sampler_matches_exact_law():
    d = law((0.0, 0.6), (3.0, 0.4))  # integer atoms: sample sums merge exactly
    exact = compound_poisson_exact(d, order=40)
    emp = empirical(compound_poisson_sample(d, seed=11, n=100_000))
    exact_prob = DiscreteDistribution(
        exact.points, exact.weights / exact.total_mass()
    )
    assert total_variation(exact_prob, emp) <= 0.02


# --- approximant -------------------------------------------------------------


def test_eta0_single_point_mass():
    approx = build_eta0([delta([5.0])], tau=1.0)
    assert approx.mode == "exact"
    assert approx.exact_law.support_size == 1
    assert approx.exact_law.points.tolist() == [[5.0]]
    assert approx.exact_law.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_eta0_two_atom_example():
    d = law((0.0, 0.9), (10.0, 0.1))
    approx = build_eta0([d], tau=1.0)
    # the core is the point mass at 0, so the recentering shift vanishes and
    # the approximant is the plain compound-Poisson law of the summand
    assert mass_at(approx.exact_law, [0.0]) == pytest.approx(
        math.exp(-0.1), abs=1e-9
    )


def test_eta0_cf_product_oracle():
    gen = stream(64, 0)
    summands = []
    for _ in range(5):
        x = gen.integers(-3, 4, size=2) / 2.0
        y = gen.integers(-3, 4, size=2) / 2.0 + 5.0
        w = float(gen.random() * 0.8 + 0.1)
        summands.append(law((x, w), (y, 1.0 - w)))
    approx = build_eta0(summands, tau=2.0)
    assert approx.mode == "exact"
    for _ in range(50):
        t = gen.normal(size=2)
        want = 1.0 + 0.0j
        for (center, base), d in zip(approx.component_laws, summands):
            want *= np.exp(characteristic_function(base, t) - 1.0) * np.exp(
                1j * (t @ center)
            )
        got = characteristic_function(approx.exact_law, t)
        assert abs(got - want) < 1e-6


def test_eta0_mass_bound():
    summands = [COIN] * 6
    approx = build_eta0(summands, tau=1.0, order=12)
    per_factor = truncation_deficiency(12)
    assert approx.deficiency_bound == pytest.approx(6 * per_factor, abs=0)
    assert approx.exact_law.total_mass() >= 1.0 - approx.deficiency_bound - 1e-15


def test_eta0_sampler_mode():
    d = law((0.0, 0.9), (7.0, 0.1))
    approx = build_eta0([d, d], tau=1.0, mode="sampler")
    assert approx.mode == "sampler"
    assert approx.exact_law is None
    draws = approx.sample(seed=13, n=2000)
    assert draws.shape == (2000, 1)
    assert np.array_equal(draws, approx.sample(seed=13, n=2000))


def test_eta0_sampler_agrees_with_exact():
    d = law((0.0, 0.8), (4.0, 0.2))
    exact = build_eta0([d, d], tau=1.0).exact_law
    exact_prob = DiscreteDistribution(exact.points, exact.weights / exact.total_mass())
    emp = empirical(build_eta0([d, d], tau=1.0, mode="sampler").sample(17, 100_000))
    mc_bound = 1.96 * math.sqrt(0.25 / 100_000)
    assert total_variation(exact_prob, emp) <= 0.02  # ~3x the per-atom MC error


def test_eta0_support_overflow_propagates():
    gen = stream(65, 0)
    d = law(*[(gen.normal(size=2), w) for w in gen.dirichlet(np.ones(4))])
    with pytest.raises(SupportOverflow):
        build_eta0([d], tau=0.5, max_support=300)
