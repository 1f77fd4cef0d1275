import numpy as np
import pytest
from helpers import law, random_law, random_polytope, unit_square

from idla.distributions import delta, empirical, pushforward, sample
from idla.metrics import (
    GridCapExceeded,
    MetricEstimate,
    MonotonicityError,
    PolyhedronFamily,
    bisect_inf,
    levy_orthant_lambda,
    neighborhood_metric_lambda,
    orthant_subfamily,
    random_family,
    rho_m,
    slab_metric_lambda,
)
from idla.polyhedra import Polyhedron, embed_operator
from idla.rng import stream

COIN = law((0.0, 0.5), (1.0, 0.5))
D0 = delta([0.0])
D05 = delta([0.5])
D2 = delta([2.0])


def grid_scan_inf(f, lam_max, resolution=1e-4):
    """Independent oracle: first grid point where f crosses the diagonal."""
    k = 1
    while k * resolution <= lam_max:
        lam = k * resolution
        if f(lam) < lam:
            return lam
        k += 1
    return None


# --- orthant functional -------------------------------------------------------


def test_orthant_identical_laws():
    est = levy_orthant_lambda(COIN, COIN, 0.5)
    assert est.value == 0.0
    assert est.raw_value <= 0.0
    assert not est.is_lower_bound


def test_orthant_point_masses():
    assert levy_orthant_lambda(D0, D05, 0.4).value == 1.0
    assert levy_orthant_lambda(D0, D05, 0.5).value == 0.0  # closed shift absorbs


def test_orthant_matches_enriched_grid():
    # the candidate grid is exact: evaluating on any richer grid of points
    # never finds a larger value
    gen = stream(101, 0)
    for d in (1, 2):
        a = random_law(gen, d, 4)
        b = random_law(gen, d, 4)
        lam = float(gen.random())
        est = levy_orthant_lambda(a, b, lam)

        def term(x):
            fa = a.weights[np.all(a.points <= x, axis=1)].sum()
            fb = b.weights[np.all(b.points <= x + lam, axis=1)].sum()
            ga = a.weights[np.all(a.points <= x + lam, axis=1)].sum()
            gb = b.weights[np.all(b.points <= x, axis=1)].sum()
            return max(fa - fb, gb - ga)

        probes = np.concatenate(
            [a.points, b.points, gen.normal(size=(200, d)) * 2]
        )
        richer = max(max(term(x) for x in probes), 0.0)
        assert est.value >= richer - 1e-12
        assert est.value == pytest.approx(richer, abs=1e-12)


def test_orthant_grid_cap():
    gen = stream(102, 0)
    a = random_law(gen, 3, 6)
    b = random_law(gen, 3, 6)
    with pytest.raises(GridCapExceeded):
        levy_orthant_lambda(a, b, 0.1, max_grid=4)


# --- family construction -------------------------------------------------------


def test_random_family_basics():
    fam = random_family(1, 2, 1, 1.0, seed=5)
    assert len(fam) == 1
    assert fam.members[0].n_constraints == 1
    for P in random_family(3, 2, 10, 2.0, seed=6).members:
        for t in P.normals:
            assert abs(np.linalg.norm(t) - 1.0) <= 1e-12


def test_random_family_deterministic():
    a = random_family(2, 2, 5, 1.0, seed=9, anchors=[[0.0, 0.0]])
    b = random_family(2, 2, 5, 1.0, seed=9, anchors=[[0.0, 0.0]])
    assert a.members == b.members


def test_family_budget_validation():
    sq = unit_square()
    with pytest.raises(ValueError):
        PolyhedronFamily(members=(sq,), m=2)


# --- slab functional ------------------------------------------------------------


def test_slab_identical_laws():
    fam = random_family(2, 1, 10, 1.0, seed=3, anchors=COIN.points)
    assert slab_metric_lambda(COIN, COIN, 0.5, fam).value == 0.0


def test_slab_separating_halfspace():
    t = np.array([0.6, 0.8])
    fam = PolyhedronFamily(
        members=(Polyhedron.from_arrays([t], [1.0]),), m=1, provenance="user"
    )
    a = delta([0.0, 0.0])
    b = delta(3.0 * t)
    est = slab_metric_lambda(a, b, 1.0, fam)
    assert est.value == 1.0
    assert est.is_lower_bound
    assert est.argmax_index == 0


def test_slab_nested_family_monotone():
    gen = stream(103, 0)
    a = random_law(gen, 2, 3)
    b = random_law(gen, 2, 3)
    anchors = np.concatenate([a.points, b.points])
    big = random_family(3, 2, 100, 1.5, seed=11, anchors=anchors)
    small = PolyhedronFamily(members=big.members[:10], m=3, provenance="prefix")
    v_small = slab_metric_lambda(a, b, 0.3, small).value
    v_big = slab_metric_lambda(a, b, 0.3, big).value
    assert v_big >= v_small


# --- neighborhood functional -----------------------------------------------------


def test_neighborhood_identical_laws():
    fam = random_family(2, 1, 5, 1.0, seed=4, anchors=COIN.points)
    assert neighborhood_metric_lambda(COIN, COIN, 0.5, fam).value == 0.0


def test_neighborhood_square_cases():
    # corner distance is 0.2 * sqrt(2) ~ 0.2828
    fam = PolyhedronFamily(members=(unit_square(),), m=4, provenance="user")
    a = delta([0.0, 0.0])
    b = delta([1.2, 1.2])
    for lam, slab_want, nbhd_want in ((1.3, 0.0, 0.0), (0.3, 0.0, 0.0), (0.2, 0.0, 1.0)):
        assert slab_metric_lambda(a, b, lam, fam).value == slab_want
        assert neighborhood_metric_lambda(a, b, lam, fam).value == nbhd_want


def test_neighborhood_dominates_slab_per_polyhedron():
    gen = stream(104, 0)
    for d in (1, 2):
        a = random_law(gen, d, 4)
        b = random_law(gen, d, 4)
        P = random_polytope(gen, d)
        fam = PolyhedronFamily(members=(P,), m=P.n_constraints, provenance="user")
        for lam in (0.2, 0.7, 1.5):
            v_slab = slab_metric_lambda(a, b, lam, fam).value
            v_nbhd = neighborhood_metric_lambda(a, b, lam, fam).value
            assert v_nbhd >= v_slab - 1e-12


def test_neighborhood_handles_empty_members():
    empty = Polyhedron.from_arrays([[1.0], [-1.0]], [0.0, -1.0])
    fam = PolyhedronFamily(members=(empty,), m=2, provenance="user")
    assert neighborhood_metric_lambda(D0, D2, 0.5, fam).value == 0.0


# --- rho -------------------------------------------------------------------------


def test_rho_examples():
    fam = random_family(2, 2, 10, 1.0, seed=7)
    a = delta([0.3, 0.3])
    assert rho_m(a, a, fam).value == 0.0
    halfplane = PolyhedronFamily(
        members=(Polyhedron.from_arrays([[1.0, 0.0]], [1.0]),), m=1,
        provenance="user",
    )
    assert rho_m(delta([0.0, 0.0]), delta([2.0, 0.0]), halfplane).value == 1.0


def test_rho_sampling_error_is_small():
    fam = random_family(1, 1, 50, 2.0, seed=13, anchors=COIN.points)
    emp = empirical(sample(COIN, seed=29, n=10_000))
    # Dvoretzky-Kiefer-Wolfowitz scale: sup-CDF error ~ sqrt(ln(2/a)/2n)
    assert rho_m(COIN, emp, fam).value <= 0.03


# --- structural invariants ---------------------------------------------------------


def test_sandwich_and_lambda_monotone():
    gen = stream(105, 0)
    for _ in range(10):
        d = int(gen.integers(1, 3))
        a = random_law(gen, d, 4)
        b = random_law(gen, d, 4)
        anchors = np.concatenate([a.points, b.points])
        fam = random_family(d + 1, d, 20, 1.0, seed=int(gen.integers(2**31)), anchors=anchors)
        lams = (0.1, 0.4, 1.0, 3.0)
        slabs = [slab_metric_lambda(a, b, lam, fam).value for lam in lams]
        nbhds = [neighborhood_metric_lambda(a, b, lam, fam).value for lam in lams]
        orth = [levy_orthant_lambda(a, b, lam).value for lam in lams]
        for s, nb in zip(slabs, nbhds):
            assert s <= nb + 1e-12
        for seq in (slabs, nbhds, orth):
            assert all(x >= y - 1e-12 for x, y in zip(seq, seq[1:]))


def test_symmetry():
    gen = stream(106, 0)
    a = random_law(gen, 2, 4)
    b = random_law(gen, 2, 4)
    fam = random_family(3, 2, 15, 1.0, seed=21,
                        anchors=np.concatenate([a.points, b.points]))
    assert (
        slab_metric_lambda(a, b, 0.4, fam).value
        == slab_metric_lambda(b, a, 0.4, fam).value
    )
    assert (
        neighborhood_metric_lambda(a, b, 0.4, fam).value
        == neighborhood_metric_lambda(b, a, 0.4, fam).value
    )
    assert (
        levy_orthant_lambda(a, b, 0.4).value == levy_orthant_lambda(b, a, 0.4).value
    )
    assert rho_m(a, b, fam).value == rho_m(b, a, fam).value


def test_orthant_family_embedding():
    # on the axis-aligned family the slab functional reproduces the orthant
    # functional, and enlarging the family never shrinks the estimate
    gen = stream(107, 0)
    for d in (1, 2):
        a = random_law(gen, d, 3)
        b = random_law(gen, d, 3)
        lam = 0.35
        fam = orthant_subfamily(a, b)
        v_orth = levy_orthant_lambda(a, b, lam).value
        v_slab = slab_metric_lambda(a, b, lam, fam).value
        assert v_slab == pytest.approx(v_orth, abs=1e-12)
        extra = random_family(d + 1, d, 25, 1.0, seed=31,
                              anchors=np.concatenate([a.points, b.points]))
        grown = PolyhedronFamily(
            members=fam.members + extra.members,
            m=max(fam.m, extra.m),
            provenance="union",
        )
        assert slab_metric_lambda(a, b, lam, grown).value >= v_slab - 1e-15


def test_embedding_inequality():
    # per-polyhedron slab deficit never exceeds the orthant functional of the
    # laws pushed through the constraint matrix
    gen = stream(108, 0)
    for trial in range(10):
        d = int(gen.integers(1, 4))
        P = random_polytope(gen, d)
        a = random_law(gen, d, 4, dyadic=True)
        b = random_law(gen, d, 4, dyadic=True)
        lam = float(0.1 + gen.random())
        mat, orthant = embed_operator(P)
        fam = PolyhedronFamily(members=(P,), m=P.n_constraints, provenance="user")
        per_p = slab_metric_lambda(a, b, lam, fam)
        bound = levy_orthant_lambda(pushforward(a, mat), pushforward(b, mat), lam)
        assert per_p.raw_value <= bound.value + 1e-12


# --- crossing search ------------------------------------------------------------


def test_bisect_zero_function():
    res = bisect_inf(lambda lam: 0.0, 1.0)
    assert not res.saturated
    assert res.value <= 1e-6


def test_bisect_half_point_mass():
    f = lambda lam: levy_orthant_lambda(D0, D05, lam).value
    res = bisect_inf(f, 2.0)
    oracle = grid_scan_inf(f, 2.0)
    assert res.value == pytest.approx(0.5, abs=1e-4)
    assert res.value == pytest.approx(oracle, abs=2e-4)


def test_bisect_distant_point_mass():
    # the crossing happens where the constant deficit 1 dips below the
    # diagonal, i.e. at one, not at the atom distance
    f = lambda lam: levy_orthant_lambda(D0, D2, lam).value
    res = bisect_inf(f, 3.0)
    oracle = grid_scan_inf(f, 3.0)
    assert res.value == pytest.approx(1.0, abs=1e-4)
    assert res.value == pytest.approx(oracle, abs=2e-4)


def test_bisect_saturation():
    f = lambda lam: levy_orthant_lambda(D0, D2, lam).value
    res = bisect_inf(f, 0.8)
    assert res.saturated
    assert res.value == 0.8


def test_bisect_rejects_increasing_function():
    with pytest.raises(MonotonicityError):
        bisect_inf(lambda lam: lam**2, 1.0)


def test_estimate_fields():
    est = levy_orthant_lambda(D0, D05, 0.4, mc_error=0.01)
    assert isinstance(est, MetricEstimate)
    assert est.mc_error == 0.01
    assert est.lam == 0.4
    doc = est.to_json()
    assert doc["value"] == 1.0 and doc["lambda"] == 0.4
