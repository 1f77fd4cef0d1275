"""H-representation polyhedra: membership, slab expansion, projection,
face enumeration, normal cones, sphere nets, and the augmentation that makes
slab expansions sit inside metric neighborhoods.

A polyhedron is an intersection of closed halfspaces <x, t_j> <= b_j with
unit normals.  Slab expansion relaxes every offset by the same amount and
depends on the representation; the metric neighborhood (all points at
Euclidean distance < lambda) does not.  ``augment`` adds supporting
halfspaces, built from nets on the normal cones of all proper faces, that
leave the point set unchanged but force the slab expansion into the
(1 + eps)-inflated metric neighborhood.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache, cached_property

import numpy as np

from .lp import solve_lp
from .rng import hash_path, stream

MEMBERSHIP_TOL = 1e-12
NORMAL_TOL = 1e-9
FACE_TOL = 1e-9
DEFAULT_PROJECT_TOL = 1e-8
DEFAULT_FACE_CAP = 16

_NET_TAG = 0x5E7
_SAMPLE_TAG = 0x9B0


class EmptyPolyhedron(ValueError):
    """The polyhedron has no points."""


class NonConvergence(RuntimeError):
    """Alternating projection hit the iteration cap before meeting tolerance."""


class NetConstructionFailure(RuntimeError):
    """Greedy net growth failed to certify coverage within the caps."""


class FaceEnumerationCap(RuntimeError):
    """Too many constraints for exhaustive face enumeration."""


class AugmentationError(RuntimeError):
    """An added constraint failed its validity certification."""


@dataclass(frozen=True)
class Polyhedron:
    """Intersection of closed halfspaces with unit normals."""

    normals: tuple[tuple[float, ...], ...]
    offsets: tuple[float, ...]

    def __post_init__(self):
        if not self.normals or len(self.normals) != len(self.offsets):
            raise ValueError("need matching nonempty normals and offsets")
        d = len(self.normals[0])
        if d < 1:
            raise ValueError("ambient dimension must be >= 1")
        for t in self.normals:
            if len(t) != d:
                raise ValueError("all normals must share one dimension")
            norm = math.sqrt(sum(c * c for c in t))
            if abs(norm - 1.0) > NORMAL_TOL:
                raise ValueError(f"normal {t} is not unit (|t| = {norm!r})")

    @classmethod
    def from_arrays(cls, a, b, *, normalize: bool = False) -> "Polyhedron":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if a.shape[0] != b.size:
            raise ValueError("matrix rows and offsets disagree")
        if normalize:
            norms = np.linalg.norm(a, axis=1)
            if np.any(norms <= 0):
                raise ValueError("zero normal vector")
            a = a / norms[:, None]
            b = b / norms
        return cls(tuple(map(tuple, a.tolist())), tuple(b.tolist()))

    @cached_property
    def a(self) -> np.ndarray:
        arr = np.asarray(self.normals, dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def b(self) -> np.ndarray:
        arr = np.asarray(self.offsets, dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def dim(self) -> int:
        return len(self.normals[0])

    @property
    def n_constraints(self) -> int:
        return len(self.normals)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        return bool(np.all(self.a @ x <= self.b + tol))

    def contains_many(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ self.a.T <= self.b + tol, axis=1)

    def slab_expand(self, lam: float) -> "Polyhedron":
        if lam < 0:
            raise ValueError("slab width must be nonnegative")
        return Polyhedron(self.normals, tuple(b + lam for b in self.offsets))


@dataclass(frozen=True, eq=False)
class Face:
    """A proper face: its (maximal) active constraint set, dimension, and a
    relative-interior witness point."""

    active: tuple[int, ...]
    dim: int
    witness: np.ndarray


@dataclass(frozen=True, eq=False)
class Cone:
    """Finitely generated cone given by unit generators (one per row)."""

    generators: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if g.shape[0] == 0:
            raise ValueError("a cone needs at least one generator")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)


def contains(P: Polyhedron, x, tol: float = MEMBERSHIP_TOL) -> bool:
    return P.contains(x, tol)


def slab_expand(P: Polyhedron, lam: float) -> Polyhedron:
    return P.slab_expand(lam)


def box_radius(P: Polyhedron) -> float:
    """Bounding radius used to cap unbounded programs: 1e3 beyond max |b_j|."""
    return 1e3 * (1.0 + float(np.max(np.abs(P.b))))


@lru_cache(maxsize=4096)
def _feasible_point_cached(P: Polyhedron) -> tuple[float, ...] | None:
    r = box_radius(P)
    eye = np.eye(P.dim)
    a_ub = np.vstack([P.a, eye, -eye])
    b_ub = np.concatenate([P.b, np.full(P.dim, r), np.full(P.dim, r)])
    res = solve_lp(np.zeros(P.dim), a_ub, b_ub)
    if res.status != "optimal":
        return None
    return tuple(res.x.tolist())


def feasible_point(P: Polyhedron) -> np.ndarray | None:
    pt = _feasible_point_cached(P)
    return None if pt is None else np.asarray(pt)


def is_empty(P: Polyhedron) -> bool:
    return _feasible_point_cached(P) is None


def _certify_projections(a, b, x, y, done, cert_tol):
    """Exact finish for points whose active set has stabilized.

    For each unresolved point, project onto the affine set of its near-active
    constraints and accept the result only with a full KKT certificate
    (feasibility plus nonnegative multipliers), which is sufficient for
    optimality of a projection onto a convex polyhedron.
    """
    todo = np.flatnonzero(~done)
    slack = b - y[todo] @ a.T
    active_mask = slack <= cert_tol
    groups: dict[tuple[int, ...], list[int]] = {}
    for row, idx in enumerate(todo):
        groups.setdefault(tuple(np.flatnonzero(active_mask[row])), []).append(idx)
    for J, idxs in groups.items():
        pts = x[idxs]
        if not J:
            feasible = np.all(pts @ a.T <= b + cert_tol, axis=1)
            for i, ok in zip(idxs, feasible):
                if ok:
                    y[i] = x[i]
                    done[i] = True
            continue
        aj = a[list(J)]
        bj = b[list(J)]
        pinv = np.linalg.pinv(aj, rcond=1e-12)
        cand = pts - (pts @ aj.T - bj) @ pinv.T
        feasible = np.all(cand @ a.T <= b + cert_tol, axis=1)
        resid = pts - cand
        mu, *_ = np.linalg.lstsq(aj.T, resid.T, rcond=None)
        recon_ok = (
            np.linalg.norm(aj.T @ mu - resid.T, axis=0)
            <= cert_tol * (1.0 + np.linalg.norm(resid, axis=1))
        )
        mu_ok = np.all(mu >= -cert_tol, axis=0)
        for k, i in enumerate(idxs):
            if feasible[k] and mu_ok[k] and recon_ok[k]:
                y[i] = cand[k]
                done[i] = True


def project_many(
    P: Polyhedron,
    points,
    tol: float = DEFAULT_PROJECT_TOL,
    *,
    max_cycles: int = 50_000,
    polish_every: int = 16,
    polish: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean projections onto ``P`` for a batch of points.

    Cyclic Dykstra corrections over the halfspaces, iterated until the change
    across a full cycle drops below ``tol / 10``.  Every few cycles the
    near-active constraint set of each point is tried as an exact KKT finish,
    which terminates the (linearly convergent, angle-sensitive) iteration as
    soon as the active set stabilizes.  Returns the projections and their
    distances.  The optimality certificate is the variational inequality
    <x - y, z - y> <= tol for z in P, exercised by the test suite.
    """
    if is_empty(P):
        raise EmptyPolyhedron("cannot project onto an empty polyhedron")
    x = np.atleast_2d(np.asarray(points, dtype=float)).copy()
    n, d = x.shape
    if d != P.dim:
        raise ValueError(f"points of dim {d} vs polyhedron in R^{P.dim}")
    a, b = P.a, P.b
    m = P.n_constraints
    cert_tol = 1e-9 * (1.0 + float(np.max(np.abs(b))))
    y = x.copy()
    done = np.zeros(n, dtype=bool)
    if polish:
        _certify_projections(a, b, x, y, done, cert_tol)
    if not done.all():
        todo = np.flatnonzero(~done)
        yd = y[todo].copy()
        xd = x[todo]
        corr = np.zeros((m, todo.size, d))
        for cycle in range(1, max_cycles + 1):
            prev = yd.copy()
            for j in range(m):
                w = yd + corr[j]
                viol = w @ a[j] - b[j]
                np.maximum(viol, 0.0, out=viol)
                yd = w - viol[:, None] * a[j]
                corr[j] = w - yd
            if float(np.max(np.abs(yd - prev))) < tol / 10.0:
                y[todo] = yd
                done[todo] = True
                break
            if polish and cycle % polish_every == 0:
                y[todo] = yd
                _certify_projections(a, b, x, y, done, cert_tol)
                still = ~done[todo]
                if not still.any():
                    break
                if still.sum() < todo.size:
                    keep = np.flatnonzero(still)
                    corr = corr[:, keep]
                    yd = yd[keep]
                    xd = xd[keep]
                    todo = todo[keep]
        else:
            raise NonConvergence(
                f"projection did not reach tolerance {tol} in {max_cycles} cycles"
            )
    return y, np.linalg.norm(x - y, axis=1)


def project(P: Polyhedron, x, tol: float = DEFAULT_PROJECT_TOL):
    """Projection of a single point; returns (projection, distance)."""
    y, dist = project_many(P, np.asarray(x, dtype=float)[None, :], tol)
    return y[0], float(dist[0])


def neighborhood_contains(
    P: Polyhedron, lam: float, x, tol: float = NORMAL_TOL
) -> bool:
    """Whether ``x`` lies in the open metric neighborhood of width ``lam``.

    Evaluated as dist(P, x) < lam - tol; the comparison is strict because the
    neighborhood is open.
    """
    if lam <= 0:
        raise ValueError("neighborhood width must be positive")
    if P.contains(x):
        return 0.0 < lam - tol
    _, dist = project(P, x, tol=min(tol, DEFAULT_PROJECT_TOL))
    return dist < lam - tol


def neighborhood_contains_many(
    P: Polyhedron, lam: float, points, tol: float = NORMAL_TOL
) -> np.ndarray:
    if lam <= 0:
        raise ValueError("neighborhood width must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(pts.shape[0], dtype=bool)
    inside = P.contains_many(pts)
    out[inside] = 0.0 < lam - tol
    rest = ~inside
    if np.any(rest):
        _, dist = project_many(P, pts[rest], tol=min(tol, DEFAULT_PROJECT_TOL))
        out[rest] = dist < lam - tol
    return out


def enumerate_faces(
    P: Polyhedron,
    *,
    max_constraints: int = DEFAULT_FACE_CAP,
    face_tol: float = FACE_TOL,
) -> list[Face]:
    """All proper faces, one per maximal active set.

    For every constraint subset J the relative-interior program maximizes the
    minimum slack of the inactive constraints subject to equality on J; J
    survives iff the optimum is strictly positive.  Unbounded programs are
    capped by a box of radius ``box_radius(P)``.  Duplicate faces arising
    from redundant constraints are merged by the active set at the witness.
    """
    m, d = P.n_constraints, P.dim
    if m > max_constraints:
        raise FaceEnumerationCap(f"{m} constraints exceed the cap {max_constraints}")
    r = box_radius(P)
    a, b = P.a, P.b
    eye = np.eye(d)
    found: dict[tuple[int, ...], Face] = {}
    for mask in range(1, 1 << m):
        J = [j for j in range(m) if mask >> j & 1]
        notJ = [j for j in range(m) if not mask >> j & 1]
        # variables: (x, s); maximize s
        c = np.zeros(d + 1)
        c[d] = 1.0
        a_eq = np.hstack([a[J], np.zeros((len(J), 1))])
        ub_rows = [np.hstack([a[notJ], np.ones((len(notJ), 1))])] if notJ else []
        ub_rows.append(np.concatenate([np.zeros(d), [1.0]])[None, :])
        ub_rows.append(np.hstack([eye, np.zeros((d, 1))]))
        ub_rows.append(np.hstack([-eye, np.zeros((d, 1))]))
        a_ub = np.vstack(ub_rows)
        b_ub = np.concatenate([b[notJ], [1.0], np.full(d, r), np.full(d, r)])
        res = solve_lp(c, a_ub, b_ub, a_eq, b[J], maximize=True)
        if res.status != "optimal" or res.value <= face_tol:
            continue
        witness = res.x[:d]
        slacks = b - a @ witness
        active = tuple(int(j) for j in np.flatnonzero(slacks <= face_tol))
        if active in found:
            continue
        rank = int(np.linalg.matrix_rank(a[list(active)], tol=NORMAL_TOL))
        found[active] = Face(active=active, dim=d - rank, witness=witness)
    return [found[key] for key in sorted(found)]


def normal_cone(P: Polyhedron, face: Face) -> Cone:
    """Cone generated by the active constraint normals of a face."""
    return Cone(P.a[list(face.active)])


def _slerp(g0: np.ndarray, g1: np.ndarray, theta: float, t: float) -> np.ndarray:
    s = math.sin(theta)
    v = (math.sin((1.0 - t) * theta) * g0 + math.sin(t * theta) * g1) / s
    return v / np.linalg.norm(v)


def sample_cone_directions(
    cone: Cone, gen: np.random.Generator, count: int
) -> np.ndarray:
    """Unit vectors in the cone: normalized positive combinations of the
    generators with exponential coefficients."""
    g = cone.generators
    coeffs = gen.standard_exponential((count, g.shape[0]))
    dirs = coeffs @ g
    norms = np.linalg.norm(dirs, axis=1)
    good = norms > 1e-9
    return dirs[good] / norms[good, None]


def delta_net(
    cone: Cone,
    delta: float,
    seed: int,
    *,
    n_test: int = 10_000,
    max_size: int = 4096,
    max_rounds: int = 64,
) -> list[np.ndarray]:
    """A finite set S on the cone's unit sphere such that every unit vector u
    of the cone has <u, v> >= 1 - delta for some v in S.

    Always contains the generators.  Two-generator cones get a deterministic
    arc grid with node spacing at most arccos(1 - delta); larger cones grow a
    net greedily from seeded test directions until a full certification round
    of ``n_test`` fresh directions passes.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    g = cone.generators
    # collapse (near-)duplicate generators
    kept: list[np.ndarray] = []
    for row in g:
        if all(float(row @ v) < 1.0 - 1e-12 for v in kept):
            kept.append(row / np.linalg.norm(row))
    if len(kept) == 1:
        return [kept[0]]
    if len(kept) == 2:
        g0, g1 = kept
        theta = math.acos(max(-1.0, min(1.0, float(g0 @ g1))))
        if theta > math.pi - 1e-9:
            return [g0, g1]  # opposite rays; the sphere section is just both
        alpha = math.acos(1.0 - delta)
        k = max(1, math.ceil(theta / alpha))
        return [_slerp(g0, g1, theta, i / k) for i in range(k + 1)]
    net = list(kept)
    gen = stream(seed, _NET_TAG)
    for _ in range(max_rounds):
        dirs = sample_cone_directions(cone, gen, n_test)
        if dirs.shape[0] == 0:
            return net
        cover = dirs @ np.asarray(net).T
        failing = dirs[cover.max(axis=1) < 1.0 - delta]
        if failing.shape[0] == 0:
            return net
        while failing.shape[0] > 0:
            scores = failing @ np.asarray(net).T
            worst = int(np.argmin(scores.max(axis=1)))
            new = failing[worst]
            net.append(new)
            if len(net) > max_size:
                raise NetConstructionFailure(
                    f"net exceeded {max_size} vectors without certifying"
                )
            failing = failing[failing @ new < 1.0 - delta]
    raise NetConstructionFailure(
        f"coverage not certified after {max_rounds} rounds"
    )


def _support_value(P: Polyhedron, v: np.ndarray) -> float:
    """max <v, x> over P (box-capped, so finite even for unbounded P)."""
    r = box_radius(P)
    eye = np.eye(P.dim)
    a_ub = np.vstack([P.a, eye, -eye])
    b_ub = np.concatenate([P.b, np.full(P.dim, r), np.full(P.dim, r)])
    res = solve_lp(v, a_ub, b_ub, maximize=True)
    if res.status != "optimal":
        raise EmptyPolyhedron("support function of an empty polyhedron")
    return float(res.value)


@dataclass(frozen=True)
class AugmentationReport:
    n_original: int
    n_added: int
    n_faces: int
    max_net_size: int

    @property
    def n_total(self) -> int:
        return self.n_original + self.n_added

    @property
    def constraint_bound(self) -> int:
        return self.n_original + (1 << self.n_original) * self.max_net_size


def augment_with_report(
    P: Polyhedron, eps: float, seed: int, *, max_constraints: int = DEFAULT_FACE_CAP
) -> tuple[Polyhedron, AugmentationReport]:
    """Augmented representation plus bookkeeping (constraint counts)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if is_empty(P):
        raise EmptyPolyhedron("cannot augment an empty polyhedron")
    delta = 1.0 - 1.0 / (1.0 + eps)
    faces = enumerate_faces(P, max_constraints=max_constraints)
    new_normals: list[tuple[float, ...]] = []
    new_offsets: list[float] = []
    max_net = 0
    for idx, face in enumerate(faces):
        net = delta_net(normal_cone(P, face), delta, seed=hash_path(seed, idx))
        max_net = max(max_net, len(net))
        for v in net:
            v = v / np.linalg.norm(v)
            off = float(v @ face.witness)
            if _support_value(P, v) > off + 1e-9:
                raise AugmentationError(
                    f"constraint from face {face.active} is not valid for P"
                )
            new_normals.append(tuple(v.tolist()))
            new_offsets.append(off)
    augmented = Polyhedron(
        P.normals + tuple(new_normals), P.offsets + tuple(new_offsets)
    )
    report = AugmentationReport(
        n_original=P.n_constraints,
        n_added=len(new_normals),
        n_faces=len(faces),
        max_net_size=max_net,
    )
    return augmented, report


def augment(
    P: Polyhedron, eps: float, seed: int, *, max_constraints: int = DEFAULT_FACE_CAP
) -> Polyhedron:
    """Add supporting halfspaces so that slab expansions of the new
    representation are contained in the (1 + eps)-scaled metric neighborhood;
    the point set is unchanged (certified constraint by constraint)."""
    augmented, _ = augment_with_report(P, eps, seed, max_constraints=max_constraints)
    return augmented


def axis_bounds(P: Polyhedron, clip_radius: float | None = None) -> np.ndarray:
    """Per-axis [min, max] over ``P``, clipped for unbounded directions."""
    r = box_radius(P)
    clip = r if clip_radius is None else clip_radius
    eye = np.eye(P.dim)
    a_ub = np.vstack([P.a, eye, -eye])
    b_ub = np.concatenate([P.b, np.full(P.dim, r), np.full(P.dim, r)])
    center = feasible_point(P)
    if center is None:
        raise EmptyPolyhedron("bounds of an empty polyhedron")
    out = np.zeros((P.dim, 2))
    for i in range(P.dim):
        c = np.zeros(P.dim)
        c[i] = 1.0
        hi = solve_lp(c, a_ub, b_ub, maximize=True).value
        lo = solve_lp(c, a_ub, b_ub).value
        out[i, 0] = max(lo, center[i] - clip)
        out[i, 1] = min(hi, center[i] + clip)
    return out


def sample_points(
    P: Polyhedron,
    n: int,
    seed: int,
    *,
    clip_radius: float | None = None,
    max_batches: int = 400,
) -> np.ndarray:
    """Up to ``n`` points of ``P`` by rejection from its (clipped) box."""
    bounds = axis_bounds(P, clip_radius)
    gen = stream(seed, _SAMPLE_TAG)
    got: list[np.ndarray] = []
    total = 0
    batch = max(4 * n, 1000)
    for _ in range(max_batches):
        pts = gen.uniform(bounds[:, 0], bounds[:, 1], size=(batch, P.dim))
        inside = P.contains_many(pts)
        if np.any(inside):
            got.append(pts[inside])
            total += int(inside.sum())
        if total >= n:
            break
    if not got:
        return np.empty((0, P.dim))
    return np.concatenate(got)[:n]


def embed_operator(P: Polyhedron) -> tuple[np.ndarray, Polyhedron]:
    """Linear map x -> (<x, t_1>, ..., <x, t_m>) plus the axis-aligned image
    polyhedron {y : y_j <= b_j}; membership is preserved exactly.

    The operator norm is at most sqrt(m) (rows are unit); this is checked by
    power iteration.
    """
    a = np.asarray(P.normals, dtype=float)
    m, d = a.shape
    v = np.ones(d) / math.sqrt(d)
    for _ in range(200):
        w = a.T @ (a @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            break
        v = w / norm
    op_norm = float(np.linalg.norm(a @ v))
    if op_norm > math.sqrt(m) + 1e-6:
        raise AssertionError(
            f"operator norm estimate {op_norm} exceeds sqrt(m) = {math.sqrt(m)}"
        )
    orthant = Polyhedron.from_arrays(np.eye(m), P.b)
    return a, orthant


# ---------------------------------------------------------------------------
# JSON interface: {"dim": d, "constraints": [{"t": [...], "b": b}, ...]}
# ---------------------------------------------------------------------------


def polyhedron_to_json(P: Polyhedron) -> dict:
    return {
        "dim": P.dim,
        "constraints": [
            {"t": list(t), "b": b} for t, b in zip(P.normals, P.offsets)
        ],
    }


def polyhedron_from_json(obj, path: str = "$") -> Polyhedron:
    from .distributions import FormatError

    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    dim = obj.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"{path}.dim", "must be a positive integer")
    cons = obj.get("constraints")
    if not isinstance(cons, list) or not cons:
        raise FormatError(f"{path}.constraints", "must be a nonempty array")
    normals = np.empty((len(cons), dim))
    offsets = np.empty(len(cons))
    for i, con in enumerate(cons):
        cpath = f"{path}.constraints[{i}]"
        if not isinstance(con, dict):
            raise FormatError(cpath, "expected an object")
        t = con.get("t")
        if not isinstance(t, list) or len(t) != dim:
            raise FormatError(f"{cpath}.t", f"must be an array of length {dim}")
        try:
            normals[i] = [float(c) for c in t]
        except (TypeError, ValueError):
            raise FormatError(f"{cpath}.t", "entries must be numbers") from None
        bval = con.get("b")
        if not isinstance(bval, (int, float)) or isinstance(bval, bool):
            raise FormatError(f"{cpath}.b", "must be a number")
        offsets[i] = float(bval)
        norm = float(np.linalg.norm(normals[i]))
        if norm <= 0:
            raise FormatError(f"{cpath}.t", "must be a nonzero vector")
        if abs(norm - 1.0) > 1e-6:
            warnings.warn(
                f"{cpath}.t deviates from unit length by {abs(norm - 1.0):.3g}; "
                "normalizing",
                stacklevel=2,
            )
    return Polyhedron.from_arrays(normals, offsets, normalize=True)


def load_polyhedron(path: str) -> Polyhedron:
    with open(path) as fh:
        return polyhedron_from_json(json.load(fh))


def dump_polyhedron(P: Polyhedron, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(polyhedron_to_json(P), fh, indent=2, sort_keys=True)
        fh.write("\n")
