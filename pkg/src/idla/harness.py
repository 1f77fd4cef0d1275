"""Reproducible experiments: build summands, assemble the approximant, sweep
the expansion width, estimate distances, and report decay-shape checks.

The theory behind these experiments involves non-constructive absolute
constants, so reports never assert them: they fit surrogate constants by
least squares and flag only qualitative properties (monotone decay, positive
fitted rate).  Identical configuration and seed produce byte-identical
reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .compound_poisson import SupportOverflow, build_eta0
from .concentration import concentration_ball, concentration_interval_1d, decompose, max_contamination
from .distributions import (
    DiscreteDistribution,
    FormatError,
    convolve,
    delta,
    distribution_from_json,
    empirical,
    load_distribution,
    sample,
)
from .metrics import (
    PolyhedronFamily,
    family_from_json,
    levy_orthant_lambda,
    neighborhood_metric_lambda,
    random_family,
    slab_metric_lambda,
)
from .rng import hash_path

_SN_TAG = 0x51AB
_ETA_TAG = 0xE7A1
_ROG_TAG = 0x0906

DEFAULT_EXACT_CAP = 200_000
MIN_MC_SAMPLES = 1_000


# ---------------------------------------------------------------------------
# Summand generators
# ---------------------------------------------------------------------------


def contaminated_lattice(base_atoms, contamination: float, offset) -> DiscreteDistribution:
    """A base law with a fraction of its mass moved to a distant outlier."""
    if not 0.0 <= contamination < 1.0:
        raise ValueError("contamination must lie in [0, 1)")
    atoms = [(p, (1.0 - contamination) * w) for p, w in base_atoms]
    if contamination > 0.0:
        atoms.append((offset, contamination))
    return DiscreteDistribution.from_atoms(atoms)


def discretized_gaussian(
    step: float, std: float, dim: int = 1, radius_sigmas: float = 5.0
) -> DiscreteDistribution:
    """Centered Gaussian mass on a regular grid, truncated at a few sigmas."""
    if step <= 0 or std <= 0:
        raise ValueError("step and std must be positive")
    kmax = int(math.floor(radius_sigmas * std / step))
    axis = step * np.arange(-kmax, kmax + 1)
    logw = -0.5 * (axis / std) ** 2
    w1 = np.exp(logw)
    w1 /= w1.sum()
    if dim == 1:
        return DiscreteDistribution(axis[:, None], w1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = np.ones(pts.shape[0])
    for j in range(dim):
        w = w * w1[np.searchsorted(axis, pts[:, j])]
    w /= w.sum()
    return DiscreteDistribution.from_atoms(list(zip(pts, w)))


def build_summand(generator: str, params: dict) -> DiscreteDistribution:
    if generator == "contaminated_lattice":
        base = params.get("base", [[[0.0], 0.5], [[1.0], 0.5]])
        return contaminated_lattice(
            [(p, w) for p, w in base],
            float(params.get("contamination", 0.0)),
            params.get("offset", [0.0]),
        )
    if generator == "discretized_gaussian":
        return discretized_gaussian(
            float(params["step"]),
            float(params["std"]),
            int(params.get("dim", 1)),
            float(params.get("radius_sigmas", 5.0)),
        )
    if generator == "file":
        return load_distribution(params["path"])
    if generator == "inline":
        return distribution_from_json(params["law"])
    raise ValueError(f"unknown summand generator {generator!r}")


@dataclass(frozen=True)
class SummandSpec:
    generator: str
    params: dict
    n: int = 1

    def realize(self) -> list[DiscreteDistribution]:
        if self.generator == "files":
            paths = self.params["paths"]
            return [load_distribution(p) for p in paths]
        law = build_summand(self.generator, self.params)
        return [law] * self.n


@dataclass(frozen=True)
class FamilySpec:
    kind: str  # "random" | "file"
    m: int = 2
    count: int = 50
    scale: float = 1.0
    seed: int = 0
    path: str | None = None

    def realize(self, dim: int, anchors) -> PolyhedronFamily:
        if self.kind == "file":
            with open(self.path) as fh:
                return family_from_json(json.load(fh))
        return random_family(self.m, dim, self.count, self.scale, self.seed, anchors)


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of a decay-shape experiment."""

    summands: SummandSpec
    tau: float
    lambdas: tuple[float, ...]
    metric: str = "slab"  # "orthant" | "slab" | "neighborhood"
    family: FamilySpec | None = None
    sample_size: int = 100_000
    seed: int = 0
    exact_support_cap: int = DEFAULT_EXACT_CAP
    mode: str = "auto"  # "auto" | "exact" | "sampler"

    def __post_init__(self):
        if self.summands.n < 1 and self.summands.generator != "files":
            raise ValueError("need at least one summand")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        lams = tuple(float(x) for x in self.lambdas)
        if not lams:
            raise ValueError("lambda grid must be nonempty")
        if any(x <= 0 for x in lams) or any(
            x >= y for x, y in zip(lams, lams[1:])
        ):
            raise ValueError("lambda grid must be positive and strictly ascending")
        object.__setattr__(self, "lambdas", lams)
        if self.metric not in ("orthant", "slab", "neighborhood"):
            raise ValueError(f"unknown metric kind {self.metric!r}")
        if self.metric in ("slab", "neighborhood") and self.family is None:
            raise ValueError(f"metric {self.metric!r} needs a polyhedron family")
        if self.sample_size < MIN_MC_SAMPLES:
            raise ValueError(f"sample size must be >= {MIN_MC_SAMPLES}")
        if self.mode not in ("auto", "exact", "sampler"):
            raise ValueError("mode must be auto, exact or sampler")


@dataclass(frozen=True)
class BoundRow:
    lam: float
    ratio: float
    estimate: float
    mc_error: float
    fitted: float


@dataclass(frozen=True)
class BoundReport:
    rows: tuple[BoundRow, ...]
    p_hat: float
    c_hat: float
    e_hat: float
    intercept: float
    monotone: bool
    decay_positive: bool
    sn_mode: str
    eta_mode: str
    env: dict

    @property
    def all_pass(self) -> bool:
        return self.monotone and self.decay_positive


def _anchors(law: DiscreteDistribution, k: int = 64) -> np.ndarray:
    order = np.argsort(-law.weights, kind="stable")[:k]
    return law.points[np.sort(order)]


def _exact_sum(summands, cap: int) -> DiscreteDistribution:
    acc = None
    for law in summands:
        acc = law if acc is None else convolve(acc, law)
        if acc.support_size > cap:
            raise SupportOverflow(
                f"sum support {acc.support_size} exceeds cap {cap}"
            )
    return acc


def _sampled_sum(summands, seed: int, n: int) -> np.ndarray:
    out = np.zeros((n, summands[0].dim))
    for i, law in enumerate(summands):
        out += sample(law, hash_path(seed, _SN_TAG, i), n)
    return out


def run_bound_experiment(cfg: ExperimentConfig) -> BoundReport:
    """Distance between the sum law and its approximant across the grid.

    Falls back from exact convolution to seeded sampling when supports
    overflow the cap; the fallback is recorded in the report.
    """
    summands = cfg.summands.realize()
    p_hat = max_contamination(summands, cfg.tau)
    n_mc = cfg.sample_size

    sn_mode = "exact"
    if cfg.mode == "sampler":
        sn_law = None
    else:
        try:
            sn_law = _exact_sum(summands, cfg.exact_support_cap)
        except SupportOverflow:
            if cfg.mode == "exact":
                raise
            sn_law = None
    if sn_law is None:
        sn_mode = "sampler"
        sn_law = empirical(_sampled_sum(summands, cfg.seed, n_mc))

    eta_mode = "exact"
    if cfg.mode == "sampler":
        eta = None
    else:
        try:
            eta = build_eta0(
                summands, cfg.tau, "exact", max_support=cfg.exact_support_cap
            )
        except SupportOverflow:
            if cfg.mode == "exact":
                raise
            eta = None
    if eta is None:
        eta_mode = "sampler"
        approx = build_eta0(summands, cfg.tau, "sampler")
        eta_law = empirical(approx.sample(hash_path(cfg.seed, _ETA_TAG), n_mc))
    else:
        eta_law = eta.exact_law

    half_width = 1.96 * math.sqrt(0.25 / n_mc)
    mc_error = half_width * ((sn_mode != "exact") + (eta_mode != "exact"))

    family = None
    if cfg.family is not None:
        anchors = np.concatenate([_anchors(sn_law), _anchors(eta_law)])
        family = cfg.family.realize(sn_law.dim, anchors)

    estimates = []
    for lam in cfg.lambdas:
        if cfg.metric == "orthant":
            est = levy_orthant_lambda(sn_law, eta_law, lam, mc_error=mc_error)
        elif cfg.metric == "slab":
            est = slab_metric_lambda(sn_law, eta_law, lam, family, mc_error=mc_error)
        else:
            est = neighborhood_metric_lambda(
                sn_law, eta_law, lam, family, mc_error=mc_error
            )
        estimates.append(est.value)

    ratios = [lam / cfg.tau for lam in cfg.lambdas]
    c_hat = estimates[-1] / p_hat if p_hat > 0 else 0.0
    floor = c_hat * p_hat
    xs = [r for r, e in zip(ratios, estimates) if e - floor > 1e-6]
    ys = [math.log(e - floor) for r, e in zip(ratios, estimates) if e - floor > 1e-6]
    if len(xs) >= 2:
        slope, intercept = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
        e_hat = float(-slope)
        intercept = float(intercept)
    else:
        e_hat, intercept = 0.0, math.log(1e-6)
    rows = tuple(
        BoundRow(
            lam=lam,
            ratio=r,
            estimate=e,
            mc_error=mc_error,
            fitted=floor + math.exp(intercept - e_hat * r),
        )
        for lam, r, e in zip(cfg.lambdas, ratios, estimates)
    )
    monotone = all(
        b.estimate <= a.estimate + 2.0 * mc_error for a, b in zip(rows, rows[1:])
    )
    return BoundReport(
        rows=rows,
        p_hat=p_hat,
        c_hat=c_hat,
        e_hat=e_hat,
        intercept=intercept,
        monotone=monotone,
        decay_positive=e_hat > 0.0,
        sn_mode=sn_mode,
        eta_mode=eta_mode,
        env=_environment_stamp(cfg.seed),
    )


# ---------------------------------------------------------------------------
# Concentration-of-sums sanity experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RogozinConfig:
    summand: SummandSpec
    tau: float
    n_grid: tuple[int, ...]
    seed: int = 0
    sample_size: int = 100_000
    exact_support_cap: int = DEFAULT_EXACT_CAP
    form: str = "interval"  # "interval" (d = 1) | "ball"

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 1 for n in grid) or any(
            a >= b for a, b in zip(grid, grid[1:])
        ):
            raise ValueError("n grid must be ascending positive integers")
        object.__setattr__(self, "n_grid", grid)
        if self.form not in ("interval", "ball"):
            raise ValueError("form must be 'interval' or 'ball'")
        if self.sample_size < MIN_MC_SAMPLES:
            raise ValueError(f"sample size must be >= {MIN_MC_SAMPLES}")


@dataclass(frozen=True)
class RogozinRow:
    n: int
    q: float
    scaled: float  # q * sqrt(sum of per-summand tail masses)
    mode: str


@dataclass(frozen=True)
class RogozinReport:
    rows: tuple[RogozinRow, ...]
    p_single: float
    bounded: bool
    env: dict

    @property
    def all_pass(self) -> bool:
        return self.bounded


def _convolution_power(law: DiscreteDistribution, n: int, cap: int):
    result, base = None, law
    while n:
        if n & 1:
            result = base if result is None else convolve(result, base)
            if result.support_size > cap:
                raise SupportOverflow("power support exceeded the cap")
        n >>= 1
        if n:
            base = convolve(base, base)
            if base.support_size > cap:
                raise SupportOverflow("power support exceeded the cap")
    return result


def _concentration_value(law: DiscreteDistribution, tau: float, form: str) -> float:
    if form == "interval":
        return concentration_interval_1d(law, tau).value
    return concentration_ball(law, tau).value


def run_rogozin_experiment(cfg: RogozinConfig) -> RogozinReport:
    """Concentration of n-fold sums against the tail-mass scaling."""
    law = cfg.summand.realize()[0]
    if cfg.form == "interval" and law.dim != 1:
        raise ValueError("interval form requires a one-dimensional law")
    p_single = decompose(law, cfg.tau).contamination
    rows = []
    for n in cfg.n_grid:
        try:
            sn = _convolution_power(law, n, cfg.exact_support_cap)
            mode = "exact"
        except SupportOverflow:
            draws = np.zeros((cfg.sample_size, law.dim))
            for i in range(n):
                draws += sample(law, hash_path(cfg.seed, _ROG_TAG, n, i), cfg.sample_size)
            sn = empirical(draws)
            mode = "sampler"
        q = _concentration_value(sn, cfg.tau, cfg.form)
        rows.append(
            RogozinRow(n=n, q=q, scaled=q * math.sqrt(n * p_single), mode=mode)
        )
    if rows[0].scaled > 0:
        bounded = all(r.scaled <= 3.0 * rows[0].scaled for r in rows)
    else:
        bounded = all(r.scaled == 0.0 for r in rows)
    return RogozinReport(
        rows=tuple(rows),
        p_single=p_single,
        bounded=bounded,
        env=_environment_stamp(cfg.seed),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _environment_stamp(seed: int) -> dict:
    return {"seed": seed, "numpy": np.__version__, "idla": __version__}


def config_from_json(obj) -> ExperimentConfig | RogozinConfig:
    if not isinstance(obj, dict):
        raise FormatError("$", "expected an object")
    kind = obj.get("experiment")
    if kind == "bound":
        fam = obj.get("family")
        family = None
        if fam is not None:
            family = FamilySpec(
                kind=fam.get("kind", "random"),
                m=fam.get("m", 2),
                count=fam.get("count", 50),
                scale=fam.get("scale", 1.0),
                seed=fam.get("seed", 0),
                path=fam.get("path"),
            )
        summands = obj.get("summands")
        if not isinstance(summands, dict):
            raise FormatError("$.summands", "missing or not an object")
        try:
            return ExperimentConfig(
                summands=SummandSpec(
                    generator=summands["generator"],
                    params=summands.get("params", {}),
                    n=summands.get("n", 1),
                ),
                tau=float(obj["tau"]),
                lambdas=tuple(obj["lambdas"]),
                metric=obj.get("metric", "slab"),
                family=family,
                sample_size=obj.get("sample_size", 100_000),
                seed=obj.get("seed", 0),
                exact_support_cap=obj.get("exact_support_cap", DEFAULT_EXACT_CAP),
                mode=obj.get("mode", "auto"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("$", f"invalid bound config: {exc}") from None
    if kind == "rogozin":
        summand = obj.get("summand")
        if not isinstance(summand, dict):
            raise FormatError("$.summand", "missing or not an object")
        try:
            return RogozinConfig(
                summand=SummandSpec(
                    generator=summand["generator"],
                    params=summand.get("params", {}),
                    n=1,
                ),
                tau=float(obj["tau"]),
                n_grid=tuple(obj["n_grid"]),
                seed=obj.get("seed", 0),
                sample_size=obj.get("sample_size", 100_000),
                exact_support_cap=obj.get("exact_support_cap", DEFAULT_EXACT_CAP),
                form=obj.get("form", "interval"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("$", f"invalid rogozin config: {exc}") from None
    raise FormatError("$.experiment", "must be 'bound' or 'rogozin'")


def load_config(path: str):
    with open(path) as fh:
        return config_from_json(json.load(fh))


def report_to_json(report) -> dict:
    if isinstance(report, BoundReport):
        return {
            "kind": "bound",
            "rows": [
                {
                    "lambda": r.lam,
                    "lambda_over_tau": r.ratio,
                    "estimate": r.estimate,
                    "mc_error": r.mc_error,
                    "fitted": r.fitted,
                }
                for r in report.rows
            ],
            "p_hat": report.p_hat,
            "c_hat": report.c_hat,
            "e_hat": report.e_hat,
            "intercept": report.intercept,
            "flags": {
                "monotone": report.monotone,
                "decay_positive": report.decay_positive,
            },
            "sn_mode": report.sn_mode,
            "eta_mode": report.eta_mode,
            "env": report.env,
        }
    if isinstance(report, RogozinReport):
        return {
            "kind": "rogozin",
            "rows": [
                {"n": r.n, "q": r.q, "scaled": r.scaled, "mode": r.mode}
                for r in report.rows
            ],
            "p_single": report.p_single,
            "flags": {"bounded": report.bounded},
            "env": report.env,
        }
    raise TypeError(f"not a report: {type(report)!r}")


def report_from_json(obj):
    kind = obj.get("kind")
    if kind == "bound":
        return BoundReport(
            rows=tuple(
                BoundRow(
                    lam=r["lambda"],
                    ratio=r["lambda_over_tau"],
                    estimate=r["estimate"],
                    mc_error=r["mc_error"],
                    fitted=r["fitted"],
                )
                for r in obj["rows"]
            ),
            p_hat=obj["p_hat"],
            c_hat=obj["c_hat"],
            e_hat=obj["e_hat"],
            intercept=obj["intercept"],
            monotone=obj["flags"]["monotone"],
            decay_positive=obj["flags"]["decay_positive"],
            sn_mode=obj["sn_mode"],
            eta_mode=obj["eta_mode"],
            env=obj["env"],
        )
    if kind == "rogozin":
        return RogozinReport(
            rows=tuple(
                RogozinRow(n=r["n"], q=r["q"], scaled=r["scaled"], mode=r["mode"])
                for r in obj["rows"]
            ),
            p_single=obj["p_single"],
            bounded=obj["flags"]["bounded"],
            env=obj["env"],
        )
    raise ValueError(f"unknown report kind {kind!r}")


def report_to_bytes(report, fmt: str = "json") -> bytes:
    """Canonical serialization; identical reports give identical bytes."""
    if fmt == "json":
        return (
            json.dumps(report_to_json(report), sort_keys=True, indent=2) + "\n"
        ).encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if isinstance(report, BoundReport):
            writer.writerow(
                ["lambda", "lambda_over_tau", "estimate", "mc_error", "fitted"]
            )
            for r in report.rows:
                writer.writerow(
                    [repr(r.lam), repr(r.ratio), repr(r.estimate), repr(r.mc_error), repr(r.fitted)]
                )
        elif isinstance(report, RogozinReport):
            writer.writerow(["n", "q", "scaled", "mode"])
            for r in report.rows:
                writer.writerow([r.n, repr(r.q), repr(r.scaled), r.mode])
        else:
            raise TypeError(f"not a report: {type(report)!r}")
        return buf.getvalue().encode()
    raise ValueError("format must be 'json' or 'csv'")


def emit_report(report, fmt: str, path: str) -> str:
    """Write the report to ``path`` in the requested format."""
    data = report_to_bytes(report, fmt)
    with open(path, "wb") as fh:
        fh.write(data)
    return path
