"""Command-line interface.

Subcommands mirror the library: ``concentration``, ``approximate``,
``augment``, ``metric``, and ``experiment bound``/``experiment rogozin``.
All inputs and outputs are JSON; experiment subcommands exit nonzero when a
report flag fails.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .compound_poisson import build_eta0
from .concentration import concentration_ball, concentration_interval_1d
from .distributions import distribution_to_json, load_distribution
from .harness import (
    BoundReport,
    ExperimentConfig,
    emit_report,
    load_config,
    report_to_bytes,
    run_bound_experiment,
    run_rogozin_experiment,
)
from .metrics import (
    family_from_json,
    levy_orthant_lambda,
    neighborhood_metric_lambda,
    random_family,
    rho_m,
    slab_metric_lambda,
)
from .polyhedra import (
    augment_with_report,
    dump_polyhedron,
    load_polyhedron,
    polyhedron_to_json,
    project_many,
    sample_points,
)
from .rng import hash_path


def _cmd_concentration(args) -> int:
    dist = load_distribution(args.dist)
    if args.form == "interval":
        res = concentration_interval_1d(dist, args.tau)
    else:
        res = concentration_ball(dist, args.tau)
    print(
        json.dumps(
            {
                "value": res.value,
                "center": list(map(float, res.center)),
                "radius": res.radius,
                "form": args.form,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_approximate(args) -> int:
    dists = [load_distribution(p) for p in args.dists]
    approx = build_eta0(dists, args.tau, args.mode, args.K)
    doc = {
        "mode": approx.mode,
        "K": approx.truncation_order,
        "deficiency_bound": approx.deficiency_bound,
        "components": [
            {"shift": list(map(float, a)), "base": distribution_to_json(base)}
            for a, base in approx.component_laws
        ],
    }
    if approx.mode == "exact":
        doc["exact_law"] = distribution_to_json(approx.exact_law)
    out = json.dumps(doc, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def _cmd_augment(args) -> int:
    poly = load_polyhedron(args.poly)
    augmented, rep = augment_with_report(poly, args.eps, args.seed)
    cert = None
    if args.certify:
        lam = args.certify_lambda
        pts = sample_points(
            augmented.slab_expand(lam), args.certify, hash_path(args.seed, 0xCE7)
        )
        if pts.shape[0]:
            _, dists = project_many(poly, pts)
            cert = {
                "lambda": lam,
                "points": int(pts.shape[0]),
                "max_dist_over_lambda": float(np.max(dists) / lam),
                "bound": 1.0 + args.eps,
                "ok": bool(np.max(dists) <= (1.0 + args.eps) * lam + 1e-6),
            }
        else:
            cert = {"lambda": lam, "points": 0, "ok": False}
    doc = {
        "polyhedron": polyhedron_to_json(augmented),
        "m0": rep.n_total,
        "m_original": rep.n_original,
        "n_faces": rep.n_faces,
        "max_net_size": rep.max_net_size,
        "constraint_bound": rep.constraint_bound,
    }
    if cert is not None:
        doc["certification"] = cert
    out = json.dumps(doc, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    if cert is not None and not cert["ok"]:
        return 1
    return 0


def _cmd_metric(args) -> int:
    a = load_distribution(args.a)
    b = load_distribution(args.b)
    family = None
    if args.family:
        with open(args.family) as fh:
            family = family_from_json(json.load(fh))
    elif args.random:
        parts = args.random.split(",")
        if len(parts) != 4:
            raise SystemExit("--random expects m,count,scale,seed")
        m, count = int(parts[0]), int(parts[1])
        scale, seed = float(parts[2]), int(parts[3])
        anchors = np.concatenate([a.points, b.points])
        family = random_family(m, a.dim, count, scale, seed, anchors)
    if args.kind == "orthant":
        est = levy_orthant_lambda(a, b, args.lam)
    elif args.kind == "rho":
        if family is None:
            raise SystemExit("rho needs --family or --random")
        est = rho_m(a, b, family)
    else:
        if family is None:
            raise SystemExit(f"{args.kind} needs --family or --random")
        if args.kind == "slab":
            est = slab_metric_lambda(a, b, args.lam, family)
        else:
            est = neighborhood_metric_lambda(a, b, args.lam, family)
    print(json.dumps(est.to_json(), sort_keys=True))
    return 0


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.which == "bound":
        if not isinstance(cfg, ExperimentConfig):
            raise SystemExit("config is not a bound-experiment config")
        report = run_bound_experiment(cfg)
    else:
        report = run_rogozin_experiment(cfg)
    fmt = args.format
    if args.out:
        emit_report(report, fmt, args.out)
    else:
        sys.stdout.write(report_to_bytes(report, fmt).decode())
    return 0 if report.all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idla",
        description=(
            "concentration functions, compound-Poisson approximants, and "
            "polyhedral distances for discrete laws"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("concentration", help="concentration function of a law")
    p.add_argument("--dist", required=True, help="law JSON file")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--form", choices=["interval", "ball"], default="ball")
    p.set_defaults(func=_cmd_concentration)

    p = sub.add_parser("approximate", help="build the accompanying approximant")
    p.add_argument("--dists", nargs="+", required=True, help="summand JSON files")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--mode", choices=["exact", "sampler"], default="exact")
    p.add_argument("--K", type=int, default=40, help="truncation order")
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=_cmd_approximate)

    p = sub.add_parser("augment", help="augment a polyhedron representation")
    p.add_argument("--poly", required=True, help="polyhedron JSON file")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--certify", type=int, default=0, metavar="N",
        help="certify with N sampled points of the expanded polyhedron",
    )
    p.add_argument("--certify-lambda", type=float, default=1.0)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("metric", help="distance estimate between two laws")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument(
        "--kind", choices=["orthant", "slab", "neighborhood", "rho"], required=True
    )
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--family", help="polyhedron family JSON file")
    p.add_argument("--random", metavar="M,COUNT,SCALE,SEED")
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("experiment", help="run a reproducible experiment")
    p.add_argument("which", choices=["bound", "rogozin"])
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
