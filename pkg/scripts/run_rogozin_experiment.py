#!/usr/bin/env python3
"""Concentration of n-fold coin sums: Q(S_n; 0) against the 1/sqrt(n p)
scaling, with exact convolution powers."""

import pathlib
import sys

from idla.harness import (
    RogozinConfig,
    SummandSpec,
    emit_report,
    run_rogozin_experiment,
)

OUT_DIR = pathlib.Path(__file__).resolve().parent / "out"


def main() -> int:
    OUT_DIR.mkdir(exist_ok=True)
    cfg = RogozinConfig(
        summand=SummandSpec(
            "contaminated_lattice",
            {"base": [[[0.0], 0.5], [[1.0], 0.5]], "contamination": 0.0,
             "offset": [25.0]},
        ),
        tau=0.0,
        n_grid=(1, 4, 16, 64),
        seed=5,
    )
    report = run_rogozin_experiment(cfg)
    emit_report(report, "json", str(OUT_DIR / "rogozin_report.json"))
    emit_report(report, "csv", str(OUT_DIR / "rogozin_report.csv"))
    print(f"{'n':>4} {'Q(S_n;0)':>12} {'Q*sqrt(n p)':>12} {'mode':>8}")
    for row in report.rows:
        print(f"{row.n:4d} {row.q:12.6f} {row.scaled:12.6f} {row.mode:>8}")
    print(f"bounded flag: {report.bounded}")
    return 0 if report.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
