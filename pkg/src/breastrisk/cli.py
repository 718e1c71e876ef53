"""Batch command line: assess, calibrate, curves, simulate.

All randomness flows from the ``--seed`` flag (or the simulation spec);
identical invocations produce byte-identical outputs. Exit codes: 0 ok,
2 input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import io as brio
from .calib import calibrate
from .errors import BreastRiskError, DegenerateCensorEstimate, NoConvergence
from .params import load_resources
from .pedigree import parse_pedigree
from .risk import assess
from .simcohort import SimSpec, simulate
from .timecurves import all_curves

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (NoConvergence,)


def _write_text(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_assess(args) -> int:
    resources = load_resources(args.params)
    profile = brio.profile_from_json_dict(brio.load_json(args.profile))
    ped = parse_pedigree(Path(args.pedigree).read_text(encoding="utf-8"))
    t0 = args.age if args.age is not None else ped.proband.censor_age
    assessment = assess(
        ped,
        profile,
        resources.seg_model,
        resources.mortality,
        t0,
        factor_table=resources.factor_table,
        surface=resources.density_surface,
        params_version=resources.version,
    )
    _write_text(brio.dump_json(assessment.to_json_dict(), None), args.out)
    return EXIT_OK


def _load_cohort(args, resources):
    hazards = brio.read_hazard_csv(args.hazards) if args.hazards else None
    return brio.read_cohort_csv(
        args.cohort,
        hazards=hazards,
        default_h1=resources.incidence,
        default_h2=resources.mortality,
    )


def _cmd_calibrate(args) -> int:
    resources = load_resources(args.params)
    records = _load_cohort(args, resources)
    methods = tuple(args.method.split(",")) if args.method else ("hazard",)
    group_mode = None if args.groups == "none" else args.groups
    report = calibrate(
        records,
        methods=methods,
        group_mode=group_mode,
        include_regression=not args.no_regression,
    )
    if args.format == "table":
        _write_text(report.to_text_table(), args.out)
    else:
        _write_text(brio.dump_json(report.to_json_dict(), None), args.out)
    return EXIT_OK


def _cmd_curves(args) -> int:
    resources = load_resources(args.params)
    records = _load_cohort(args, resources)
    series = all_curves(records, cause=args.cause)
    if args.methods:
        wanted = set(args.methods.split(","))
        series = [
            s for s in series if s.method_tag in wanted or s.method_tag.removesuffix("_oe") in wanted
        ]
    rows = [row for s in series for row in s.rows()]
    if args.format == "json":
        _write_text(
            brio.dump_json({"schema": "breastrisk/curves/v1", "series": rows}, None),
            args.out,
        )
    else:
        out = args.out
        lines = [f"# schema: breastrisk/curves/v1"]
        header = ["method", "time", "observed", "obs_lo", "obs_hi", "expected_a", "expected_b"]
        lines.append(",".join(header))
        for row in rows:
            lines.append(
                ",".join(
                    "" if row[k] is None else format(row[k], ".12g") if isinstance(row[k], float) else str(row[k])
                    for k in header
                )
            )
        _write_text("\n".join(lines) + "\n", out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec_cfg = brio.load_json(args.spec)
    if args.seed is not None:
        spec_cfg["seed"] = args.seed
    spec_cfg.pop("schema", None)
    spec = SimSpec(**spec_cfg)
    resources = load_resources(args.params) if spec.hazards.get("kind") == "model" else None
    records = simulate(spec, resources)
    brio.write_cohort_csv(records, args.out_cohort)
    if args.out_hazards:
        brio.write_hazard_csv(records, args.out_hazards)
    sys.stderr.write(f"simulated {len(records)} subjects -> {args.out_cohort}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="breastrisk",
        description="Breast cancer risk assessment and calibration toolkit",
    )
    parser.add_argument(
        "--params", default=None, help="parameter directory (default: packaged tables)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="single risk assessment")
    p.add_argument("--profile", required=True, help="risk profile JSON file")
    p.add_argument("--pedigree", required=True, help="pedigree text file (first row = proband)")
    p.add_argument("--age", type=float, default=None, help="assessment age (default: proband censor age)")
    p.add_argument("-o", "--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("calibrate", help="observed/expected calibration report")
    p.add_argument("--cohort", required=True, help="cohort CSV (id,entry_age,exit_age,cause)")
    p.add_argument("--hazards", default=None, help="per-subject hazard CSV")
    p.add_argument(
        "--method",
        default="hazard",
        help="comma list: hazard,biased-sum,biased-net,cif-fixed:<A>,cif-deterministic,cif-stochastic",
    )
    p.add_argument("--groups", default="cutpoints", choices=["cutpoints", "deciles", "none"])
    p.add_argument("--no-regression", action="store_true")
    p.add_argument("--format", default="json", choices=["json", "table"])
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("curves", help="time-dependent calibration curves")
    p.add_argument("--cohort", required=True)
    p.add_argument("--hazards", default=None)
    p.add_argument("--cause", type=int, default=1, choices=[1, 2])
    p.add_argument("--methods", default=None, help="comma list: count,cum_hazard,net_risk,cif")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("simulate", help="generate a synthetic cohort")
    p.add_argument("--spec", required=True, help="simulation spec JSON")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out-cohort", required=True)
    p.add_argument("--out-hazards", default=None)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except BreastRiskError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
