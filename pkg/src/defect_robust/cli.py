"""Command-line surface: generate / charge / robustness / scan / oracle /
sweep / convergence.

Exit codes: 0 success, 1 usage error, 2 data error.  All randomness is
controlled by --seed (default 0).  DEFECT_ROBUST_THREADS may cap worker
parallelism; results are deterministic and identical regardless of its value.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .core import PeriodMode, estimate_charge, path_robustness
from .errors import DefectRobustError
from .experiments import (
    SweepConfig,
    convergence_study,
    normalize_and_rank,
    run_sweep,
    theoretical_interval,
)
from .fieldio import read_field, write_field, write_report, write_summary
from .synthesis import DefectSpec, synth_defect_field
from .templates import Placement, builtin_template


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid charge {text!r}") from None


def _pair(cast):
    def parse(text: str):
        parts = text.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
        return (cast(parts[0]), cast(parts[1]))
    return parse


def _int_list(text: str):
    return [int(p) for p in text.split(",")]


def _build_parser() -> _Parser:
    parser = _Parser(prog="defect-robust", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a defect field file")
    p.add_argument("--charge", type=_fraction, required=True)
    p.add_argument("--center", type=_pair(float), required=True, metavar="X,Y")
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--size", type=_pair(int), required=True, metavar="NX,NY")
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--mode", default="nematic", choices=["nematic", "polar"])
    p.add_argument("--out", required=True)

    for name in ("charge", "robustness"):
        p = sub.add_parser(name, help=f"{name} of one template placement")
        p.add_argument("--field", required=True)
        p.add_argument("--template", required=True)
        p.add_argument("--at", type=_pair(int), required=True, metavar="I,J",
                       help="integer grid offset of the template")

    p = sub.add_parser("scan", help="charges of all placements (defect detector)")
    p.add_argument("--field", required=True)
    p.add_argument("--template", required=True)
    p.add_argument("--out", help="CSV output path (default: stdout)")

    p = sub.add_parser("oracle", help="theoretical robustness interval")
    p.add_argument("--template", required=True)
    p.add_argument("--charge", type=_fraction, required=True)
    p.add_argument("--density", type=int, default=200)
    p.add_argument("--mode", default="nematic", choices=["nematic", "polar"])

    p = sub.add_parser("sweep", help="Monte Carlo sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="report.csv")
    p.add_argument("--summary", default="summary.txt")

    p = sub.add_parser("convergence", help="square(n) robustness bounds table")
    p.add_argument("--charge", type=_fraction, required=True)
    p.add_argument("--sizes", type=_int_list, default=[1, 2, 3, 4, 8, 16])
    p.add_argument("--mode", default="nematic", choices=["nematic", "polar"])
    p.add_argument("--density", type=int, default=200)

    return parser


def _placement(args, field):
    template = builtin_template(args.template)
    placement = Placement(template=template, offset=args.at)
    placement.validate_in(field)
    return template, placement


def _cmd_generate(args) -> int:
    spec = DefectSpec(charge=args.charge, center=args.center, phase=args.phase)
    field = synth_defect_field(spec, args.size[0], args.size[1], args.spacing,
                               PeriodMode.from_name(args.mode))
    write_field(field, args.out)
    return 0


def _cmd_charge(args) -> int:
    field = read_field(args.field)
    _, placement = _placement(args, field)
    estimate = estimate_charge(field, placement.path())
    print(f"charge = {estimate.charge}")
    print(f"raw_sum = {estimate.raw_sum:.17g}")
    print(f"residual = {estimate.residual:.17g}")
    return 0


def _cmd_robustness(args) -> int:
    field = read_field(args.field)
    template, placement = _placement(args, field)
    report = path_robustness(field, placement.path())
    print(f"robustness = {report.path_robustness:.17g}")
    print(f"min_edge = {report.min_edge[0]} -> {report.min_edge[1]}")
    print(f"normalized = {report.path_robustness / template.resolution:.17g}")
    return 0


def _cmd_scan(args) -> int:
    field = read_field(args.field)
    template = builtin_template(args.template)
    verts = template.boundary.vertices
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    lines = ["offset_i,offset_j,center_x,center_y,charge,robustness"]
    for dj in range(-min(ys), field.ny - 1 - max(ys) + 1):
        for di in range(-min(xs), field.nx - 1 - max(xs) + 1):
            path = template.boundary.translated((di, dj))
            estimate = estimate_charge(field, path)
            if estimate.charge == 0:
                continue
            report = path_robustness(field, path)
            lines.append(
                f"{di},{dj},{estimate.anchor[0] * field.h:.17g},{estimate.anchor[1] * field.h:.17g},"
                f"{float(estimate.charge):.17g},{report.path_robustness:.17g}"
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_oracle(args) -> int:
    template = builtin_template(args.template)
    interval = theoretical_interval(template, args.charge, PeriodMode.from_name(args.mode), args.density)
    print(f"lower = {interval.lower:.17g}")
    print(f"upper = {interval.upper:.17g}")
    print(f"n_oracle_samples = {interval.n_oracle_samples}")
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    grid = raw.get("grid", {})
    config = SweepConfig(
        templates=tuple(builtin_template(n) for n in raw.get("templates", ["single", "2x2", "cross", "3x3", "3x3ext"])),
        n_centers=int(raw.get("n_centers", 10_000)),
        noise_amplitudes=tuple(raw.get("noise_amplitudes", (0.0, 0.2))),
        n_noise_realizations=int(raw.get("n_noise_realizations", 10)),
        base_seed=int(raw.get("base_seed", args.seed)),
        nx=int(grid.get("nx", 32)),
        ny=int(grid.get("ny", 32)),
        h=float(grid.get("h", 1.0)),
        mode=PeriodMode.from_name(raw.get("mode", "nematic")),
        charge=Fraction(str(raw.get("charge", "1/2"))),
        phase=float(raw.get("phase", 0.0)),
        oracle_density=int(raw.get("oracle_density", 200)),
    )
    result = run_sweep(config)
    rank = normalize_and_rank(result)
    write_report(result, args.out)
    write_summary(result, rank, args.summary)
    print(f"wrote {args.out} and {args.summary}")
    return 0


def _cmd_convergence(args) -> int:
    rows = convergence_study(args.charge, args.sizes, PeriodMode.from_name(args.mode),
                             oracle_density=args.density)
    print(f"{'n':>4} {'lower':>20} {'upper':>20} {'analytic_bound':>20} {'r_min':>10}")
    for row in rows:
        print(f"{row.n:>4} {row.lower:>20.12f} {row.upper:>20.12f} "
              f"{row.analytic_lower_bound:>20.12f} {row.r_min:>10.3f}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "charge": _cmd_charge,
    "robustness": _cmd_robustness,
    "scan": _cmd_scan,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
    "convergence": _cmd_convergence,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (DefectRobustError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
