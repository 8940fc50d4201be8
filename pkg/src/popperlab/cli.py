"""Command-line entry point.

CSV goes to ``--out`` (or stdout), the summary table to stderr.
Exit codes: 0 success, 1 physics-domain error, 2 configuration error,
3 oracle failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

from . import commands, validation
from .errors import ConfigError, PhysicsDomainError
from .patterns import EXACT, PAPER, PRINTED
from .presets import PRESET_NAMES, preset_text, resolve

EXIT_OK, EXIT_PHYSICS, EXIT_CONFIG, EXIT_ORACLE = 0, 1, 2, 3

CONVENTIONS = {"paper": PAPER, "printed": PRINTED, "exact": EXACT}


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="popperlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("scenario", help=f"scenario file or preset ({', '.join(PRESET_NAMES)})")
            sp.add_argument("--convention", choices=sorted(CONVENTIONS), default="paper",
                            help="width convention (default: paper, c=1)")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--quiet", action="store_true", help="suppress the summary table")

    common(sub.add_parser("simulate", help="run the pipeline and report the detector pattern"))

    fit = sub.add_parser("fit", help="infer the correlation length from an observed FWHM")
    common(fit)
    fit.add_argument("--fwhm", type=float, required=True, help="observed FWHM in mm")
    fit.add_argument("--root", choices=("auto", "small", "large"), default="auto",
                     help="inversion root (auto: smallest root >= epsilon^2)")

    sw = sub.add_parser("sweep", help="pattern FWHM against slit-A width")
    common(sw)
    sw.add_argument("--widths", required=True, help="mm values 'a,b,c' or range 'start:stop:count'")
    sw.add_argument("--detector-mm", type=float, help="detector width in mm (default: scenario's; 0 disables)")
    sw.add_argument("--jobs", type=_positive_int, default=1)

    orc = sub.add_parser("oracle", help="run the numerical validation suite")
    common(orc, scenario=False)
    orc.add_argument("--suite", action="append", choices=list(validation.SUITE), metavar="NAME",
                     help="check to run (repeatable; default: all). Choices: " + ", ".join(validation.SUITE))
    orc.add_argument("--strict", action="store_true", help="stop at the first failing check")
    orc.add_argument("--grid-n", type=_positive_int, help="fixed starting grid size")
    orc.add_argument("--no-refine", action="store_true", help="skip convergence refinement")
    orc.add_argument("--json", help="also write the reports as JSON to this path")
    orc.add_argument("--jobs", type=_positive_int, default=1)

    pre = sub.add_parser("preset", help="print a bundled scenario file")
    pre.add_argument("name", choices=PRESET_NAMES)
    return p


def _note(args, text: str) -> None:
    if not args.quiet:
        print(text, file=sys.stderr)


def _run(args) -> int:
    if args.command == "preset":
        sys.stdout.write(preset_text(args.name))
        return EXIT_OK

    if args.command == "oracle":
        reports = commands.cmd_oracle(args.suite, args.grid_n, not args.no_refine, args.jobs,
                                      fail_fast=args.strict)
        with _output(args.out) as fh:
            commands.write_oracle_csv(reports, fh)
        if args.json:
            Path(args.json).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n",
                                       encoding="utf-8")
        _note(args, commands.oracle_table(reports))
        return EXIT_OK if all(r.passed for r in reports) else EXIT_ORACLE

    scenario = resolve(args.scenario)
    conv = CONVENTIONS[args.convention]
    if args.command == "simulate":
        r = commands.cmd_simulate(scenario, conv)
        with _output(args.out) as fh:
            commands.write_simulation_csv(r, fh)
        _note(args, commands.simulation_table(r))
    elif args.command == "fit":
        r = commands.cmd_fit(scenario, args.fwhm * 1e-3, conv, args.root)
        with _output(args.out) as fh:
            commands.write_fit_csv(r, fh)
        _note(args, commands.fit_table(r))
    elif args.command == "sweep":
        try:
            widths = commands.parse_widths(args.widths)
        except ValueError as exc:
            raise ConfigError(f"--widths: {exc}") from exc
        det = None if args.detector_mm is None else args.detector_mm * 1e-3
        if det is not None and det < 0:
            raise ConfigError("--detector-mm: must be >= 0")
        curve = commands.cmd_sweep(scenario, widths, det, conv, args.jobs)
        with _output(args.out) as fh:
            commands.write_sweep_csv(curve, fh)
        _note(args, commands.sweep_table(curve))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as exc:
        print(f"physics error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
