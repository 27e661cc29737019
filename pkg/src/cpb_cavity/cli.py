"""Command-line front end: ``cpb-cavity figure|sweep|validate``.

Exit codes: 0 success, 1 invariant failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from cpb_cavity import __version__
from cpb_cavity.entanglement import SELECTIONS
from cpb_cavity.errors import ClosedFormInconsistency, DomainError, InvariantViolation, SweepError
from cpb_cavity.evolution import MODES, MU_MODES
from cpb_cavity.figures import (
    FIGURE_IDS,
    INIT_KINDS,
    OUTPUT_KINDS,
    PRESETS,
    SpecError,
    SweepSpec,
    compare_mu_modes,
    run_custom,
    run_figure,
    write_text,
)
from cpb_cavity.validation import validate

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# flag name -> SweepSpec field
SPEC_FLAGS = {
    "delta": "delta",
    "cjg": "c_jg",
    "n_photon": "n_photon",
    "a": "a",
    "init": "init",
    "tau_max": "tau_max",
    "steps": "steps",
    "mode": "mode",
    "mu_mode": "mu_mode",
    "selection": "selection",
    "fock_cutoff": "fock_cutoff",
    "outputs": "outputs",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _workers(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cpb-cavity", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--workers", type=_workers, default=os.cpu_count() or 1,
                        help="parallel evaluation threads (default: all cores)")

    fig = sub.add_parser("figure", parents=[common], help="write a figure preset data series")
    fig.add_argument("figure_id", choices=FIGURE_IDS + ("all",))
    fig.add_argument("--out", default=None,
                     help="output file, or directory when figure_id is 'all' (default: figures/)")
    fig.add_argument("--steps", type=int, default=1000)
    fig.add_argument("--tau-max", type=float, default=None)

    sw = sub.add_parser("sweep", parents=[common], help="run a custom parameter sweep")
    sw.add_argument("--config", help="JSON file with SweepSpec fields; flags override it")
    sw.add_argument("--figure", choices=FIGURE_IDS, help="start from a preset's first curve")
    sw.add_argument("--delta", type=float)
    sw.add_argument("--cjg", type=float)
    sw.add_argument("--n-photon", type=int)
    sw.add_argument("--a", type=float)
    sw.add_argument("--init", choices=INIT_KINDS)
    sw.add_argument("--tau-max", type=float)
    sw.add_argument("--steps", type=int)
    sw.add_argument("--mode", choices=MODES)
    sw.add_argument("--mu-mode", choices=MU_MODES + ("both",),
                    help="'both' writes one file per mode plus a divergence report")
    sw.add_argument("--selection", choices=SELECTIONS)
    sw.add_argument("--fock-cutoff", type=int)
    sw.add_argument("--outputs", type=lambda s: [x for x in s.split(",") if x],
                    help=f"comma-separated subset of {','.join(OUTPUT_KINDS)}")
    sw.add_argument("--out", default="sweep.csv",
                    help="output file (directory when --mu-mode both)")

    val = sub.add_parser("validate", help="run the invariant suite and cross-checks")
    val.add_argument("--mu-mode", choices=MU_MODES, default="standard",
                     help="closed-form mode that must agree with the propagator")
    val.add_argument("--format", choices=("text", "json"), default="text")
    val.add_argument("--out", default=None, help="also write the report to this file")
    return p


def resolve_spec(args: argparse.Namespace) -> tuple[SweepSpec, bool]:
    """Merge preset, config file and flags into one spec. Returns ``(spec, both_modes)``."""
    data: dict = {}
    if args.figure:
        preset = PRESETS[args.figure]
        data.update(asdict(preset.spec(preset.curves[0], 1000, preset.tau_max)))
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
        data.update(loaded)
    both = False
    for flag, name in SPEC_FLAGS.items():
        value = getattr(args, flag)
        if value is None:
            continue
        if flag == "mu_mode" and value == "both":
            both = True
            continue
        data[name] = value
    return SweepSpec.from_mapping(data), both


def _fmt_from(path: str | None, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "json" if path and path.endswith(".json") else "csv"


def cmd_figure(args) -> int:
    ids = FIGURE_IDS if args.figure_id == "all" else (args.figure_id,)
    fmt = args.format or "csv"
    if args.figure_id == "all" or args.out is None:
        out_dir = Path(args.out or "figures")
        targets = [(i, out_dir / f"fig{i}.{fmt}") for i in ids]
    else:
        targets = [(ids[0], Path(args.out))]
    for fig_id, path in targets:
        run_figure(fig_id, path, steps=args.steps, tau_max=args.tau_max, fmt=fmt,
                   workers=args.workers)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, both = resolve_spec(args)
    if both:
        fmt = args.format or "csv"
        out = Path(args.out)
        out_dir = out if out.suffix == "" else out.parent
        stem = "sweep" if out.suffix == "" else out.stem
        for path in compare_mu_modes(spec, out_dir, stem, fmt, args.workers).values():
            print(f"wrote {path}")
        return EXIT_OK
    path = run_custom(spec, args.out, _fmt_from(args.out, args.format), args.workers)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate(hard_mu_mode=args.mu_mode)
    text = report.to_json() if args.format == "json" else report.to_text()
    sys.stdout.write(text)
    if args.out:
        write_text(args.out, text)
    return EXIT_OK if report.ok else EXIT_INVARIANT


COMMANDS = {"figure": cmd_figure, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        print("invalid sweep specification:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, ClosedFormInconsistency) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SweepError as exc:
        code = EXIT_USAGE if isinstance(exc.cause, DomainError) else EXIT_INVARIANT
        print(f"sweep failed: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
