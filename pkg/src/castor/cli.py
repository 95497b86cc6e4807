"""Command-line frontend.

Plain-text output on stdout (timings go to stderr) so runs are scriptable
and byte-stable.  Exit codes: 0 for success or a conclusive verdict, 1
for inconclusive results (cutoffs, Unknown verdicts, incomplete walks),
2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .deciders import DeciderLimits, decide, load_known_bounds
from .machine import MachineFormatError, count_raw_machines, parse_machine, state_letter
from .sim import RunKind, simulate, trace
from . import macro, search as search_mod


def _load_bounds(path_flag: str | None):
    path = path_flag or os.environ.get("CASTOR_KNOWN_BOUNDS")
    if path:
        return load_known_bounds(path)
    return None


def _build_limits(args) -> DeciderLimits:
    limits = DeciderLimits()
    if getattr(args, "max_steps", None) is not None:
        limits.max_steps = args.max_steps
    if getattr(args, "backward_depth", None) is not None:
        limits.backward_depth = args.backward_depth
    if getattr(args, "no_escape", False):
        limits.escape_enabled = False
    bounds = _load_bounds(getattr(args, "bounds", None))
    if bounds is not None:
        limits.known_bounds = bounds
    return limits


def cmd_simulate(args) -> int:
    try:
        table = parse_machine(args.machine)
    except MachineFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.trace:
        for i, state, head, read, written in trace(table, args.max_steps):
            print(f"{i} {state_letter(state)} {head} {read}->{written}")
    result = simulate(table, args.max_steps)
    print(f"{result.kind.value} {result.steps} {result.head}")
    return 0 if result.kind is not RunKind.CUTOFF else 1


def cmd_decide(args) -> int:
    try:
        table = parse_machine(args.machine)
        limits = _build_limits(args)
    except (MachineFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    decision = decide(table, limits)
    print(decision.describe())
    return 0 if decision.is_conclusive() else 1


def cmd_search(args) -> int:
    try:
        limits = _build_limits(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = search_mod.SearchConfig(
        n_states=args.states,
        n_symbols=args.symbols,
        limits=limits,
        mode=args.mode,
        strict=args.strict,
        workers=args.workers,
        checkpoint_path=args.checkpoint,
        max_nodes=args.max_nodes,
    )
    try:
        report = search_mod.run_search(config, collect_records=bool(args.records))
    except search_mod.CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "records":
        print(json.dumps(report.identity(), sort_keys=True))
    else:
        for line in report.summary_lines():
            print(line)
    print(f"wall-time {report.wall_time:.2f}s", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for line in report.records or []:
                fh.write(line + "\n")
    return 0 if (report.complete and report.unknown_total == 0) else 1


def cmd_verify(args) -> int:
    try:
        if args.load:
            with open(args.load, encoding="utf-8") as fh:
                cert = macro.parse_certificate(fh.read())
        else:
            cert = macro.build_certificate()
        total = macro.verify_certificate(cert, deep=True)
    except (OSError, macro.CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"certificate ok: {len(cert.steps)} macro steps, total {total}, "
          f"cross-check passed")
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            fh.write(macro.format_certificate(cert))
    if args.cross_check_grid:
        checked = 0
        for k0 in range(6):
            for k1 in range(26):
                for k2 in range(51):
                    mc = macro.MacroConfig(k0, k1, k2)
                    try:
                        step = macro.macro_step(mc)
                    except macro.OutOfDomainError:
                        continue
                    if not macro.cross_check(step):
                        print(f"error: grid mismatch at {mc}", file=sys.stderr)
                        return 2
                    checked += 1
        print(f"grid cross-check: {checked}/{checked} passed")
    return 0


def cmd_count(args) -> int:
    print(count_raw_machines(args.states, args.symbols))
    return 0


def cmd_table(args) -> int:
    reports = []
    for path in args.reports:
        try:
            with open(path, encoding="utf-8") as fh:
                reports.append(search_mod.SearchReport.from_dict(json.load(fh)))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            print(f"error: cannot read report {path}: {exc}", file=sys.stderr)
            return 2
    out = search_mod.emit_table(reports, machine_readable=(args.format == "records"))
    if out:
        print(out, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="castor",
        description="Search and verify Turing machines that start and halt "
                    "on a blank tape.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one machine from the blank tape")
    p.add_argument("machine")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--trace", action="store_true",
                   help="print one line per step: step state head read->written")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decide", help="run the decider battery on one machine")
    p.add_argument("machine")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--backward-depth", type=int, default=None)
    p.add_argument("--no-escape", action="store_true",
                   help="disable the heuristic head-escape rule")
    p.add_argument("--bounds", help="known-bounds file (overrides "
                                    "CASTOR_KNOWN_BOUNDS)")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("search", help="walk a whole (states, symbols) class")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--symbols", type=int, default=2)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--strict", action="store_true",
                   help="only exhaustively justified deciders (no escape rule)")
    p.add_argument("--mode", choices=["default", "paper"], default="default")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint", help="checkpoint file; resumes if present")
    p.add_argument("--max-nodes", type=int, default=None,
                   help="node budget for best-so-far desk runs (single worker)")
    p.add_argument("--out", help="write the report as JSON")
    p.add_argument("--records", help="write per-machine records (TSV)")
    p.add_argument("--format", choices=["text", "records"], default="text")
    p.add_argument("--bounds", help="known-bounds file (overrides "
                                    "CASTOR_KNOWN_BOUNDS)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify",
                       help="build and cross-check the six-state candidate's "
                            "macro-step certificate")
    p.add_argument("--load", help="verify a certificate file instead of "
                                  "building one")
    p.add_argument("--export", help="write the certificate to a file")
    p.add_argument("--cross-check-grid", action="store_true",
                   help="also simulate every in-domain macro step on a "
                        "small parameter grid")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("count", help="count raw transition tables for a class")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--symbols", type=int, default=2)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("table", help="render champion reports as a grid")
    p.add_argument("reports", nargs="*")
    p.add_argument("--format", choices=["text", "records"], default="text")
    p.set_defaults(func=cmd_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
