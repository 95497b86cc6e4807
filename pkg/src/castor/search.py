"""Search orchestration: enumerate a (states, symbols) class, track the
champion, aggregate per-verdict counts, and persist reports.

Parallel runs split the enumeration tree into subtree roots processed by
worker processes; per-worker reports obey commutative, associative merge
laws, so the final report is identical for any worker count or partition.
Checkpoints store the not-yet-explored subtree roots as (machine-string,
resume-step) pairs, from which a resumed run reproduces the uninterrupted
result byte for byte.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import random
import time
from dataclasses import dataclass, field, replace

from .deciders import DeciderLimits, default_known_bounds
from .machine import parse_machine
from .sim import simulate
from . import tnf
from .tnf import (CODE_HALT_BLANK, CODE_NAMES, CODE_UNKNOWN, EnumStats,
                  format_flat)

UNKNOWN_SAMPLE_CAP = 10_000


@dataclass(frozen=True)
class ChampionRecord:
    """Best blank-halting machine found: its string, exact step count, and
    whether the class result is proven (strict mode, default enumeration,
    complete walk, zero Unknown verdicts)."""

    machine: str
    steps: int
    proven: bool


@dataclass
class SearchConfig:
    n_states: int
    n_symbols: int
    limits: DeciderLimits = field(default_factory=DeciderLimits)
    mode: str = "default"  # or "paper"
    strict: bool = False
    workers: int = 1
    checkpoint_path: str | None = None
    max_nodes: int | None = None  # best-so-far desk runs; forces workers=1

    def effective_limits(self) -> DeciderLimits:
        return self.limits.strict() if self.strict else self.limits

    def echo(self) -> dict:
        """Identity of the search; excludes execution details (workers,
        checkpoint path) so partitioned runs merge."""
        lim = self.effective_limits()
        return {
            "states": self.n_states,
            "symbols": self.n_symbols,
            "mode": self.mode,
            "strict": self.strict,
            "max_steps": lim.max_steps,
            "escape": lim.escape_enabled,
            "cycler_memory": lim.cycler_memory,
            "bounds": sorted(f"{s} {m} {b}" for (s, m), b in lim.known_bounds.items()),
        }


@dataclass
class SearchReport:
    config: dict
    champion: ChampionRecord | None = None
    counts: dict[str, int] = field(default_factory=dict)
    unknown_total: int = 0
    unknown_sample: list[str] = field(default_factory=list)
    nodes: int = 0
    emitted: int = 0
    pruned_equivalent: int = 0
    complete: bool = True
    wall_time: float = 0.0
    records: list[str] | None = None  # per-machine lines when verbose

    def identity(self) -> dict:
        """Everything that must be reproducible (wall time excluded)."""
        d = self.to_dict()
        d.pop("wall_time")
        return d

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SearchReport) and self.identity() == other.identity()

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "champion": None if self.champion is None else {
                "machine": self.champion.machine,
                "steps": self.champion.steps,
                "proven": self.champion.proven,
            },
            "counts": {k: self.counts.get(k, 0) for k in CODE_NAMES},
            "unknown_total": self.unknown_total,
            "unknown_sample": list(self.unknown_sample),
            "nodes": self.nodes,
            "emitted": self.emitted,
            "pruned_equivalent": self.pruned_equivalent,
            "complete": self.complete,
            "wall_time": self.wall_time,
        }

    @staticmethod
    def from_dict(d: dict) -> SearchReport:
        champ = d.get("champion")
        return SearchReport(
            config=d["config"],
            champion=None if champ is None else ChampionRecord(
                champ["machine"], champ["steps"], champ["proven"]),
            counts=dict(d["counts"]),
            unknown_total=d["unknown_total"],
            unknown_sample=list(d["unknown_sample"]),
            nodes=d["nodes"],
            emitted=d["emitted"],
            pruned_equivalent=d["pruned_equivalent"],
            complete=d["complete"],
            wall_time=d.get("wall_time", 0.0),
        )

    def summary_lines(self) -> list[str]:
        cfg = self.config
        lines = [f"class {cfg['states']}x{cfg['symbols']}"
                 f" mode={cfg['mode']} strict={'yes' if cfg['strict'] else 'no'}"
                 f" max-steps={cfg['max_steps']}"]
        if self.champion is None:
            lines.append("champion none")
        else:
            lines.append(f"champion {self.champion.machine} {self.champion.steps}"
                         f" proven={'yes' if self.champion.proven else 'no'}")
        for name in CODE_NAMES:
            lines.append(f"{name} {self.counts.get(name, 0)}")
        lines.append(f"nodes {self.nodes}")
        lines.append(f"emitted {self.emitted}")
        lines.append(f"pruned-equivalent {self.pruned_equivalent}")
        lines.append(f"complete {'yes' if self.complete else 'no'}")
        return lines


def empty_report(config_echo: dict) -> SearchReport:
    """Merge identity: zero counts, no champion."""
    return SearchReport(config=dict(config_echo),
                        counts={k: 0 for k in CODE_NAMES})


def _better_champion(a: ChampionRecord | None,
                     b: ChampionRecord | None) -> ChampionRecord | None:
    """Max by steps; ties go to the lexicographically smaller string."""
    if a is None:
        return b
    if b is None:
        return a
    if a.steps != b.steps:
        return a if a.steps > b.steps else b
    return a if a.machine <= b.machine else b


def _merge_sample(a: list[str], b: list[str]) -> list[str]:
    """Keep the lexicographically smallest strings up to the cap, so the
    merge is associative and commutative."""
    merged = sorted(set(a) | set(b))
    return merged[:UNKNOWN_SAMPLE_CAP]


def merge_reports(a: SearchReport, b: SearchReport) -> SearchReport:
    """Combine reports of disjoint parts of the same search."""
    if a.config != b.config:
        raise ValueError("cannot merge reports with different configurations")
    counts = {k: a.counts.get(k, 0) + b.counts.get(k, 0) for k in CODE_NAMES}
    merged = SearchReport(
        config=a.config,
        champion=_better_champion(a.champion, b.champion),
        counts=counts,
        unknown_total=a.unknown_total + b.unknown_total,
        unknown_sample=_merge_sample(a.unknown_sample, b.unknown_sample),
        nodes=a.nodes + b.nodes,
        emitted=a.emitted + b.emitted,
        pruned_equivalent=a.pruned_equivalent + b.pruned_equivalent,
        complete=a.complete and b.complete,
        wall_time=a.wall_time + b.wall_time,
    )
    _refresh_proven(merged)
    return merged


def _refresh_proven(report: SearchReport) -> None:
    """The proven flag never rests on the escape heuristic or the
    restricted first-write enumeration: it requires a strict-mode, default-
    mode, complete walk with zero Unknown verdicts."""
    if report.champion is None:
        return
    proven = (report.config["strict"]
              and report.config["mode"] == "default"
              and report.complete
              and report.unknown_total == 0)
    if report.champion.proven != proven:
        report.champion = replace(report.champion, proven=proven)


class _Accumulator:
    """Raw-sink target collecting counts, champion, and unknown sample."""

    __slots__ = ("n", "m", "counts", "best_steps", "best_machine",
                 "unknown_total", "unknown_sample", "records")

    def __init__(self, n: int, m: int, collect_records: bool = False):
        self.n = n
        self.m = m
        self.counts = [0] * len(CODE_NAMES)
        self.best_steps = -1
        self.best_machine: str | None = None
        self.unknown_total = 0
        self.unknown_sample: list[str] = []
        self.records: list[str] | None = [] if collect_records else None

    def __call__(self, flat, code: int, value: int) -> None:
        self.counts[code] += 1
        if code == CODE_HALT_BLANK and value >= self.best_steps:
            machine = format_flat(flat, self.n, self.m)
            if (value > self.best_steps
                    or self.best_machine is None or machine < self.best_machine):
                self.best_steps = value
                self.best_machine = machine
        elif code == CODE_UNKNOWN:
            self.unknown_total += 1
            if len(self.unknown_sample) < 4 * UNKNOWN_SAMPLE_CAP:
                self.unknown_sample.append(format_flat(flat, self.n, self.m))
            elif len(self.unknown_sample) == 4 * UNKNOWN_SAMPLE_CAP:
                self.unknown_sample = sorted(self.unknown_sample)[:UNKNOWN_SAMPLE_CAP]
                self.unknown_sample.append(format_flat(flat, self.n, self.m))
        if self.records is not None:
            name = CODE_NAMES[code]
            if ":" in name:
                kind, reason = name.split(":")
                self.records.append(
                    f"{format_flat(flat, self.n, self.m)}\t{kind}\t{reason}")
            else:
                self.records.append(
                    f"{format_flat(flat, self.n, self.m)}\t{name}\t{value}")

    def partial_report(self, config_echo: dict, stats: EnumStats) -> SearchReport:
        report = SearchReport(
            config=dict(config_echo),
            champion=None if self.best_machine is None else ChampionRecord(
                self.best_machine, self.best_steps, proven=False),
            counts={name: self.counts[i] for i, name in enumerate(CODE_NAMES)},
            unknown_total=self.unknown_total,
            unknown_sample=sorted(set(self.unknown_sample))[:UNKNOWN_SAMPLE_CAP],
            nodes=stats.nodes,
            emitted=stats.emitted,
            pruned_equivalent=stats.pruned_equivalent,
            complete=stats.complete,
        )
        return report


def _limits_to_dict(limits: DeciderLimits) -> dict:
    return {
        "max_steps": limits.max_steps,
        "backward_depth": limits.backward_depth,
        "known_bounds": sorted([s, m, b] for (s, m), b in limits.known_bounds.items()),
        "escape_enabled": limits.escape_enabled,
        "cycler_memory": limits.cycler_memory,
        "backward_node_budget": limits.backward_node_budget,
    }


def _limits_from_dict(d: dict) -> DeciderLimits:
    return DeciderLimits(
        max_steps=d["max_steps"],
        backward_depth=d["backward_depth"],
        known_bounds={(s, m): b for s, m, b in d["known_bounds"]},
        escape_enabled=d["escape_enabled"],
        cycler_memory=d["cycler_memory"],
        backward_node_budget=d["backward_node_budget"],
    )


def _config_to_dict(config: SearchConfig) -> dict:
    return {
        "n_states": config.n_states,
        "n_symbols": config.n_symbols,
        "limits": _limits_to_dict(config.limits),
        "mode": config.mode,
        "strict": config.strict,
    }


def _config_from_dict(d: dict, workers: int = 1,
                      checkpoint_path: str | None = None) -> SearchConfig:
    return SearchConfig(
        n_states=d["n_states"],
        n_symbols=d["n_symbols"],
        limits=_limits_from_dict(d["limits"]),
        mode=d["mode"],
        strict=d["strict"],
        workers=workers,
        checkpoint_path=checkpoint_path,
    )


def _subtree_task(args) -> dict:
    """Worker: finish a batch of subtree roots, return a partial report."""
    entries, n, m, limits_dict, strict, collect_records = args
    limits = _limits_from_dict(limits_dict)
    if strict:
        limits = limits.strict()
    acc = _Accumulator(n, m, collect_records=collect_records)
    resumed = [tnf.resume_entry(mstr, steps, n, m, limits)
               for mstr, steps in entries]
    t0 = time.perf_counter()
    stats = tnf.drain_entries(resumed, n, m, limits, acc)
    report = acc.partial_report({}, stats)  # config filled by the caller
    out = report.to_dict()
    out["wall_time"] = time.perf_counter() - t0
    out["records"] = acc.records
    return out


class CheckpointError(RuntimeError):
    """Corrupt or mismatched checkpoint file."""


def _write_checkpoint(path: str, config_dict: dict,
                      pending: list[tuple[str, int]],
                      report: SearchReport | None, finished: bool) -> None:
    payload = {
        "version": 1,
        "config": config_dict,
        "pending": [list(p) for p in pending],
        "report": None if report is None else report.to_dict(),
        "finished": finished,
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
    os.replace(tmp, path)


def _read_checkpoint(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("version") != 1 or "config" not in payload:
        raise CheckpointError(f"unrecognized checkpoint format in {path}")
    return payload


def run_search(config: SearchConfig, collect_records: bool = False,
               _stop_after_chunks: int | None = None) -> SearchReport:
    """Exhaustively walk one class and report champion plus verdict counts.

    With ``checkpoint_path`` set, progress is persisted after every chunk
    and an existing checkpoint is picked up and continued; the resumed
    result is identical to an uninterrupted run.  ``_stop_after_chunks``
    deliberately abandons the run early (for checkpoint tests).
    """
    t0 = time.perf_counter()
    echo = config.echo()
    config_dict = _config_to_dict(config)
    limits = config.effective_limits()
    n, m = config.n_states, config.n_symbols

    base = empty_report(echo)
    records: list[str] | None = [] if collect_records else None
    pending: list[tuple[str, int]]

    if config.checkpoint_path and os.path.exists(config.checkpoint_path):
        payload = _read_checkpoint(config.checkpoint_path)
        if payload["config"] != config_dict:
            raise CheckpointError("checkpoint was written for a different search "
                                  "configuration")
        if payload["finished"]:
            report = SearchReport.from_dict(payload["report"])
            report.wall_time = time.perf_counter() - t0
            return report
        pending = [(mstr, steps) for mstr, steps in payload["pending"]]
        if payload["report"] is not None:
            base = merge_reports(base, SearchReport.from_dict(payload["report"]))
        if collect_records:
            raise ValueError("per-machine records cannot be resumed from a "
                             "checkpoint")
    elif config.max_nodes is not None:
        # Best-so-far desk run: single process, node budget.
        acc = _Accumulator(n, m, collect_records=collect_records)
        stats = tnf.enumerate_raw(n, m, limits, acc, mode=config.mode,
                                  max_nodes=config.max_nodes)
        report = merge_reports(base, acc.partial_report(echo, stats))
        if collect_records and acc.records is not None:
            report.records = sorted(acc.records)
        report.wall_time = time.perf_counter() - t0
        return report
    elif config.workers <= 1 and not config.checkpoint_path:
        acc = _Accumulator(n, m, collect_records=collect_records)
        stats = tnf.enumerate_raw(n, m, limits, acc, mode=config.mode)
        report = merge_reports(base, acc.partial_report(echo, stats))
        if collect_records and acc.records is not None:
            report.records = sorted(acc.records)
        report.wall_time = time.perf_counter() - t0
        return report
    else:
        # Fresh partitioned run: expand a frontier breadth-first, emitting
        # shallow leaves directly into the base report.
        acc = _Accumulator(n, m, collect_records=collect_records)
        stats = EnumStats()
        target = max(64, config.workers * 256)
        pending = tnf.collect_frontier(n, m, limits, acc, stats, target,
                                       mode=config.mode)
        base = merge_reports(base, acc.partial_report(echo, stats))
        if collect_records and acc.records is not None:
            records = list(acc.records)

    chunk_size = max(1, len(pending) // max(1, config.workers * 8))
    chunks = [pending[i:i + chunk_size] for i in range(0, len(pending), chunk_size)]
    merged = base
    done_chunks = 0

    def absorb(result: dict) -> None:
        nonlocal merged, done_chunks
        chunk_records = result.pop("records", None)
        result["config"] = echo
        merged = merge_reports(merged, SearchReport.from_dict(result))
        if records is not None and chunk_records:
            records.extend(chunk_records)
        done_chunks += 1

    task_args = [(chunk, n, m, _limits_to_dict(config.limits), config.strict,
                  collect_records) for chunk in chunks]

    def checkpoint_now(finished: bool) -> None:
        if not config.checkpoint_path:
            return
        left = [p for chunk in chunks[done_chunks:] for p in chunk]
        _write_checkpoint(config.checkpoint_path, config_dict, left,
                          merged, finished)

    stopped = False
    if config.workers <= 1:
        for i, args in enumerate(task_args):
            if _stop_after_chunks is not None and i >= _stop_after_chunks:
                stopped = True
                break
            absorb(_subtree_task(args))
            checkpoint_now(False)
    else:
        ctx = multiprocessing.get_context()
        with ctx.Pool(config.workers) as pool:
            # Ordered imap: checkpoints always describe a prefix of chunks,
            # while merge laws keep the result order-independent anyway.
            for i, result in enumerate(pool.imap(_subtree_task, task_args)):
                absorb(result)
                checkpoint_now(False)
                if (_stop_after_chunks is not None
                        and i + 1 >= _stop_after_chunks):
                    stopped = True
                    pool.terminate()
                    break

    if stopped:
        checkpoint_now(False)
        merged.complete = False
        merged.wall_time = time.perf_counter() - t0
        return merged

    checkpoint_now(True)
    if records is not None:
        merged.records = sorted(records)  # type: ignore[attr-defined]
    merged.wall_time = time.perf_counter() - t0
    return merged


def resume(path: str, workers: int = 1) -> SearchReport:
    """Continue a checkpointed search to completion."""
    payload = _read_checkpoint(path)
    config = _config_from_dict(payload["config"], workers=workers,
                               checkpoint_path=path)
    return run_search(config)


def emit_table(reports: list[SearchReport],
               machine_readable: bool = False) -> str:
    """Render a states x symbols grid of champion step counts.

    Proven cells are marked with '*'; absent cells render as an em dash.
    ``machine_readable`` switches to line-delimited "states symbols steps
    proven" records.
    """
    cells: dict[tuple[int, int], tuple[int, bool]] = {}
    for rep in reports:
        key = (rep.config["states"], rep.config["symbols"])
        if rep.champion is not None:
            cells[key] = (rep.champion.steps, rep.champion.proven)
    if not cells:
        return ""
    if machine_readable:
        lines = [f"{s} {m} {steps} {'proven' if proven else 'candidate'}"
                 for (s, m), (steps, proven) in sorted(cells.items())]
        return "\n".join(lines) + "\n"
    states = sorted({s for s, _ in cells})
    symbols = sorted({m for _, m in cells})
    grid = [["states"] + [str(s) for s in states]]
    for m in symbols:
        row = [str(m)]
        for s in states:
            if (s, m) in cells:
                steps, proven = cells[(s, m)]
                row.append(f"{steps}{'*' if proven else ''}")
            else:
                row.append("—")
        grid.append(row)
    widths = [max(len(r[i]) for r in grid) for i in range(len(grid[0]))]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in grid]
    lines.insert(1, "symbols")
    return "\n".join(lines) + "\n"


def collect_flagged(n_states: int, n_symbols: int, limits: DeciderLimits,
                    mode: str = "default", reservoir_size: int = 10_000,
                    seed: int = 0) -> tuple[list[tuple[str, str]], SearchReport]:
    """Run a class and reservoir-sample machines flagged non-halting or
    no-blank-halt, for the decider soundness suite.

    Returns (sample, report) where sample holds (machine-string, verdict
    name) pairs.
    """
    rng = random.Random(seed)
    reservoir: list[tuple[str, str]] = []
    seen = 0
    acc = _Accumulator(n_states, n_symbols)

    def sink(flat, code, value):
        nonlocal seen
        acc(flat, code, value)
        if code in (tnf.CODE_NH_UNREACHABLE, tnf.CODE_NH_CYCLER,
                    tnf.CODE_NH_ESCAPE, tnf.CODE_NH_BOUND):
            seen += 1
            item = (format_flat(flat, n_states, n_symbols), CODE_NAMES[code])
            if len(reservoir) < reservoir_size:
                reservoir.append(item)
            else:
                j = rng.randrange(seen)
                if j < reservoir_size:
                    reservoir[j] = item
    stats = tnf.enumerate_raw(n_states, n_symbols, limits, sink, mode=mode)
    echo = SearchConfig(n_states, n_symbols, limits=limits, mode=mode).echo()
    report = merge_reports(empty_report(echo), acc.partial_report(echo, stats))
    return reservoir, report


def _recheck_task(args) -> list[str]:
    machines, cap = args
    bad = []
    for mstr in machines:
        result = simulate(parse_machine(mstr), cap)
        if result.kind.value == "halted-blank":
            bad.append(mstr)
    return bad


def recheck_non_halting(machines: list[str], cap: int = 100_000,
                        workers: int = 1) -> list[str]:
    """Re-simulate flagged machines; returns any that halt on a blank tape
    within the cap (which a sound flag must never allow)."""
    if workers <= 1:
        return _recheck_task((machines, cap))
    chunk = max(1, len(machines) // (workers * 4))
    batches = [(machines[i:i + chunk], cap) for i in range(0, len(machines), chunk)]
    with multiprocessing.get_context().Pool(workers) as pool:
        out: list[str] = []
        for part in pool.imap_unordered(_recheck_task, batches):
            out.extend(part)
    return sorted(out)
