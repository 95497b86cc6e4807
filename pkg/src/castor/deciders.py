"""Halting and non-halting analyses producing sound verdicts or Unknown.

The battery combines static checks (halt reachability, blank-halt
feasibility, backward reasoning from the blank final tape) with an
instrumented simulation (configuration-repeat detection, known step
bounds for smaller machine classes, and the head-escape heuristic).

All checks except the escape heuristic are exhaustive arguments; the
escape rule is heuristic and sits behind ``escape_enabled`` so that
strict searches can exclude it.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field, replace
from importlib import resources

from .machine import HALT, Transition, TransitionTable
from .sim import Configuration, UndefinedTransitionError


class Verdict(enum.Enum):
    HALTS_BLANK = "halts-blank"
    HALTS_DIRTY = "halts-dirty"
    NON_HALTING = "non-halting"
    NO_BLANK_HALT = "no-blank-halt"
    UNKNOWN = "unknown"


class Reason(enum.Enum):
    BACKWARD_CONTRADICTION = "backward-contradiction"
    HALT_UNREACHABLE = "halt-unreachable"
    CYCLER_REPEAT = "cycler-repeat"
    ESCAPE_HEURISTIC = "escape-heuristic"
    KNOWN_BOUND_EXCEEDED = "known-bound-exceeded"


@dataclass(frozen=True)
class Decision:
    """Outcome for one machine: halt with exact steps, a non-halting or
    no-blank-halt reason, or Unknown with the step cap that was hit."""

    verdict: Verdict
    steps: int | None = None
    reason: Reason | None = None
    cap: int | None = None

    def is_conclusive(self) -> bool:
        return self.verdict is not Verdict.UNKNOWN

    def describe(self) -> str:
        if self.verdict in (Verdict.HALTS_BLANK, Verdict.HALTS_DIRTY):
            return f"{self.verdict.value} {self.steps}"
        if self.verdict is Verdict.UNKNOWN:
            return f"unknown {self.cap}"
        return f"{self.verdict.value} {self.reason.value}"


def load_known_bounds(path: str) -> dict[tuple[int, int], int]:
    """Read a bounds file: lines of "states symbols max_steps"."""
    bounds: dict[tuple[int, int], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"malformed bounds line: {line!r}")
            s, m, b = (int(p) for p in parts)
            bounds[(s, m)] = b
    return bounds


@functools.cache
def default_known_bounds() -> dict[tuple[int, int], int]:
    """Bounds shipped with the package (trusted published results)."""
    text = resources.files("castor").joinpath("data/known_bounds.txt").read_text()
    bounds: dict[tuple[int, int], int] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            s, m, b = (int(p) for p in line.split())
            bounds[(s, m)] = b
    return bounds


def applicable_bound(bounds: dict[tuple[int, int], int],
                     states: int, symbols: int) -> int | None:
    """Tightest bound covering machines with <= states and <= symbols."""
    best = None
    for (s, m), b in bounds.items():
        if s >= states and m >= symbols and (best is None or b < best):
            best = b
    return best


@dataclass
class DeciderLimits:
    """Knobs for the decider battery.

    ``known_bounds`` entries are trusted external facts; ``escape_enabled``
    gates the heuristic head-escape rule (strict searches force it off);
    ``cycler_memory`` caps the snapshot size (in tape cells) kept for
    configuration-repeat detection.
    """

    max_steps: int = 1_000_000
    backward_depth: int = 16
    known_bounds: dict[tuple[int, int], int] = field(default_factory=default_known_bounds)
    escape_enabled: bool = True
    cycler_memory: int = 1 << 16
    backward_node_budget: int = 4096

    def strict(self) -> DeciderLimits:
        """A copy with the heuristic escape rule disabled."""
        return replace(self, escape_enabled=False)


def halt_reachability(table: TransitionTable) -> bool:
    """True unless the states reachable from A provably never halt.

    Follows defined transitions from state A; an undefined entry counts as
    a potential exit (the machine might still be extended), so False is
    only returned when the reachable set is fully defined and contains no
    transition into HALT.
    """
    m = table.n_symbols
    seen = {0}
    stack = [0]
    while stack:
        state = stack.pop()
        for sym in range(m):
            tr = table.entries[state * m + sym]
            if tr is None:
                return True
            nxt = tr.next_state
            if nxt == HALT:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def blank_halt_feasible(table: TransitionTable) -> bool:
    """False when no halting transition writes the blank symbol.

    The final step of a blank halt must write a blank, so a machine whose
    halt entries all write non-blanks may halt, but never on a blank tape.
    A machine with no halt entry at all is likewise infeasible.  Only
    meaningful for fully defined tables: an extension could add entries.
    """
    return any(tr.write == 0 for _, _, tr in table.halt_transitions())


@dataclass(frozen=True)
class BackwardBranch:
    """One candidate predecessor transition and why it is impossible.

    ``conflict`` gives (cell, written, present): the transition writes
    ``written`` into ``cell`` but the successor configuration holds
    ``present`` there.  When consistent instead, ``child`` carries the
    refutation of the predecessor configuration.
    """

    source_state: int
    read_symbol: int
    transition: Transition
    conflict: tuple[int, int, int] | None = None
    child: BackwardNode | None = None


@dataclass(frozen=True)
class BackwardNode:
    """A configuration all of whose possible predecessors are refuted."""

    tape: tuple[tuple[int, int], ...]  # sorted (cell, symbol) non-blanks
    head: int
    state: int
    branches: tuple[BackwardBranch, ...]


@dataclass(frozen=True)
class NonHaltingProof:
    """Exhausted predecessor tree for the blank-tape halt."""

    branches: tuple[BackwardBranch, ...]
    depth: int


def backward_reasoning(table: TransitionTable, depth: int,
                       node_budget: int = 4096) -> NonHaltingProof | None:
    """Prove that no run can end halted on a blank tape.

    Works backwards from the final configuration (blank tape, HALT): each
    predecessor step must have written the symbol the later configuration
    shows, and re-exposes the symbol it read.  Every branch of the tree
    must die in a write conflict within ``depth`` levels for a proof to be
    returned; a branch that survives (including one reaching a blank tape
    in state A, i.e. possibly the start) aborts the proof.  Backward
    tapes stay fully known, so conflicts are concrete cell values.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    into: dict[int, list[tuple[int, int, Transition]]] = {}
    m = table.n_symbols
    for i, tr in enumerate(table.entries):
        if tr is not None:
            into.setdefault(tr.next_state, []).append((i // m, i % m, tr))

    budget = node_budget

    def refute(tape: dict[int, int], head: int, state: int,
               level: int) -> BackwardNode | None:
        """Return a refutation of (tape, head, state) occurring, or None."""
        nonlocal budget
        if state == 0 and not tape:
            return None  # could be the start configuration
        if level > depth or budget <= 0:
            return None
        budget -= 1
        branches = []
        for src, read, tr in into.get(state, ()):
            cell = head - tr.move  # where the predecessor's head was
            present = tape.get(cell, 0)
            if tr.write != present:
                branches.append(BackwardBranch(src, read, tr,
                                               conflict=(cell, tr.write, present)))
                continue
            pred = dict(tape)
            if read:
                pred[cell] = read
            else:
                pred.pop(cell, None)
            child = refute(pred, cell, src, level + 1)
            if child is None:
                return None
            branches.append(BackwardBranch(src, read, tr, child=child))
        return BackwardNode(tuple(sorted(tape.items())), head, state,
                            tuple(branches))

    # Level 1: the halting step itself, applied to the all-blank final tape.
    root_branches = []
    for src, read, tr in into.get(HALT, ()):
        if tr.write != 0:
            root_branches.append(BackwardBranch(src, read, tr,
                                                conflict=(0, tr.write, 0)))
            continue
        pred = {0: read} if read else {}
        child = refute(pred, 0, src, 2)
        if child is None:
            return None
        root_branches.append(BackwardBranch(src, read, tr, child=child))
    return NonHaltingProof(tuple(root_branches), depth)


def escape_check(config: Configuration) -> bool:
    """Heuristic: head farther from the start cell than half the elapsed steps.

    Not an exhaustive argument -- see DeciderLimits.escape_enabled.
    """
    if config.steps < 2:
        raise ValueError("escape check requires steps >= 2")
    return 2 * abs(config.head) > config.steps


def cycler_check(trace, budget: int = 1 << 16) -> tuple[int, int] | None:
    """Scan a stream of Configurations for an exact repeat.

    Keeps one snapshot, refreshed at power-of-two step counts (skipping
    snapshots wider than ``budget`` cells), and compares each subsequent
    configuration against it; a match at steps (i, j) proves a loop.
    Sound but incomplete: a repeat may fall between snapshots of a tape
    that keeps growing.
    """
    snap: Configuration | None = None
    next_snap = 1
    for config in trace:
        if (snap is not None and config.state == snap.state
                and config.head == snap.head and config.tape == snap.tape):
            return snap.steps, config.steps
        if config.steps >= next_snap:
            if len(config.tape) <= budget:
                snap = config.copy()
            while next_snap <= config.steps:
                next_snap *= 2
    return None


def _effective_symbols(table: TransitionTable) -> int:
    """Symbols that matter for bound lookup: the largest symbol that any
    defined entry reads or writes, but at least a 2-symbol alphabet."""
    top = 0
    m = table.n_symbols
    for i, tr in enumerate(table.entries):
        if tr is not None:
            sym = i % m
            if sym > top:
                top = sym
            if tr.write > top:
                top = tr.write
    return max(2, top + 1)


def known_bound_cutoff(table: TransitionTable, steps: int,
                       limits: DeciderLimits) -> Decision | None:
    """Non-halting by a trusted bound for a smaller machine class.

    A machine whose defined entries span s states and at most m symbols
    behaves, up to its first undefined entry, like some machine of the
    (s, m) class; if it has run past that class's proven maximum halting
    time it can neither halt nor ever reach an undefined entry.
    """
    states = len(table.defined_states())
    symbols = _effective_symbols(table)
    bound = applicable_bound(limits.known_bounds, states, symbols)
    if bound is not None and steps > bound:
        return Decision(Verdict.NON_HALTING, reason=Reason.KNOWN_BOUND_EXCEEDED)
    return None


def decide(table: TransitionTable, limits: DeciderLimits | None = None) -> Decision:
    """Run the full battery on one machine.

    Static checks first (reachability; for fully defined tables also
    blank-halt feasibility and backward reasoning), then an instrumented
    simulation with repeat detection, known-bound cutoffs, and (when
    enabled) the escape heuristic.  Returns the first conclusive verdict,
    else Unknown at the step cap.  Raises UndefinedTransitionError if a
    partial table's trajectory leaves its defined entries.
    """
    if limits is None:
        limits = DeciderLimits()
    if not halt_reachability(table):
        return Decision(Verdict.NON_HALTING, reason=Reason.HALT_UNREACHABLE)
    if table.is_fully_defined():
        if not blank_halt_feasible(table):
            return Decision(Verdict.NO_BLANK_HALT, reason=Reason.BACKWARD_CONTRADICTION)
        if backward_reasoning(table, limits.backward_depth,
                              limits.backward_node_budget) is not None:
            return Decision(Verdict.NO_BLANK_HALT, reason=Reason.BACKWARD_CONTRADICTION)

    bound = applicable_bound(limits.known_bounds, len(table.defined_states()),
                             _effective_symbols(table))
    if bound is None:
        bound = limits.max_steps + 1  # never fires

    m = table.n_symbols
    entries = table.entries
    escape = limits.escape_enabled
    cap = limits.max_steps
    snap_budget = limits.cycler_memory

    tape: dict[int, int] = {}
    head = 0
    state = 0
    steps = 0
    snap_state = snap_head = snap_steps = -1
    snap_tape: dict[int, int] = {}
    have_snap = False
    next_snap = 1
    tget = tape.get

    while True:
        sym = tget(head, 0)
        tr = entries[state * m + sym]
        if tr is None:
            raise UndefinedTransitionError(state, sym, steps)
        w = tr.write
        if w:
            tape[head] = w
        elif sym:
            del tape[head]
        head += tr.move
        steps += 1
        nxt = tr.next_state
        if nxt == HALT:
            kind = Verdict.HALTS_BLANK if not tape else Verdict.HALTS_DIRTY
            return Decision(kind, steps=steps)
        state = nxt
        if steps > bound:
            return Decision(Verdict.NON_HALTING, reason=Reason.KNOWN_BOUND_EXCEEDED)
        if escape and steps >= 2 and 2 * abs(head) > steps:
            return Decision(Verdict.NON_HALTING, reason=Reason.ESCAPE_HEURISTIC)
        if (have_snap and state == snap_state and head == snap_head
                and tape == snap_tape):
            return Decision(Verdict.NON_HALTING, reason=Reason.CYCLER_REPEAT)
        if steps >= next_snap:
            if len(tape) <= snap_budget:
                snap_state, snap_head, snap_steps = state, head, steps
                snap_tape = dict(tape)
                have_snap = True
            next_snap *= 2
        if steps >= cap:
            return Decision(Verdict.UNKNOWN, cap=cap)
