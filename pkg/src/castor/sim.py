"""Direct step-by-step simulation on a sparse two-sided tape.

The tape stores only non-blank cells in a dict, so the blank-tape test at
halt time is O(1) and cells outside the visited window are never
materialized.  ``step`` is the reference single-step semantics;
``simulate`` is a faster loop with identical behavior, which a property
test cross-checks against iterated ``step``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .machine import HALT, TransitionTable


class UndefinedTransitionError(RuntimeError):
    """A run reached a (state, symbol) pair with no table entry."""

    def __init__(self, state: int, symbol: int, steps: int):
        super().__init__(f"undefined transition at state {state}, symbol {symbol}, "
                         f"step {steps}")
        self.state = state
        self.symbol = symbol
        self.steps = steps


@dataclass
class Configuration:
    """Instantaneous description: tape, head, state, and elapsed steps.

    ``tape`` maps cell offset to symbol for non-blank cells only; ``lo``
    and ``hi`` bound the visited window (which always contains the head).
    """

    tape: dict[int, int] = field(default_factory=dict)
    head: int = 0
    state: int = 0
    steps: int = 0
    lo: int = 0
    hi: int = 0

    def read(self) -> int:
        return self.tape.get(self.head, 0)

    def is_blank(self) -> bool:
        return not self.tape

    def copy(self) -> Configuration:
        return Configuration(dict(self.tape), self.head, self.state,
                             self.steps, self.lo, self.hi)

    def window(self) -> tuple[int, ...]:
        """Visited window contents, lo..hi inclusive."""
        return tuple(self.tape.get(i, 0) for i in range(self.lo, self.hi + 1))


def start_config() -> Configuration:
    """Blank tape, head on cell 0, start state A."""
    return Configuration()


class RunKind(enum.Enum):
    HALTED_BLANK = "halted-blank"
    HALTED_DIRTY = "halted-dirty"
    CUTOFF = "cutoff"


@dataclass(frozen=True)
class RunResult:
    kind: RunKind
    steps: int
    head: int


def step(config: Configuration, table: TransitionTable) -> Configuration | None:
    """Apply one transition, returning a new Configuration.

    Returns None when the (state, symbol) pair is undefined -- a value,
    not an error, because the enumerator extends tables exactly at such
    points.  A halting transition still writes and moves; the returned
    configuration then has ``state == HALT``.
    """
    if config.state == HALT:
        raise ValueError("cannot step a halted configuration")
    symbol = config.tape.get(config.head, 0)
    tr = table.get(config.state, symbol)
    if tr is None:
        return None
    new = config.copy()
    if tr.write:
        new.tape[new.head] = tr.write
    elif symbol:
        del new.tape[new.head]
    new.head += tr.move
    new.lo = min(new.lo, new.head)
    new.hi = max(new.hi, new.head)
    new.state = tr.next_state
    new.steps += 1
    return new


def simulate(table: TransitionTable, max_steps: int) -> RunResult:
    """Run from the blank tape until halt or the step cap.

    The halting transition counts as a step.  Raises
    UndefinedTransitionError if the trajectory reaches an undefined entry
    (a partial table escaped the enumerator's completeness invariant).
    """
    config = run_from(table, start_config(), max_steps)
    if config.state == HALT:
        kind = RunKind.HALTED_BLANK if config.is_blank() else RunKind.HALTED_DIRTY
        return RunResult(kind, config.steps, config.head)
    return RunResult(RunKind.CUTOFF, config.steps, config.head)


def run_from(table: TransitionTable, config: Configuration,
             until_steps: int) -> Configuration:
    """Advance a configuration until its step counter reaches ``until_steps``
    or the machine halts, whichever comes first.  Mutates nothing; returns
    a new Configuration."""
    tape = dict(config.tape)
    head = config.head
    state = config.state
    steps = config.steps
    lo = config.lo
    hi = config.hi
    m = table.n_symbols
    entries = table.entries
    tget = tape.get
    while steps < until_steps and state != HALT:
        symbol = tget(head, 0)
        tr = entries[state * m + symbol]
        if tr is None:
            raise UndefinedTransitionError(state, symbol, steps)
        if tr.write:
            tape[head] = tr.write
        elif symbol:
            del tape[head]
        head += tr.move
        if head < lo:
            lo = head
        elif head > hi:
            hi = head
        state = tr.next_state
        steps += 1
    return Configuration(tape, head, state, steps, lo, hi)


def trace(table: TransitionTable, max_steps: int):
    """Yield (step, acting_state, head, read, written) for each executed step."""
    config = start_config()
    while config.state != HALT and config.steps < max_steps:
        state, head, read = config.state, config.head, config.read()
        nxt = step(config, table)
        if nxt is None:
            raise UndefinedTransitionError(state, read, config.steps)
        yield config.steps + 1, state, head, read, nxt.tape.get(head, 0)
        config = nxt
