"""Transition tables for Turing machines and their compact text format.

Machines use symbols ``0 .. n_symbols-1`` (0 is the blank), states
``0 .. n_states-1`` (0 is the start state, printed as ``A``), and a
distinguished halt state ``HALT``.  A halting transition still carries a
write symbol and a move direction: the final step writes, moves, and is
counted like any other step.
"""

from __future__ import annotations

from dataclasses import dataclass

HALT = -1

LEFT = -1
RIGHT = 1

_STATE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXY"
_MAX_STATES = len(_STATE_LETTERS)  # 'Z' is reserved for HALT


class MachineFormatError(ValueError):
    """Raised when a machine string cannot be parsed."""


@dataclass(frozen=True)
class Transition:
    """One table entry: write a symbol, move one cell, enter the next state."""

    write: int
    move: int  # LEFT or RIGHT
    next_state: int  # state index, or HALT

    def __str__(self) -> str:
        return f"{self.write}{'R' if self.move == RIGHT else 'L'}{state_letter(self.next_state)}"


def state_letter(state: int) -> str:
    return "Z" if state == HALT else _STATE_LETTERS[state]


class TransitionTable:
    """A (state, symbol) -> Transition map, possibly partially defined.

    Undefined entries are legal while a machine is being enumerated; they
    read as None.  ``entries`` is a flat list indexed by
    ``state * n_symbols + symbol``.
    """

    __slots__ = ("n_states", "n_symbols", "entries")

    def __init__(self, n_states: int, n_symbols: int,
                 entries: list[Transition | None] | None = None):
        if n_states < 1 or n_states > _MAX_STATES:
            raise ValueError(f"n_states must be in 1..{_MAX_STATES}, got {n_states}")
        if n_symbols < 2 or n_symbols > 10:
            raise ValueError(f"n_symbols must be in 2..10, got {n_symbols}")
        self.n_states = n_states
        self.n_symbols = n_symbols
        if entries is None:
            entries = [None] * (n_states * n_symbols)
        elif len(entries) != n_states * n_symbols:
            raise ValueError("entries length does not match n_states * n_symbols")
        self.entries = entries

    def get(self, state: int, symbol: int) -> Transition | None:
        return self.entries[state * self.n_symbols + symbol]

    def define(self, state: int, symbol: int, transition: Transition) -> None:
        self._check_transition(transition)
        self.entries[state * self.n_symbols + symbol] = transition

    def _check_transition(self, tr: Transition) -> None:
        if not 0 <= tr.write < self.n_symbols:
            raise ValueError(f"write symbol {tr.write} out of range")
        if tr.move not in (LEFT, RIGHT):
            raise ValueError(f"move must be LEFT or RIGHT, got {tr.move}")
        if tr.next_state != HALT and not 0 <= tr.next_state < self.n_states:
            raise ValueError(f"next state {tr.next_state} out of range")

    def copy(self) -> TransitionTable:
        return TransitionTable(self.n_states, self.n_symbols, list(self.entries))

    def is_fully_defined(self) -> bool:
        return None not in self.entries

    def defined_states(self) -> set[int]:
        """States with at least one defined transition."""
        m = self.n_symbols
        return {i // m for i, tr in enumerate(self.entries) if tr is not None}

    def halt_transitions(self) -> list[tuple[int, int, Transition]]:
        """All (state, symbol, transition) entries that enter HALT."""
        m = self.n_symbols
        return [(i // m, i % m, tr) for i, tr in enumerate(self.entries)
                if tr is not None and tr.next_state == HALT]

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, TransitionTable)
                and self.n_states == other.n_states
                and self.n_symbols == other.n_symbols
                and self.entries == other.entries)

    def __hash__(self) -> int:
        return hash((self.n_states, self.n_symbols, tuple(self.entries)))

    def __repr__(self) -> str:
        return f"TransitionTable({format_machine(self)!r})"


def parse_machine(text: str) -> TransitionTable:
    """Parse the compact machine format.

    Per state, ``n_symbols`` three-character triples in ascending
    read-symbol order: write digit, 'L'/'R', next-state letter ('Z' means
    HALT, '---' means undefined).  States are joined by '_', in order
    A, B, C, ...  Example: ``1RB1LB_1LA0LC_0RZ0LD_1RD0LB``.
    """
    rows = text.split("_")
    n_states = len(rows)
    if n_states > _MAX_STATES:
        raise MachineFormatError(f"too many states ({n_states})")
    row_len = len(rows[0])
    if row_len == 0 or row_len % 3 != 0:
        raise MachineFormatError(f"row {rows[0]!r} is not a sequence of 3-char triples")
    n_symbols = row_len // 3
    if not 2 <= n_symbols <= 10:
        # A 1-symbol or 11+-symbol row cannot come from a supported machine.
        raise MachineFormatError(f"row length {row_len} implies {n_symbols} symbols")
    entries: list[Transition | None] = []
    for state, row in enumerate(rows):
        if len(row) != row_len:
            raise MachineFormatError(
                f"inconsistent row lengths: state {state_letter(state)} has "
                f"{len(row)} chars, expected {row_len}")
        for sym in range(n_symbols):
            triple = row[3 * sym: 3 * sym + 3]
            if triple == "---":
                entries.append(None)
                continue
            write_ch, move_ch, next_ch = triple
            if not write_ch.isdigit():
                raise MachineFormatError(f"malformed triple {triple!r}")
            write = int(write_ch)
            if write >= n_symbols:
                raise MachineFormatError(
                    f"write symbol {write} out of range in triple {triple!r}")
            if move_ch == "R":
                move = RIGHT
            elif move_ch == "L":
                move = LEFT
            else:
                raise MachineFormatError(f"malformed triple {triple!r}")
            if next_ch == "Z":
                nxt = HALT
            else:
                nxt = _STATE_LETTERS.find(next_ch)
                if nxt < 0 or nxt >= n_states:
                    raise MachineFormatError(
                        f"state letter {next_ch!r} out of range in triple {triple!r}")
            entries.append(Transition(write, move, nxt))
    return TransitionTable(n_states, n_symbols, entries)


def format_machine(table: TransitionTable) -> str:
    """Inverse of parse_machine; undefined entries print as '---'."""
    rows = []
    m = table.n_symbols
    for state in range(table.n_states):
        row = "".join(
            "---" if tr is None else str(tr)
            for tr in table.entries[state * m:(state + 1) * m])
        rows.append(row)
    return "_".join(rows)


def mirror(table: TransitionTable) -> TransitionTable:
    """Swap every move direction; behavior is identical up to reflection."""
    entries = [None if tr is None else Transition(tr.write, -tr.move, tr.next_state)
               for tr in table.entries]
    return TransitionTable(table.n_states, table.n_symbols, entries)


def permute_states(table: TransitionTable, perm: dict[int, int]) -> TransitionTable:
    """Relabel non-start states by a bijection fixing state A (index 0).

    ``perm`` maps old indices to new ones; omitted states stay fixed.
    Sources and targets are rewritten consistently, so the relabeled
    machine behaves identically step for step.
    """
    full = {s: perm.get(s, s) for s in range(table.n_states)}
    if full.get(0, 0) != 0:
        raise ValueError("permutation must fix the start state A")
    if HALT in perm and perm[HALT] != HALT:
        raise ValueError("permutation must fix HALT")
    if sorted(full.values()) != list(range(table.n_states)):
        raise ValueError("not a bijection on state indices")
    m = table.n_symbols
    entries: list[Transition | None] = [None] * len(table.entries)
    for state in range(table.n_states):
        for sym in range(m):
            tr = table.get(state, sym)
            if tr is None:
                continue
            nxt = tr.next_state if tr.next_state == HALT else full[tr.next_state]
            entries[full[state] * m + sym] = Transition(tr.write, tr.move, nxt)
    return TransitionTable(table.n_states, table.n_symbols, entries)


def count_raw_machines(n_states: int, n_symbols: int = 2) -> int:
    """Number of raw transition tables: (2 * m * (n+1)) ** (n * m).

    Each of the n*m table cells independently picks a write symbol, a
    direction, and one of n+1 targets (the halt state included).  For
    m = 2 this is the classic (4n+4)^(2n).
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if n_symbols < 2:
        raise ValueError("n_symbols must be >= 2")
    return (2 * n_symbols * (n_states + 1)) ** (n_states * n_symbols)
