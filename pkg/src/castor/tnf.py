"""Tree-normal-form enumeration of candidate machines.

Machines are generated incrementally: whenever the running machine first
reads an undefined (state, symbol) pair, one child machine is created per
legal assignment.  Normalization rules keep one representative per
behavior class: the first move is rightward (mirror exclusion), new
states and new non-blank symbols enter in first-use order, only
already-used states plus one fresh state are available as targets, and
machines containing two interchangeable fully-defined states are pruned.

The hot path works on flat lists of (write, move, next) tuples; the
public operations mirror it on TransitionTable objects and are
cross-checked against it in tests.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .deciders import Decision, DeciderLimits, Reason, Verdict
from .machine import (HALT, LEFT, RIGHT, Transition, TransitionTable,
                      _STATE_LETTERS, format_machine)
from .sim import Configuration, start_config, step

# Steps a node must survive before its run moves to the JIT kernel.
KERNEL_SWITCH_STEPS = 128

_kernel_mod = None
_kernel_checked = False


def _get_kernel():
    """The optional JIT long-run engine, or None.

    Loaded lazily (the JIT import is slow) and only when a node survives
    long enough to need it.  CASTOR_NO_KERNEL=1 disables it; verdicts are
    identical either way, only throughput changes.
    """
    global _kernel_mod, _kernel_checked
    if not _kernel_checked:
        _kernel_checked = True
        if not os.environ.get("CASTOR_NO_KERNEL"):
            try:
                from . import _kernel
                if _kernel.HAVE_KERNEL:
                    _kernel_mod = _kernel
            except ImportError:
                _kernel_mod = None
    return _kernel_mod

# Verdict codes used by the raw sink protocol (value = steps or cap).
CODE_HALT_BLANK = 0
CODE_HALT_DIRTY = 1
CODE_NH_UNREACHABLE = 2
CODE_NH_CYCLER = 3
CODE_NH_ESCAPE = 4
CODE_NH_BOUND = 5
CODE_UNKNOWN = 6

CODE_NAMES = (
    "halts-blank",
    "halts-dirty",
    "non-halting:halt-unreachable",
    "non-halting:cycler-repeat",
    "non-halting:escape-heuristic",
    "non-halting:known-bound-exceeded",
    "unknown",
)

# Kernel return value -> sink code (index = _kernel.RET_* value 1..6).
_KERNEL_CODES = (None, CODE_HALT_BLANK, CODE_HALT_DIRTY, CODE_NH_BOUND,
                 CODE_NH_ESCAPE, CODE_NH_CYCLER, CODE_UNKNOWN)

_BIG = 1 << 62


def decision_from_code(code: int, value: int) -> Decision:
    if code == CODE_HALT_BLANK:
        return Decision(Verdict.HALTS_BLANK, steps=value)
    if code == CODE_HALT_DIRTY:
        return Decision(Verdict.HALTS_DIRTY, steps=value)
    if code == CODE_NH_UNREACHABLE:
        return Decision(Verdict.NON_HALTING, reason=Reason.HALT_UNREACHABLE)
    if code == CODE_NH_CYCLER:
        return Decision(Verdict.NON_HALTING, reason=Reason.CYCLER_REPEAT)
    if code == CODE_NH_ESCAPE:
        return Decision(Verdict.NON_HALTING, reason=Reason.ESCAPE_HEURISTIC)
    if code == CODE_NH_BOUND:
        return Decision(Verdict.NON_HALTING, reason=Reason.KNOWN_BOUND_EXCEEDED)
    return Decision(Verdict.UNKNOWN, cap=value)


@dataclass
class PartialMachine:
    """A table under construction plus its normalization bookkeeping.

    ``used_states`` counts states referenced so far (sources or targets of
    defined entries); the next fresh state has exactly that index.
    ``used_symbols`` is the largest non-blank symbol written so far; the
    next new symbol must be ``used_symbols + 1``.
    """

    table: TransitionTable
    used_states: int
    used_symbols: int


@dataclass
class EnumerationNode:
    """A partial machine paused at its first undefined (state, symbol) pair.

    Replaying the machine from the blank tape reaches exactly the resume
    configuration at its step count.
    """

    machine: PartialMachine
    resume: Configuration


def root_machines(n_states: int, n_symbols: int,
                  mode: str = "default") -> list[PartialMachine]:
    """Initial partial machines: only (A, 0) defined, moving right.

    The first transition targets state B, or HALT when there is no second
    state.  Default mode emits both first writes (complete by
    construction); paper-pruning mode restricts the first write to 1 and
    exists for count cross-checks (for n_states == 1 the restriction is
    dropped, as there is no second state to restart from).
    """
    if mode not in ("default", "paper"):
        raise ValueError(f"unknown mode {mode!r}")
    target = HALT if n_states == 1 else 1
    writes = [1] if (mode == "paper" and n_states > 1) else [0, 1]
    roots = []
    for w in writes:
        table = TransitionTable(n_states, n_symbols)
        table.define(0, 0, Transition(w, RIGHT, target))
        roots.append(PartialMachine(table, used_states=min(2, n_states),
                                    used_symbols=w))
    return roots


def _child_options(used_states: int, used_symbols: int,
                   n_states: int, n_symbols: int) -> list[tuple[int, int, int]]:
    """Legal (write, move, next) triples for a new entry, in canonical
    order: write ascending, R before L, targets ascending, HALT last."""
    writes = range(min(used_symbols + 1, n_symbols - 1) + 1)
    targets = list(range(used_states))
    if used_states < n_states:
        targets.append(used_states)
    targets.append(HALT)
    return [(w, mv, t) for w in writes for mv in (RIGHT, LEFT) for t in targets]


def expand(node: EnumerationNode,
           pending: tuple[int, int]) -> list[EnumerationNode]:
    """All single-entry extensions of a paused machine.

    ``pending`` must be the undefined (state, symbol) pair the resume
    configuration is about to read.  Each child defines it with one legal
    action and inherits the resume configuration with that transition
    applied (so HALT children arrive already halted).
    """
    state, symbol = pending
    machine = node.machine
    if machine.table.get(state, symbol) is not None:
        raise ValueError(f"pending pair {pending} is already defined")
    if node.resume.state != state or node.resume.read() != symbol:
        raise ValueError(f"pending pair {pending} does not match the resume "
                         f"configuration")
    children = []
    for w, mv, t in _child_options(machine.used_states, machine.used_symbols,
                                   machine.table.n_states,
                                   machine.table.n_symbols):
        table = machine.table.copy()
        table.define(state, symbol, Transition(w, mv, t))
        child = PartialMachine(
            table,
            used_states=machine.used_states + (1 if t == machine.used_states else 0),
            used_symbols=max(machine.used_symbols, w))
        resume = step(node.resume, table)
        children.append(EnumerationNode(child, resume))
    return children


def equivalent_states(table: TransitionTable) -> tuple[int, int] | None:
    """Find two interchangeable fully-defined states, if any.

    Uses partition refinement: states are grouped by their visible actions
    (write, move, halt-or-not per symbol) and repeatedly split by the
    classes of their successor states, so mutually-referencing duplicates
    are found, not just literally equal rows.  States with undefined
    entries stay in singleton classes (a later definition could still
    distinguish them).
    """
    flat = _flat_from_table(table)
    pair = _equivalent_pair_flat(flat, table.n_states, table.n_symbols)
    return pair


def _flat_from_table(table: TransitionTable) -> list[tuple[int, int, int] | None]:
    return [None if tr is None else (tr.write, tr.move, tr.next_state)
            for tr in table.entries]


def _table_from_flat(flat, n_states: int, n_symbols: int) -> TransitionTable:
    return TransitionTable(n_states, n_symbols,
                           [None if t is None else Transition(*t) for t in flat])


def format_flat(flat, n_states: int, n_symbols: int) -> str:
    """Fast machine-string formatting for flat tables."""
    parts = []
    for s in range(n_states):
        row = []
        for k in range(n_symbols):
            t = flat[s * n_symbols + k]
            if t is None:
                row.append("---")
            else:
                w, mv, nx = t
                row.append(f"{w}{'R' if mv == RIGHT else 'L'}"
                           f"{'Z' if nx < 0 else _STATE_LETTERS[nx]}")
        parts.append("".join(row))
    return "_".join(parts)


def _equivalent_pair_flat(flat, n: int, m: int) -> tuple[int, int] | None:
    complete = [None not in flat[s * m:(s + 1) * m] for s in range(n)]
    if sum(complete) < 2:
        return None
    # Initial partition: visible per-symbol actions for complete states;
    # singletons for incomplete ones.
    ids: dict[object, int] = {}
    cls = [0] * n
    for s in range(n):
        if complete[s]:
            key = tuple((t[0], t[1], t[2] < 0) for t in flat[s * m:(s + 1) * m])
        else:
            key = ("incomplete", s)
        cls[s] = ids.setdefault(key, len(ids))
    while True:
        ids2: dict[object, int] = {}
        new = [0] * n
        for s in range(n):
            if complete[s]:
                key = (cls[s],) + tuple(
                    -1 if t[2] < 0 else cls[t[2]] for t in flat[s * m:(s + 1) * m])
            else:
                key = ("incomplete", s)
            new[s] = ids2.setdefault(key, len(ids2))
        if new == cls:
            break
        cls = new
    groups: dict[int, list[int]] = {}
    for s in range(n):
        if complete[s]:
            groups.setdefault(cls[s], []).append(s)
    for members in groups.values():
        if len(members) >= 2:
            return members[0], members[1]
    return None


def _halt_reachable_flat(flat, n: int, m: int) -> bool:
    seen = 1
    stack = [0]
    while stack:
        base = stack.pop() * m
        for k in range(m):
            t = flat[base + k]
            if t is None:
                return True
            nx = t[2]
            if nx < 0:
                return True
            bit = 1 << nx
            if not seen & bit:
                seen |= bit
                stack.append(nx)
    return False


def _bisimilar(flat, m: int, a: int, b: int) -> bool:
    """Coinductive check that fully-defined states a and b act identically.

    Grows the hypothesis set of identified state pairs; any undefined row
    or visible mismatch (write, move, halt-vs-state) refutes it.
    """
    pairs = {(a, b)}
    work = [(a, b)]
    while work:
        x, y = work.pop()
        bx = x * m
        by = y * m
        for k in range(m):
            tx = flat[bx + k]
            ty = flat[by + k]
            if tx is None or ty is None:
                return False
            if tx[0] != ty[0] or tx[1] != ty[1]:
                return False
            nx = tx[2]
            ny = ty[2]
            if nx == ny:
                continue
            if nx < 0 or ny < 0:
                return False
            p = (nx, ny) if nx < ny else (ny, nx)
            if p not in pairs:
                pairs.add(p)
                work.append(p)
    return True


@dataclass
class EnumStats:
    """Bookkeeping for one enumeration: entries processed, machines
    emitted, children removed by equivalent-state pruning, and whether the
    walk covered the whole tree (False only under a node budget)."""

    nodes: int = 0
    emitted: int = 0
    pruned_equivalent: int = 0
    complete: bool = True


def _roots_raw(n: int, m: int, mode: str):
    """Stack entries for the enumeration roots (see _drain for the layout)."""
    target = HALT if n == 1 else 1
    writes = [1] if (mode == "paper" and n > 1) else [0, 1]
    entries = []
    for w in reversed(writes):  # reversed: stack pops smallest write first
        flat = [None] * (n * m)
        flat[0] = (w, RIGHT, target)
        used = 1 if n == 1 else 2
        undef = used * m - 1  # undefined entries among used states
        entries.append((flat, {}, 0, w, RIGHT, target, 0,
                        1, used, w, undef, 0, 0, 0, None, 1))
    return entries


def _bound_matrix(limits: DeciderLimits, n: int, m: int) -> list[list[int]]:
    """bounds[defined_states][max_written_symbol] -> step bound or huge."""
    from .deciders import applicable_bound
    mat = []
    for s in range(n + 1):
        row = []
        for w in range(m):
            b = applicable_bound(limits.known_bounds, max(s, 1), max(2, w + 1))
            row.append(b if b is not None else _BIG)
        mat.append(row)
    return mat


def _drain(stack, n: int, m: int, limits: DeciderLimits, raw_sink,
           stats: EnumStats, mode_is_dfs: bool = True,
           max_nodes: int | None = None,
           frontier_target: int | None = None):
    """Process enumeration entries until exhaustion (or a budget/frontier
    condition); returns leftover entries when stopped early, else None.

    Stack entry layout (pending child with its new entry already in the
    table, but not yet applied to the tape):
      (flat, tape, whead, w, d, nx, steps, defined, used, maxw, undef,
       snap_state, snap_head, snap_len, snap_tape, next_snap)
    where ``undef`` counts undefined entries among the used states.  In
    these tables every used state is reachable and no halt transition is
    ever present (halting children are emitted, never expanded), so the
    reachable set is closed off from HALT exactly when ``undef`` is 0.
    """
    bmat = _bound_matrix(limits, n, m)
    cap = limits.max_steps
    escape = limits.escape_enabled
    snap_budget = limits.cycler_memory
    options_cache: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    kern = _get_kernel()

    while stack:
        if max_nodes is not None and stats.nodes >= max_nodes:
            stats.complete = False
            return stack
        if frontier_target is not None and len(stack) >= frontier_target:
            return stack
        entry = stack.pop() if mode_is_dfs else stack.popleft()
        (flat, tape0, whead, w, d, nx, steps, defined, used, maxw, undef,
         sst, shd, slen, stape, nsnap) = entry
        stats.nodes += 1
        steps += 1
        if nx < 0:
            # Halting child: the new entry writes, moves, halts.  Blankness
            # is computable without copying the tape.
            read = tape0.get(whead, 0)
            nonblank = len(tape0) - (1 if read else 0) + (1 if w else 0)
            raw_sink(flat, CODE_HALT_DIRTY if nonblank else CODE_HALT_BLANK, steps)
            stats.emitted += 1
            continue
        tape = dict(tape0)
        if w:
            tape[whead] = w
        elif whead in tape:
            del tape[whead]
        head = whead + d
        state = nx
        bound = bmat[defined][maxw]
        tget = tape.get
        kswitch = steps + KERNEL_SWITCH_STEPS if kern is not None else _BIG

        while True:
            if steps >= kswitch:
                # Long-lived node: continue inside the kernel (same
                # per-step semantics, far higher throughput).
                snapshot = None if stape is None else (sst, shd, stape)
                (ret, steps, head, state, tape, snapshot,
                 nsnap) = kern.run_long(flat, n, m, tape, head, state, steps,
                                        snapshot, nsnap, bound, cap, escape,
                                        snap_budget)
                if snapshot is None:
                    stape = None
                else:
                    sst, shd, stape = snapshot
                    slen = len(stape)
                if ret == 0:
                    # Undefined entry reached: re-run the (idempotent)
                    # checks below, then fall into the expansion path.
                    kswitch = _BIG
                    tget = tape.get
                else:
                    code = _KERNEL_CODES[ret]
                    raw_sink(flat, code, cap if code == CODE_UNKNOWN else steps)
                    stats.emitted += 1
                    break
            if steps > bound:
                raw_sink(flat, CODE_NH_BOUND, steps)
                stats.emitted += 1
                break
            if (escape and steps >= 2
                    and (head + head > steps or head + head < -steps)):
                raw_sink(flat, CODE_NH_ESCAPE, steps)
                stats.emitted += 1
                break
            if (stape is not None and state == sst and head == shd
                    and len(tape) == slen and tape == stape):
                raw_sink(flat, CODE_NH_CYCLER, steps)
                stats.emitted += 1
                break
            if steps >= nsnap:
                if len(tape) <= snap_budget:
                    sst, shd, slen = state, head, len(tape)
                    stape = dict(tape)
                nsnap <<= 1
            if steps >= cap:
                raw_sink(flat, CODE_UNKNOWN, cap)
                stats.emitted += 1
                break
            sym = tget(head, 0)
            tr = flat[state * m + sym]
            if tr is not None:
                tw, td, tn = tr
                if tw != sym:
                    if tw:
                        tape[head] = tw
                    else:
                        del tape[head]
                head += td
                steps += 1
                if tn < 0:
                    raw_sink(flat, CODE_HALT_BLANK if not tape else CODE_HALT_DIRTY,
                             steps)
                    stats.emitted += 1
                    break
                state = tn
                continue

            # Expansion point: one child per legal action for (state, sym).
            key = (used, maxw)
            opts = options_cache.get(key)
            if opts is None:
                opts = _child_options(used, maxw, n, m)
                options_cache[key] = opts
            base = state * m
            row_defined = sum(1 for t in flat[base:base + m] if t is not None)
            defined2 = defined + (0 if row_defined else 1)
            completes_row = row_defined == m - 1
            # A new interchangeable-state pair can only involve the state
            # whose row this entry completes (the table had none before);
            # prefilter partner candidates by the already-defined slots.
            cands = ()
            if completes_row:
                found = []
                for t in range(n):
                    if t == state:
                        continue
                    tb = t * m
                    for k in range(m):
                        e = flat[tb + k]
                        if e is None:
                            break
                        if k != sym:
                            e2 = flat[base + k]
                            if (e2[0] != e[0] or e2[1] != e[1]
                                    or (e2[2] < 0) != (e[2] < 0)):
                                break
                    else:
                        found.append((t, flat[tb + sym]))
                cands = tuple(found)
            children = []
            for cw, cd, cn in opts:
                flat2 = None
                if cands:
                    ch_halt = cn < 0
                    pruned = False
                    for t, e in cands:
                        if e[0] == cw and e[1] == cd and (e[2] < 0) == ch_halt:
                            flat2 = list(flat)
                            flat2[base + sym] = (cw, cd, cn)
                            if _bisimilar(flat2, m, state, t):
                                pruned = True
                                break
                    if pruned:
                        stats.pruned_equivalent += 1
                        continue
                if cn < 0:
                    # Halting child: emit in place, no tape copy needed.
                    nonblank = len(tape) - (1 if sym else 0) + (1 if cw else 0)
                    if flat2 is None:
                        flat2 = list(flat)
                        flat2[base + sym] = (cw, cd, cn)
                    raw_sink(flat2,
                             CODE_HALT_DIRTY if nonblank else CODE_HALT_BLANK,
                             steps + 1)
                    stats.emitted += 1
                    stats.nodes += 1
                    continue
                if flat2 is None:
                    flat2 = list(flat)
                    flat2[base + sym] = (cw, cd, cn)
                undef2 = undef - 1 + (m if cn == used else 0)
                if undef2 == 0:
                    raw_sink(flat2, CODE_NH_UNREACHABLE, steps)
                    stats.emitted += 1
                    stats.nodes += 1
                    continue
                children.append(
                    (flat2, tape, head, cw, cd, cn, steps,
                     defined2, used + (1 if cn == used else 0),
                     maxw if cw <= maxw else cw, undef2,
                     sst, shd, slen, stape, nsnap))
            if mode_is_dfs:
                stack.extend(reversed(children))
            else:
                stack.extend(children)
            break
    return None


def enumerate_machines(n_states: int, n_symbols: int,
                       limits: DeciderLimits, sink,
                       mode: str = "default",
                       max_nodes: int | None = None) -> EnumStats:
    """Walk the whole normalized tree for one (states, symbols) class.

    ``sink(table, decision)`` is called exactly once per emitted machine,
    in deterministic depth-first order.  Decider failures surface as
    Unknown decisions, never exceptions.  ``max_nodes`` optionally stops
    the walk early (stats.complete turns False) for best-so-far runs.
    """
    if mode not in ("default", "paper"):
        raise ValueError(f"unknown mode {mode!r}")

    def raw_sink(flat, code, value):
        sink(_table_from_flat(flat, n_states, n_symbols),
             decision_from_code(code, value))

    stats = EnumStats()
    stack = _roots_raw(n_states, n_symbols, mode)
    _drain(stack, n_states, n_symbols, limits, raw_sink, stats,
           max_nodes=max_nodes)
    return stats


def enumerate_raw(n_states: int, n_symbols: int, limits: DeciderLimits,
                  raw_sink, mode: str = "default",
                  max_nodes: int | None = None) -> EnumStats:
    """Like enumerate_machines, but the sink receives (flat_table, code,
    value) without object conversion.  Flat tables are never mutated after
    emission and may be retained."""
    stats = EnumStats()
    stack = _roots_raw(n_states, n_symbols, mode)
    _drain(stack, n_states, n_symbols, limits, raw_sink, stats,
           max_nodes=max_nodes)
    return stats


def collect_frontier(n_states: int, n_symbols: int, limits: DeciderLimits,
                     raw_sink, stats: EnumStats, target: int,
                     mode: str = "default") -> list[tuple[str, int]]:
    """Breadth-first expansion until at least ``target`` subtree roots are
    pending; leaves met on the way are emitted to ``raw_sink``.

    Returns serializable (machine-string, resume-steps) pairs: replaying
    the machine from the blank tape for that many steps reconstructs the
    paused configuration exactly.
    """
    from collections import deque
    stack = deque(_roots_raw(n_states, n_symbols, mode))
    rest = _drain(stack, n_states, n_symbols, limits, raw_sink, stats,
                  mode_is_dfs=False, frontier_target=target)
    if rest is None:
        return []
    return [(format_flat(e[0], n_states, n_symbols), e[6]) for e in rest]


def resume_entry(machine_string: str, steps: int, n_states: int,
                 n_symbols: int, limits: DeciderLimits):
    """Rebuild a stack entry from a frontier checkpoint pair.

    Replays ``steps`` steps from the blank tape (the table is defined on
    that whole prefix by construction) while reproducing the snapshot
    schedule, so the continued walk behaves exactly as an uninterrupted
    one.  The snapshot state is rebuilt as it stood just before the
    per-step checks of the final replayed step (compare-then-refresh
    order: refreshing through the last step would make the resumed loop
    compare that configuration against itself).  The machine's first
    still-unapplied entry is then consumed by the normal run loop.
    """
    from .machine import parse_machine
    table = parse_machine(machine_string)
    if table.n_states != n_states or table.n_symbols != n_symbols:
        raise ValueError("checkpoint entry does not match the search class")
    flat = _flat_from_table(table)
    m = n_symbols
    tape: dict[int, int] = {}
    head = 0
    state = 0
    done = 0
    sst = shd = slen = 0
    stape = None
    nsnap = 1
    snap_budget = limits.cycler_memory
    while done < steps:
        sym = tape.get(head, 0)
        tw, td, tn = flat[state * m + sym]
        if tw != sym:
            if tw:
                tape[head] = tw
            else:
                del tape[head]
        head += td
        done += 1
        state = tn
        if done < steps and done >= nsnap:
            if len(tape) <= snap_budget:
                sst, shd, slen = state, head, len(tape)
                stape = dict(tape)
            nsnap <<= 1
    defined_states = {i // m for i, t in enumerate(flat) if t is not None}
    referenced = set(defined_states)
    for t in flat:
        if t is not None and t[2] >= 0:
            referenced.add(t[2])
    maxw = max([t[0] for t in flat if t is not None], default=0)
    used = max(referenced) + 1
    undef = sum(1 for i, t in enumerate(flat) if t is None and i < used * m)
    # The entry is mid-run: reuse the pending-child layout with a no-op
    # application (write back the symbol under the head, no move, then the
    # run loop continues from the true position).
    sym = tape.get(head, 0)
    return (flat, tape, head, sym, 0, state, done - 1,
            len(defined_states), used, maxw, undef,
            sst, shd, slen, stape, nsnap)


def drain_entries(entries, n_states: int, n_symbols: int,
                  limits: DeciderLimits, raw_sink) -> EnumStats:
    """Depth-first completion of a list of resumed stack entries."""
    stats = EnumStats()
    stack = list(reversed(entries))
    _drain(stack, n_states, n_symbols, limits, raw_sink, stats)
    return stats
