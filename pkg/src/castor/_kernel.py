"""Optional JIT-compiled engine for long fixed-table runs.

The enumerator's per-node loop switches to this kernel once a node has
survived a few hundred steps, at which point throughput matters more
than per-call overhead.  The kernel replicates the pure-Python loop's
per-step check order exactly (bound, escape, repeat-compare, snapshot
refresh, cap, then one step), so verdicts and snapshot schedules are
bit-identical with or without it; a parity test pins that.

Falls back to nothing when numba is unavailable: callers must treat
``HAVE_KERNEL == False`` as "keep stepping in Python".
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_KERNEL = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_KERNEL = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


RET_UNDEFINED = 0
RET_HALT_BLANK = 1
RET_HALT_DIRTY = 2
RET_BOUND = 3
RET_ESCAPE = 4
RET_CYCLER = 5
RET_CAP = 6

# out[]: ret, steps, head, state, next_snap, snap_state, snap_head,
#        snap_valid, nonblank
_OUT_FIELDS = 9


@njit(cache=True)
def _long_run(prog, tape, snap_tape, center, head, state, steps, nonblank,
              snap_state, snap_head, snap_valid, next_snap, bound, cap,
              escape, snap_budget, m, lo, hi, out):  # pragma: no cover - jitted
    # lo/hi bound the cells ever written; both tapes are blank outside, so
    # snapshot copies and compares can stay inside the window (it only
    # grows, so an older snapshot is blank outside it too).
    while True:
        if steps > bound:
            out[0] = RET_BOUND
            break
        if escape and steps >= 2:
            off = head - center
            off += off
            if off > steps or -off > steps:
                out[0] = RET_ESCAPE
                break
        if snap_valid and state == snap_state and head == snap_head:
            equal = True
            for i in range(lo, hi + 1):
                if tape[i] != snap_tape[i]:
                    equal = False
                    break
            if equal:
                out[0] = RET_CYCLER
                break
        if steps >= next_snap:
            if nonblank <= snap_budget:
                snap_tape[lo:hi + 1] = tape[lo:hi + 1]
                snap_state = state
                snap_head = head
                snap_valid = 1
            next_snap <<= 1
        if steps >= cap:
            out[0] = RET_CAP
            break
        sym = tape[head]
        base = (state * m + sym) * 3
        nxt = prog[base + 2]
        if nxt == -2:
            out[0] = RET_UNDEFINED
            break
        w = prog[base]
        if w != sym:
            if sym == 0:
                nonblank += 1
            elif w == 0:
                nonblank -= 1
            tape[head] = w
        head += prog[base + 1]
        steps += 1
        if head < lo:
            lo = head
        elif head > hi:
            hi = head
        if nxt == -1:
            out[0] = RET_HALT_BLANK if nonblank == 0 else RET_HALT_DIRTY
            break
        state = nxt
    out[1] = steps
    out[2] = head
    out[3] = state
    out[4] = next_snap
    out[5] = snap_state
    out[6] = snap_head
    out[7] = snap_valid
    out[8] = nonblank


def prog_array(flat, n: int, m: int) -> np.ndarray:
    """Flat table as an int64 array of (write, move, next) triples, with
    next = -2 marking undefined entries."""
    prog = np.empty(n * m * 3, dtype=np.int64)
    for i, tr in enumerate(flat):
        if tr is None:
            prog[3 * i] = 0
            prog[3 * i + 1] = 0
            prog[3 * i + 2] = -2
        else:
            prog[3 * i] = tr[0]
            prog[3 * i + 1] = tr[1]
            prog[3 * i + 2] = tr[2]
    return prog


def run_long(flat, n, m, tape, head, state, steps, snapshot, nsnap, bound,
             cap, escape, snap_budget):
    """Continue one run inside the kernel from the per-step check point.

    ``snapshot`` is (state, head, tape-dict) or None.  Returns
    (ret, steps, head, state, tape-dict, snapshot, nsnap); the tape and
    snapshot dicts are fresh objects.
    """
    span = 2 * cap + 3
    center = cap + 1
    lo = hi = center + head
    tape_arr = np.zeros(span, dtype=np.uint8)
    for pos, sym in tape.items():
        i = center + pos
        tape_arr[i] = sym
        if i < lo:
            lo = i
        elif i > hi:
            hi = i
    snap_arr = np.zeros(span, dtype=np.uint8)
    if snapshot is not None:
        s_state, s_head, s_tape = snapshot
        for pos, sym in s_tape.items():
            i = center + pos
            snap_arr[i] = sym
            if i < lo:
                lo = i
            elif i > hi:
                hi = i
        s_head += center
        s_valid = 1
        if s_head < lo:
            lo = s_head
        elif s_head > hi:
            hi = s_head
    else:
        s_state = s_head = 0
        s_valid = 0
    out = np.empty(_OUT_FIELDS, dtype=np.int64)
    _long_run(prog_array(flat, n, m), tape_arr, snap_arr, center,
              center + head, state, steps, len(tape), s_state, s_head,
              s_valid, nsnap, bound, cap, 1 if escape else 0, snap_budget,
              m, lo, hi, out)
    ret = int(out[0])
    new_tape = _to_dict(tape_arr, center)
    if out[7]:
        new_snap = (int(out[5]), int(out[6]) - center, _to_dict(snap_arr, center))
    else:
        new_snap = None
    return (ret, int(out[1]), int(out[2]) - center, int(out[3]), new_tape,
            new_snap, int(out[4]))


def _to_dict(arr: np.ndarray, center: int) -> dict[int, int]:
    cells = np.nonzero(arr)[0]
    return {int(i) - center: int(arr[i]) for i in cells}


def simulate_flat(flat, n: int, m: int, cap: int):
    """Plain capped simulation (no deciders) in the kernel: returns
    (ret, steps, head) with ret one of RET_HALT_BLANK/RET_HALT_DIRTY/
    RET_CAP/RET_UNDEFINED."""
    span = 2 * cap + 3
    center = cap + 1
    tape_arr = np.zeros(span, dtype=np.uint8)
    snap_arr = np.zeros(1, dtype=np.uint8)  # unused: snapshots disabled
    out = np.empty(_OUT_FIELDS, dtype=np.int64)
    _long_run(prog_array(flat, n, m), tape_arr, snap_arr, center, center, 0,
              0, 0, 0, 0, 0, 1 << 62, 1 << 62, cap, 0, -1, m, center, center,
              out)
    return int(out[0]), int(out[1]), int(out[2]) - center
