"""Macro-step analysis of the six-state blank-to-blank candidate.

The machine's recurring tape shapes are abstracted as C(k0, k1, k2): a
block of k0 ones, a zero, then k1+k2 ones with the head on the k1-th of
them (on the zero when k1 = 0), in state C.  Case rules with exact step
costs map each such shape to the next, and closed forms aggregate the
long alternating runs.  A certificate chains these rules from the start
configuration to the blank halt; every step can be cross-checked against
the direct simulator.

The rules are specific to this one machine (pinned below); they say
nothing about any other table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machine import parse_machine
from .sim import Configuration, run_from, start_config
from .machine import HALT as HALT_STATE

CHAMPION_6 = "1RB1RA_1LB1LC_1RD0RE_0LE0RA_0RZ0RF_0RB0RC"

START = "START"
HALT = "HALT"

_STATE_C = 2


class OutOfDomainError(ValueError):
    """The configuration falls outside the analyzed parameter region."""


class CertificateError(ValueError):
    """A certificate is malformed or fails verification."""


@dataclass(frozen=True)
class MacroConfig:
    k0: int
    k1: int
    k2: int

    def __post_init__(self):
        if self.k0 < 0 or self.k1 < 0 or self.k2 < 0:
            raise ValueError("block lengths must be non-negative")

    def __str__(self) -> str:
        return f"C({self.k0},{self.k1},{self.k2})"


@dataclass(frozen=True)
class MacroStep:
    """One aggregated move: from -> to in exactly ``cost`` machine steps."""

    frm: MacroConfig | str  # MacroConfig or START
    to: MacroConfig | str   # MacroConfig or HALT
    cost: int
    rule: str
    halts_blank: bool = False


@dataclass
class Certificate:
    """An ordered chain of macro steps from START to HALT."""

    steps: list[MacroStep]

    @property
    def total(self) -> int:
        return sum(s.cost for s in self.steps)


def champion_table():
    return parse_machine(CHAMPION_6)


def expand_config(mc: MacroConfig) -> Configuration:
    """Concrete tape for C(k0,k1,k2): ones at head-(k1-1)..head and
    head+1..head+k2, a zero between the k0-block and the k1-block, and
    ones to its left; head on cell 0, state C."""
    tape: dict[int, int] = {}
    for i in range(mc.k1):
        tape[-i] = 1
    for i in range(1, mc.k2 + 1):
        tape[i] = 1
    for i in range(mc.k0):
        tape[-mc.k1 - 1 - i] = 1
    lo = min(-mc.k1 - mc.k0, 0)
    hi = max(mc.k2, 0)
    return Configuration(tape, head=0, state=_STATE_C, steps=0, lo=lo, hi=hi)


def macro_step(mc: MacroConfig) -> MacroStep:
    """The unique case rule applying to a configuration.

    Case 1 handles k1 = 0 (needs k2 >= 2); for k1 >= 1 the residue of k2
    mod 3 picks the case, with the k1 = 1 variants requiring k0 >= 1.
    Outside those regions the analysis makes no claim and this raises
    OutOfDomainError.
    """
    k0, k1, k2 = mc.k0, mc.k1, mc.k2
    if k1 == 0:
        if k2 < 2:
            raise OutOfDomainError(f"{mc}: case 1 needs k2 >= 2")
        return MacroStep(mc, MacroConfig(k0 + 1, k2 - 1, 2), k2 + 4, "case-1")
    r = k2 % 3
    if r == 0:
        return MacroStep(mc, HALT, k2 + 2, "case-2.1",
                         halts_blank=(k0 == 0 and k1 == 1))
    if r == 1:
        if k1 >= 2:
            return MacroStep(mc, MacroConfig(k0, k1 - 2, k2 + 4),
                             2 * k2 + 6, "case-2.2a")
        if k0 < 1:
            raise OutOfDomainError(f"{mc}: case 2.2 with k1=1 needs k0 >= 1")
        return MacroStep(mc, MacroConfig(0, k0 - 1, k2 + 5),
                         2 * k2 + 7, "case-2.2b")
    if k1 >= 2:
        return MacroStep(mc, MacroConfig(k0, k1 - 2, k2 + 5),
                         2 * k2 + 10, "case-2.3a")
    if k0 < 1:
        raise OutOfDomainError(f"{mc}: case 2.3 with k1=1 needs k0 >= 1")
    return MacroStep(mc, MacroConfig(0, k0 - 1, k2 + 6),
                     2 * k2 + 11, "case-2.3b")


def closed_form_step(mc: MacroConfig) -> MacroStep:
    """Aggregate a whole k1-descent for k2 = 2 (mod 3), k2 >= 2.

    Writing k1 = 4m + r, the alternating case-2 steps plus the final
    short-k1 step collapse into one formula per residue r; the result
    equals the fold of the individual macro steps in both target and
    total cost.  r in {1, 3} ends in a k1 = 1 step and needs k0 >= 1.
    """
    k0, k1, k2 = mc.k0, mc.k1, mc.k2
    if k2 % 3 != 2 or k2 < 2:
        raise OutOfDomainError(f"{mc}: closed forms cover k2 = 2 (mod 3), k2 >= 2")
    m, r = divmod(k1, 4)
    if r == 0:
        cost = 4 * m * k2 + k2 + 18 * m * m + 17 * m + 4
        to = MacroConfig(k0 + 1, k2 + 9 * m - 1, 2)
    elif r == 1:
        if k0 < 1:
            raise OutOfDomainError(f"{mc}: r=1 closed form needs k0 >= 1")
        cost = 4 * m * k2 + 2 * k2 + 18 * m * m + 26 * m + 11
        to = MacroConfig(0, k0 - 1, k2 + 9 * m + 6)
    elif r == 2:
        cost = 4 * m * k2 + 3 * k2 + 18 * m * m + 35 * m + 19
        to = MacroConfig(k0 + 1, k2 + 9 * m + 4, 2)
    else:
        if k0 < 1:
            raise OutOfDomainError(f"{mc}: r=3 closed form needs k0 >= 1")
        cost = 4 * m * k2 + 4 * k2 + 18 * m * m + 44 * m + 27
        to = MacroConfig(0, k0 - 1, k2 + 9 * m + 10)
    return MacroStep(mc, to, cost, f"closed-form-r{r}-m{m}")


START_STEP = MacroStep(START, MacroConfig(0, 0, 2), 3, "start")


def build_certificate() -> Certificate:
    """Derive the full START -> HALT chain from the rules alone.

    From each configuration: case 1 clears k1 = 0, a k2 divisible by 3
    ends the run via case 2.1, and k2 = 2 (mod 3) takes the aggregated
    closed form.  Starting from C(0,0,2) this terminates in the blank
    halt after 13 macro steps totalling 438120.
    """
    steps = [START_STEP]
    mc = START_STEP.to
    while True:
        if mc.k1 == 0:
            step = macro_step(mc)
        elif mc.k2 % 3 == 0:
            step = macro_step(mc)  # case 2.1: halt
        elif mc.k2 % 3 == 2:
            step = closed_form_step(mc)
        else:
            step = macro_step(mc)
        steps.append(step)
        if step.to == HALT:
            return Certificate(steps)
        mc = step.to


def _relative_profile(config: Configuration) -> tuple[int, tuple[int, ...]]:
    """State plus non-blank cell offsets relative to the head; equal
    profiles mean equal configurations up to translation."""
    return config.state, tuple(sorted(p - config.head for p in config.tape))


def cross_check(ms: MacroStep) -> bool:
    """Replay one macro step on the pinned candidate with the direct
    simulator: run exactly ``cost`` steps from the expanded source and
    compare against the expanded target (or the predicted halt)."""
    table = champion_table()
    config = start_config() if ms.frm == START else expand_config(ms.frm)
    target_steps = config.steps + ms.cost
    end = run_from(table, config, target_steps)
    if ms.to == HALT:
        return (end.state == HALT_STATE and end.steps == target_steps
                and end.is_blank() == ms.halts_blank)
    if end.state == HALT_STATE or end.steps != target_steps:
        return False
    return _relative_profile(end) == _relative_profile(expand_config(ms.to))


def verify_certificate(cert: Certificate, deep: bool = True) -> int:
    """Check a certificate end to end; returns the verified total.

    Validates the chain (consecutive steps link up, the final step is the
    halting case 2.1 reached with k0 = 0 and k1 = 1), re-derives each
    step from its rule, and, with ``deep``, cross-checks every step
    against direct simulation.  Raises CertificateError on any mismatch.
    """
    if not cert.steps:
        raise CertificateError("empty certificate")
    if cert.steps[0].frm != START:
        raise CertificateError("certificate must begin at START")
    for i, step in enumerate(cert.steps):
        if i > 0 and step.frm != cert.steps[i - 1].to:
            raise CertificateError(f"step {i} does not chain: "
                                   f"{cert.steps[i - 1].to} then {step.frm}")
        expected = _rederive(step)
        if (expected.to, expected.cost) != (step.to, step.cost) \
                or expected.halts_blank != step.halts_blank:
            raise CertificateError(f"step {i} does not match its rule "
                                   f"{step.rule}: expected {expected}")
        if deep and not cross_check(step):
            raise CertificateError(f"step {i} fails simulation cross-check")
    last = cert.steps[-1]
    if last.to != HALT or not last.halts_blank:
        raise CertificateError("certificate does not end in a blank halt")
    if any(s.to == HALT for s in cert.steps[:-1]):
        raise CertificateError("HALT appears before the final step")
    return cert.total


def _rederive(step: MacroStep) -> MacroStep:
    if step.rule == "start":
        return START_STEP
    if not isinstance(step.frm, MacroConfig):
        raise CertificateError(f"rule {step.rule} cannot start from {step.frm}")
    try:
        if step.rule.startswith("closed-form"):
            derived = closed_form_step(step.frm)
        elif step.rule.startswith("case-"):
            derived = macro_step(step.frm)
        else:
            raise CertificateError(f"unknown rule {step.rule!r}")
    except OutOfDomainError as exc:
        raise CertificateError(str(exc)) from exc
    if derived.rule != step.rule:
        raise CertificateError(f"rule mismatch: stated {step.rule}, "
                               f"derived {derived.rule}")
    return derived


def _side_str(side: MacroConfig | str) -> str:
    return str(side)


def _parse_side(token: str) -> MacroConfig | str:
    if token in (START, HALT):
        return token
    if token.startswith("C(") and token.endswith(")"):
        parts = token[2:-1].split(",")
        if len(parts) == 3:
            try:
                return MacroConfig(*(int(p) for p in parts))
            except ValueError:
                pass
    raise CertificateError(f"malformed configuration {token!r}")


def format_certificate(cert: Certificate) -> str:
    """Line-delimited export: "from → to cost rule", then a total line."""
    lines = [f"{_side_str(s.frm)} → {_side_str(s.to)} {s.cost} {s.rule}"
             for s in cert.steps]
    lines.append(f"total {cert.total}")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> Certificate:
    steps: list[MacroStep] = []
    total_line: int | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("total"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise CertificateError(f"malformed total line {line!r}")
            total_line = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 5 or parts[1] != "→":
            raise CertificateError(f"malformed certificate line {line!r}")
        frm = _parse_side(parts[0])
        to = _parse_side(parts[2])
        try:
            cost = int(parts[3])
        except ValueError as exc:
            raise CertificateError(f"malformed cost in {line!r}") from exc
        halts_blank = (to == HALT and isinstance(frm, MacroConfig)
                       and frm.k0 == 0 and frm.k1 == 1)
        steps.append(MacroStep(frm, to, cost, parts[4], halts_blank))
    cert = Certificate(steps)
    if total_line is not None and total_line != cert.total:
        raise CertificateError(f"stated total {total_line} does not match "
                               f"sum of costs {cert.total}")
    return cert
