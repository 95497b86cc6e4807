"""Simulate blank-to-blank champions step by step.

The compact machine format packs one 3-character action per (state, read
symbol) cell: write digit, move L/R, next state letter (Z = halt).  A
halting transition still writes and moves, and counts as a step.
"""

from castor import parse_machine, simulate, trace
from castor.machine import state_letter

CHAMPIONS = {
    1: "0RZ---",
    2: "0RB---_1LA0RZ",
    3: "1RB0RB_1RC0LC_1LA0RZ",
    4: "1RB1LB_1LA0LC_0RZ0LD_1RD0LB",
    6: "1RB1RA_1LB1LC_1RD0RE_0LE0RA_0RZ0RF_0RB0RC",
}

for n, text in CHAMPIONS.items():
    result = simulate(parse_machine(text), 1_000_000)
    print(f"{n} states  {text:45s} {result.kind.value:13s} "
          f"{result.steps:>7} steps")

print()
print("full trace of the 2-state champion (step, state, head, read->written):")
for step, state, head, read, written in trace(parse_machine(CHAMPIONS[2]), 100):
    print(f"  {step}  {state_letter(state)}  {head:+d}  {read}->{written}")
