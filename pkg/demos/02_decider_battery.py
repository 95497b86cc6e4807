"""Tour of the non-halting deciders.

Each decider is sound on its own (except the head-escape rule, which is a
heuristic and excluded in strict mode); `decide` combines them and falls
back to Unknown at the step cap.
"""

from castor import (DeciderLimits, backward_reasoning, decide,
                    halt_reachability, parse_machine, simulate)

examples = [
    ("halts on a blank tape", "1RB1LB_1LA0LC_0RZ0LD_1RD0LB"),
    ("halt state unreachable", "1RB0LB_1LA0RA"),
    ("every halt writes a one", "0RB1RZ_1LA1LZ"),
    ("exact configuration repeat", "0RB0RZ_0LA0RZ"),
    ("bounded by a smaller class", "1RB1RA_1RA---"),
]

limits = DeciderLimits(max_steps=100_000).strict()
for label, text in examples:
    decision = decide(parse_machine(text), limits)
    print(f"{label:32s} {text:28s} -> {decision.describe()}")

print()
print("backward reasoning from the blank final tape:")
machine = parse_machine("1LB1RB_0RZ1LA")
proof = backward_reasoning(machine, depth=4)
print(f"  {machine!r}")
print(f"  direct simulation: {simulate(machine, 1000).kind.value}")
print(f"  proof found: every predecessor branch dies in a write conflict "
      f"({len(proof.branches)} root branch(es))")

print()
print("the escape rule is heuristic: this machine dashes right, returns,")
print("and halts blank in 5 steps, yet |head| > steps/2 flags it at step 2:")
machine = parse_machine("1RB0RZ_0RC---_0LD---_0LA---")
print(f"  default limits: {decide(machine, DeciderLimits()).describe()}")
print(f"  strict limits:  {decide(machine, DeciderLimits().strict()).describe()}")
