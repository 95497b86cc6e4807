"""Full strict searches over small (states, symbols) classes.

Strict mode uses only exhaustively justified deciders plus trusted known
bounds, so a completed walk with zero Unknown verdicts proves the
champion maximal for its class.
"""

from castor import DeciderLimits, SearchConfig, emit_table, run_search

reports = []
for n, m, cap in [(1, 2, 100), (2, 2, 100), (3, 2, 100), (1, 3, 100),
                  (2, 3, 100), (1, 4, 100), (1, 5, 100)]:
    config = SearchConfig(n, m, limits=DeciderLimits(max_steps=cap),
                          strict=True)
    report = run_search(config)
    reports.append(report)
    champ = report.champion
    print(f"({n},{m}): champion {champ.machine} with {champ.steps} steps, "
          f"proven={champ.proven}, {report.emitted} machines, "
          f"{report.wall_time:.2f}s")

print()
print(emit_table(reports))
