"""Deterministic parallel search with checkpoint and resume.

The enumeration tree splits into subtree roots handed to worker
processes; merge laws make the final report identical for every worker
count, and a checkpoint file lets an interrupted run continue to the
same byte-identical result.
"""

import os
import tempfile

from castor import DeciderLimits, SearchConfig, resume, run_search


def config(workers, checkpoint=None):
    return SearchConfig(3, 2, limits=DeciderLimits(max_steps=1000),
                        strict=True, workers=workers,
                        checkpoint_path=checkpoint)


solo = run_search(config(1))
duo = run_search(config(2))
print(f"workers=1: champion {solo.champion.steps} steps, "
      f"counts {sum(solo.counts.values())}, {solo.wall_time:.2f}s")
print(f"workers=2: champion {duo.champion.steps} steps, "
      f"counts {sum(duo.counts.values())}, {duo.wall_time:.2f}s")
print(f"reports identical: {solo == duo}")

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "checkpoint.json")
    partial = run_search(config(1, checkpoint=path), _stop_after_chunks=2)
    print(f"\ninterrupted after 2 chunks: complete={partial.complete}")
    finished = resume(path)
    print(f"resumed run matches uninterrupted: {finished == solo}")
