#!/usr/bin/env python3
"""Regenerate the pinned-seed reference run for the desk-scale benchmark.

Writes benchmarks/reference/fig3_reference.json, the committed artifact the
acceptance suite compares against.  Rerun after any change that affects run
trajectories (generator, kernels, selection logic) and review the diff.
"""

import json
import os
import sys
import time

from seafarer.benchmark import run_benchmark


def main() -> int:
    t0 = time.time()

    def progress(strategy, seed, record):
        print(
            f"  {strategy} seed={seed}: final AUC {record.rows[-1].auc:.4f} "
            f"({time.time() - t0:.0f}s elapsed)"
        )

    result = run_benchmark(progress=progress)
    payload = result.to_dict()
    payload["elapsed_seconds"] = round(time.time() - t0, 1)

    out_dir = os.path.join(os.path.dirname(__file__), "reference")
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "fig3_reference.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"\nwrote {out_path}")
    for strategy, mean in payload["mean_final_auc"].items():
        print(f"  {strategy}: mean final AUC {mean:.4f}")
    gaps = payload["seafaring_minus_small_exact"]
    print(f"  per-seed seafaring-small_exact gaps: {[round(g, 4) for g in gaps]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
