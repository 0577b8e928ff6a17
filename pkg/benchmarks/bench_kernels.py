"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter, selected through the
``BAYESPOLY_DISABLE_NUMBA`` environment flag, on identical synthetic data.

    python3 benchmarks/bench_kernels.py --snps 20000 --samples 2000
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from bayespoly import _accel, kernels
from bayespoly.bayes import NormalGammaPrior

m, n, repeats = map(int, sys.argv[1:4])
rng = np.random.default_rng(0)
g = rng.integers(0, 3, (m, n)).astype(np.int8)
y = rng.normal(size=n)
tables = NormalGammaPrior.default().tables

def best_of(fn):
    fn()  # warm-up, includes any compilation
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

stats = kernels.accumulate(g, y)
out = {
    "backend": _accel.backend_name(),
    "accumulate": best_of(lambda: kernels.accumulate(g, y)),
    "evidence": best_of(lambda: kernels.evidence(*stats, tables)),
    "frequentist": best_of(lambda: kernels.frequentist(*stats)),
}
print(json.dumps(out))
"""


def run(disable: bool, snps: int, samples: int, repeats: int) -> dict:
    env = dict(os.environ)
    env.pop("BAYESPOLY_DISABLE_NUMBA", None)
    if disable:
        env["BAYESPOLY_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", _WORKER, str(snps), str(samples), str(repeats)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snps", type=int, default=20000)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    a = ap.parse_args(argv)
    rows = [run(False, a.snps, a.samples, a.repeats), run(True, a.snps, a.samples, a.repeats)]
    print(f"{a.snps} SNPs x {a.samples} samples, best of {a.repeats} (seconds)")
    print(f"{'kernel':<12}" + "".join(f"{r['backend']:>12}" for r in rows) + f"{'speedup':>10}")
    for k in ("accumulate", "evidence", "frequentist"):
        fast, slow = rows[0][k], rows[1][k]
        print(f"{k:<12}{fast:>12.4f}{slow:>12.4f}{slow / fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
