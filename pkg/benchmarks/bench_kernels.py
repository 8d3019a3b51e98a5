"""Benchmark the hot kernels on the numba path against the numpy fallback.

Runs itself twice in subprocesses (with and without CVMBQC_DISABLE_NUMBA) and
prints a timing table for the reduction objective and one simplex descent on
the DBSL controlled-Z region.

Usage: python benchmarks/bench_kernels.py
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))


def run_case() -> None:
    import numpy as np

    from cvmbqc import _kernels, gates
    from cvmbqc import lattice as lat
    from cvmbqc import optimizer as opt

    r = lat.db_to_r(15.0)
    frozen = opt._region("DBSL", r)
    rng = np.random.default_rng(1)
    x0 = rng.uniform(-math.pi, math.pi, 10)

    # warm-up (jit compilation on the numba path)
    frozen.metrics(x0)
    _kernels.nelder_mead(x0, 0.35, *frozen.kernel_args(1e-4), 500, 1e-13)

    n_eval = 2000
    t0 = time.perf_counter()
    for _ in range(n_eval):
        frozen.metrics(x0)
    dt_eval = (time.perf_counter() - t0) / n_eval

    t0 = time.perf_counter()
    xb, fb, nev = _kernels.nelder_mead(x0, 0.35, *frozen.kernel_args(1e-4),
                                       20000, 1e-13)
    dt_nm = time.perf_counter() - t0

    print(f"backend={_kernels.BACKEND:6s} objective={dt_eval * 1e6:9.1f} us/eval "
          f"simplex_descent={dt_nm * 1e3:9.1f} ms ({nev} evals)")


def main() -> None:
    if os.environ.get("CVMBQC_BENCH_CHILD"):
        run_case()
        return
    here = Path(__file__).resolve()
    for disable in ("0", "1"):
        env = dict(os.environ,
                   CVMBQC_BENCH_CHILD="1",
                   CVMBQC_DISABLE_NUMBA=disable)
        subprocess.run([sys.executable, str(here)], env=env, check=True)


if __name__ == "__main__":
    main()
