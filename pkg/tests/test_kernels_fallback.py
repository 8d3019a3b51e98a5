"""The pure-numpy kernel fallback must agree with the jitted path."""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from cvmbqc import _kernels, gates
from cvmbqc import lattice as lat
from cvmbqc import optimizer as opt

_CHILD = r"""
import json, math, sys
import numpy as np
from cvmbqc import _kernels
from cvmbqc import lattice as lat
from cvmbqc import optimizer as opt

assert _kernels.BACKEND == "numpy", _kernels.BACKEND
r = lat.db_to_r(12.0)
frozen = opt._region("MBSL", r)
rng = np.random.default_rng(7)
out = []
for _ in range(5):
    x = rng.uniform(-math.pi, math.pi, frozen.n_free)
    resid, perr = frozen.metrics(x)
    out.append([resid, perr])
xb, fb, nev = _kernels.nelder_mead(rng.uniform(-0.5, 0.5, frozen.n_free), 0.2,
                                   *frozen.kernel_args(1e-4), 2000, 1e-13)
out.append(list(xb) + [fb])
print(json.dumps(out))
"""


def test_numpy_fallback_matches_numba():
    env = dict(os.environ, CVMBQC_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, "-c", _CHILD], env=env,
                          capture_output=True, text=True, check=True)
    fallback = json.loads(proc.stdout)

    r = lat.db_to_r(12.0)
    frozen = opt._region("MBSL", r)
    rng = np.random.default_rng(7)
    for row in fallback[:5]:
        x = rng.uniform(-math.pi, math.pi, frozen.n_free)
        resid, perr = frozen.metrics(x)
        assert resid == pytest_approx(row[0])
        assert perr == pytest_approx(row[1])
    xb, fb, nev = _kernels.nelder_mead(rng.uniform(-0.5, 0.5, frozen.n_free), 0.2,
                                       *frozen.kernel_args(1e-4), 2000, 1e-13)
    assert np.allclose(list(xb) + [fb], fallback[5], rtol=1e-9, atol=1e-12)


def pytest_approx(v):
    import pytest
    return pytest.approx(v, rel=1e-12, abs=1e-300)
