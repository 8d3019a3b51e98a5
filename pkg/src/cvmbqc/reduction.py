"""Turn a computation-region graph plus homodyne bases into the implemented
gate G, the gate-noise matrix N, and the displacement matrix D.

The engine builds the pre-measurement transformation S = S_R S_BS S_CZ,
solves out the anti-squeezed x quadratures of the cluster modes against the
measured quadratures, and reads off

    q_out = (Z - Y U^-1 V) q_in + Y U^-1 x_meas = (G | N) q_in + D x_meas

where q_in stacks the input-mode quadratures (xxpp) followed by the p
quadratures of all cluster modes.  The N columns therefore correspond to the
cluster-mode momenta in ascending mode order; D columns follow the graph's
measured-mode order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import symplectic as sp
from .errors import MeasurementDegenerateError

__all__ = [
    "BasisSetting",
    "GateResult",
    "reduce",
    "chain",
    "tensor",
    "restrict",
    "noise_factors",
    "premeasurement_symplectic",
]

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class BasisSetting:
    """Homodyne angles x(theta) = x cos(theta) + p sin(theta) per measured mode."""

    angles: Mapping[int, float]

    @classmethod
    def from_sums(cls, mode_in: int, mode_partner: int, theta_plus: float,
                  theta_minus: float, extra: Mapping[int, float] | None = None):
        """Build from the sum/difference angles theta_pm = theta_in +- theta_partner."""
        angles = dict(extra or {})
        angles[mode_in] = 0.5 * (theta_plus + theta_minus)
        angles[mode_partner] = 0.5 * (theta_plus - theta_minus)
        return cls(angles)


@dataclass(frozen=True, eq=False)
class GateResult:
    """The (G, N, D) triple of one reduced computation region.

    Rows of all three matrices are the output quadratures in xxpp order.
    ``G`` acts on the input quadratures (xxpp), ``N`` multiplies the cluster
    momenta listed in ``contributing_modes`` and ``D`` the measurement
    outcomes listed in ``measured_labels``.
    """

    G: np.ndarray
    N: np.ndarray
    D: np.ndarray
    contributing_modes: tuple = ()
    measured_labels: tuple = ()
    epsilon: float = field(default=float("nan"))
    rcond: float = field(default=float("nan"))

    @property
    def n_outputs(self) -> int:
        return self.G.shape[0] // 2

    @property
    def n_inputs(self) -> int:
        return self.G.shape[1] // 2

    def to_dict(self, lattice: str | None = None, r: float | None = None,
                basis=None) -> dict:
        doc = {
            "G": self.G.tolist(),
            "N": self.N.tolist(),
            "D": self.D.tolist(),
            "contributing_modes": list(self.contributing_modes),
            "measured_modes": list(self.measured_labels),
            "epsilon": self.epsilon,
        }
        if lattice is not None:
            doc["lattice"] = lattice
        if r is not None:
            doc["r"] = r
        if basis is not None:
            angles = basis.angles if isinstance(basis, BasisSetting) else basis
            doc["basis"] = {str(k): float(v) for k, v in dict(angles).items()}
        return doc


def _angles_of(basis) -> Mapping[int, float]:
    return basis.angles if isinstance(basis, BasisSetting) else basis


def premeasurement_symplectic(graph, basis) -> np.ndarray:
    """S_R S_BS S_CZ for the region, with output modes left unrotated."""
    angles = _angles_of(basis)
    n = graph.n_modes
    a = np.asarray(graph.adjacency, dtype=float)
    s_cz = np.eye(2 * n)
    s_cz[n:, :n] = a
    s = s_cz
    for i, j in graph.mixing_pairs:
        s = sp.embed(sp.beamsplitter(), [i, j], n) @ s
    theta = np.zeros(n)
    for m in graph.measured_modes:
        theta[m] = angles[m]
    c, si = np.cos(theta), np.sin(theta)
    s_r = np.block([[np.diag(c), np.diag(si)], [np.diag(-si), np.diag(c)]])
    return s_r @ s


def reduce(graph, basis) -> GateResult:
    """Reduce one region to its GateResult.

    ``basis`` must contain one angle per measured mode; output-mode angles are
    fixed at zero.  Raises MeasurementDegenerateError when the basis leaves
    the elimination system singular (reciprocal condition number < 1e-12).
    """
    angles = _angles_of(basis)
    n = graph.n_modes
    inputs = list(graph.input_modes)
    measured = list(graph.measured_modes)
    outputs = list(graph.output_modes)
    cluster = [m for m in range(n) if m not in set(inputs)]
    missing = [m for m in measured if m not in angles]
    if missing:
        raise ValueError(f"basis missing angles for measured modes {missing}")
    if len(measured) != len(cluster):
        raise ValueError(
            f"ill-formed region: {len(measured)} measured modes cannot eliminate "
            f"{len(cluster)} cluster quadratures")

    s = premeasurement_symplectic(graph, angles)
    meas_rows = s[measured, :]
    out_rows = np.vstack([s[outputs, :], s[[n + o for o in outputs], :]])

    anc_cols = cluster
    in_cols = inputs + [n + i for i in inputs] + [n + m for m in cluster]
    u = meas_rows[:, anc_cols]
    v = meas_rows[:, in_cols]
    y = out_rows[:, anc_cols]
    z = out_rows[:, in_cols]

    sv = np.linalg.svd(u, compute_uv=False)
    rcond = 0.0 if sv[0] == 0 else float(sv[-1] / sv[0])
    if rcond < RCOND_MIN:
        raise MeasurementDegenerateError(
            f"measurement basis is degenerate (rcond={rcond:.2e})")

    m = z - y @ np.linalg.solve(u, v)
    d = np.linalg.solve(u.T, y.T).T
    k2 = 2 * len(inputs)
    labels = getattr(graph, "labels", tuple(str(i) for i in range(n)))
    return GateResult(
        G=m[:, :k2],
        N=m[:, k2:],
        D=d,
        contributing_modes=tuple(labels[m_] for m_ in cluster),
        measured_labels=tuple(labels[m_] for m_ in measured),
        epsilon=getattr(graph, "epsilon", float("nan")),
        rcond=rcond,
    )


def chain(first: GateResult, second: GateResult) -> GateResult:
    """Compose two computation steps: G = G2 G1, N = [G2 N1 | N2], D likewise."""
    if second.G.shape[1] != first.G.shape[0]:
        raise ValueError(
            f"cannot chain: first step outputs {first.n_outputs} modes, "
            f"second expects {second.n_inputs}")
    g2 = second.G
    return GateResult(
        G=g2 @ first.G,
        N=np.hstack([g2 @ first.N, second.N]),
        D=np.hstack([g2 @ first.D, second.D]),
        contributing_modes=first.contributing_modes + second.contributing_modes,
        measured_labels=first.measured_labels + second.measured_labels,
        epsilon=second.epsilon if np.isnan(first.epsilon) else first.epsilon,
    )


def _xxpp_rows(mat: np.ndarray, keep, n_out: int) -> np.ndarray:
    rows = [k for k in keep] + [n_out + k for k in keep]
    return mat[rows, :]


def restrict(result: GateResult, out_keep, in_keep) -> GateResult:
    """Keep (and reorder) a subset of output and input modes.

    Valid when the dropped modes are decoupled from the kept ones; used to
    read single-mode gates out of two-computation-mode regions.
    """
    no, ni = result.n_outputs, result.n_inputs
    g = _xxpp_rows(result.G, out_keep, no)
    cols = [k for k in in_keep] + [ni + k for k in in_keep]
    return GateResult(
        G=g[:, cols],
        N=_xxpp_rows(result.N, out_keep, no),
        D=_xxpp_rows(result.D, out_keep, no),
        contributing_modes=result.contributing_modes,
        measured_labels=result.measured_labels,
        epsilon=result.epsilon,
        rcond=result.rcond,
    )


def tensor(results) -> GateResult:
    """Direct sum of parallel one-region results, keeping xxpp ordering."""
    results = list(results)
    n_out = sum(r.n_outputs for r in results)
    n_in = sum(r.n_inputs for r in results)
    n_noise = sum(r.N.shape[1] for r in results)
    n_meas = sum(r.D.shape[1] for r in results)
    g = np.zeros((2 * n_out, 2 * n_in))
    nn = np.zeros((2 * n_out, n_noise))
    dd = np.zeros((2 * n_out, n_meas))
    oo = ii = cc = mm = 0
    for r in results:
        ro, ri = r.n_outputs, r.n_inputs
        rows = list(range(oo, oo + ro)) + list(range(n_out + oo, n_out + oo + ro))
        cols = list(range(ii, ii + ri)) + list(range(n_in + ii, n_in + ii + ri))
        g[np.ix_(rows, cols)] = r.G
        nn[np.ix_(rows, range(cc, cc + r.N.shape[1]))] = r.N
        dd[np.ix_(rows, range(mm, mm + r.D.shape[1]))] = r.D
        oo += ro
        ii += ri
        cc += r.N.shape[1]
        mm += r.D.shape[1]
    return GateResult(
        G=g, N=nn, D=dd,
        contributing_modes=tuple(m for r in results for m in r.contributing_modes),
        measured_labels=tuple(m for r in results for m in r.measured_labels),
        epsilon=results[0].epsilon,
    )


def noise_factors(result: GateResult) -> np.ndarray:
    """Quadrature noise factors: sum_j N_ij^2 per output quadrature (xxpp).

    The gate-noise variance per quadrature is this times epsilon/2 under
    equal squeezing of all cluster modes.
    """
    return (result.N ** 2).sum(axis=1)
