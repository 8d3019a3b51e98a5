"""Gate plans: closed-form basis settings per lattice plus the optimizer-backed
controlled-Z cache.

A plan is an ordered list of steps; each step holds one or more parallel
tracks of (region graph, full basis, output/input selection).  Realizing a
plan reduces every track, tensors parallel tracks, and chains the steps, so
the combined noise matrix follows the two-step composition rule
N = [G2 N1 | N2].
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lattice as lat
from . import symplectic as sp
from .errors import CacheMissError
from .reduction import BasisSetting, GateResult, chain, reduce, restrict, tensor

__all__ = [
    "GatePlan",
    "PlanStep",
    "PlanTrack",
    "realize",
    "target_symplectic",
    "basis_for",
    "qrl_cz_plan",
    "dbsl_swap_plan",
    "cz_plan",
    "iter_catalog",
    "load_basis_table",
    "save_basis_table",
    "default_table_path",
]

SINGLE_MODE_GATES = ("I", "F", "P1")

# Wire-parity transforms for cached CZ solutions: positions (0-based) in the
# free-angle vector whose signs flip for the odd-parity region.
DBSL_FLIP_POSITIONS = (2, 3, 5, 6, 7, 9)
BSL_FLIP_POSITIONS = tuple(range(12))

# Fourier byproduct exponents (n, m) of the optimized (F^n x F^m) CZ(1) per
# lattice and wire parity.
FFCZ_EXPONENTS = {
    ("DBSL", 0): (1, 1), ("DBSL", 1): (1, -1),
    ("BSL", 0): (1, -1), ("BSL", 1): (1, 1),
    ("MBSL", 0): (1, 1), ("MBSL", 1): (1, 1),
    ("QRL", 0): (-1, -1), ("QRL", 1): (-1, -1),
}


@dataclass(frozen=True)
class PlanTrack:
    graph: lat.ComputationGraph
    angles: dict
    out_keep: tuple | None = None
    in_keep: tuple | None = None


@dataclass(frozen=True)
class PlanStep:
    tracks: tuple


@dataclass(frozen=True)
class GatePlan:
    lattice: str
    gate_id: str
    r: float
    steps: tuple
    target: np.ndarray
    byproduct: np.ndarray | None = None
    parity: int = 0
    expected_residual: float | None = None
    expected_perr: float | None = None


def realize(plan: GatePlan) -> GateResult:
    """Reduce, tensor, and chain all plan steps into one GateResult."""
    combined = None
    for step in plan.steps:
        results = []
        for track in step.tracks:
            res = reduce(track.graph, track.angles)
            if track.out_keep is not None or track.in_keep is not None:
                res = restrict(res,
                               track.out_keep if track.out_keep is not None
                               else tuple(range(res.n_outputs)),
                               track.in_keep if track.in_keep is not None
                               else tuple(range(res.n_inputs)))
            results.append(res)
        step_result = results[0] if len(results) == 1 else tensor(results)
        combined = step_result if combined is None else chain(combined, step_result)
    return combined


def _fourier_power(n: int) -> np.ndarray:
    return sp.rotation(n * math.pi / 2)


def target_symplectic(gate_id: str, signs=(1, 1)) -> np.ndarray:
    """Symplectic matrix of a target gate; ``signs`` are the Fourier exponents
    (n, m) for the FFCZ family."""
    if gate_id == "I":
        return sp.identity()
    if gate_id == "F":
        return sp.rotation(math.pi / 2)
    if gate_id == "P1":
        return sp.shear(1.0)
    if gate_id == "CZ":
        return sp.cz(1.0)
    if gate_id == "FFCZ":
        n, m = signs
        ff = sp.embed(_fourier_power(n), [0], 2) @ sp.embed(_fourier_power(m), [1], 2)
        return ff @ sp.cz(1.0)
    if gate_id == "SWAP":
        x = np.zeros((4, 4))
        x[0, 1] = x[1, 0] = x[2, 3] = x[3, 2] = 1.0
        return x
    raise ValueError(f"unknown gate id {gate_id!r}")


def _step_basis(graph, theta_plus, theta_minus):
    """Basis for one single-mode step: the wire pair carries (theta+, theta-)."""
    mode_in, mode_partner = graph.free_modes[0], graph.free_modes[1]
    extra = graph.control_angles()
    if graph.lattice == "QRL":
        # basis restriction theta_A = theta_D, theta_B = theta_C applies the
        # same gate to both computation modes of the macronode
        a_in = 0.5 * (theta_plus + theta_minus)
        a_pa = 0.5 * (theta_plus - theta_minus)
        return {0: a_in, 1: a_in, 2: a_pa, 3: a_pa}
    return BasisSetting.from_sums(mode_in, mode_partner, theta_plus, theta_minus, extra).angles


def _single_mode_sums(lattice, gate_id, r, parity):
    """Published (theta+, theta-) tuples per step for the I, F, P(1) gates."""
    th = math.tanh(2.0 * r)
    sgn = -1.0 if parity else 1.0
    if lattice == "DBSL":
        tp_inv = th ** -2
        if gate_id == "I":
            return [(0.0, sgn * 2 * math.atan(tp_inv))]
        if gate_id == "F":
            return [(math.pi / 2, math.pi / 2), (0.0, 2 * math.atan(th ** -4))]
    elif lattice == "BSL":
        if gate_id == "I":
            return [(0.0, -sgn * 2 * math.atan(th ** -2))]
        if gate_id == "F":
            return [(math.pi / 2, math.pi / 2), (0.0, 2 * math.atan(th ** -4))]
    elif lattice == "MBSL":
        if gate_id == "I":
            return [(0.0, 2 * math.atan(th ** -1 / math.sqrt(2.0)))]
        if gate_id == "F":
            return [(math.pi / 2, math.pi / 2), (0.0, 2 * math.atan(th ** -2 / 2.0))]
    elif lattice == "QRL":
        if gate_id == "I":
            return [(0.0, 2 * math.atan(th ** -1))]
        if gate_id == "F":
            return [(math.pi / 2, math.pi / 2), (0.0, 2 * math.atan(th ** -2))]
    elif lattice == "TELEPORT":
        t = th
        if gate_id == "I":
            return [(0.0, 2 * math.atan(1.0 / t))]
        if gate_id == "F":
            return [(math.pi / 2, math.pi / 2), (0.0, 2 * math.atan(t ** -2))]
    if gate_id == "P1":
        a2 = math.atan(2.0)
        return [(a2, -a2), (math.pi / 2, math.pi / 2)]
    raise ValueError(f"no closed-form basis for gate {gate_id!r} on {lattice!r}")


def basis_for(lattice: str, gate_id: str, r: float, parity: int = 0) -> GatePlan:
    """Closed-form plan for the single-mode gate set on any built-in lattice."""
    if gate_id == "S_INV_T":
        if lattice != "QRL":
            raise ValueError("the squeezing-compensation step is a QRL gate")
        return _qrl_compensation_plan(r)
    if gate_id not in SINGLE_MODE_GATES:
        raise ValueError(f"unsupported (lattice, gate) = ({lattice!r}, {gate_id!r}); "
                         "CZ plans come from qrl_cz_plan or the optimizer cache")
    if r <= 0:
        raise ValueError("squeezing parameter must be positive")
    if lattice == "TELEPORT":
        params = lat.LatticeParams.from_t(math.tanh(2.0 * r), lat.effective_epsilon(r))
    else:
        params = lat.LatticeParams.from_r(lattice, r)
    steps = []
    for theta_plus, theta_minus in _single_mode_sums(lattice, gate_id, r, parity):
        graph = lat.single_step_graph(params, parity=parity)
        angles = _step_basis(graph, theta_plus, theta_minus)
        if lattice == "QRL":
            steps.append(PlanStep((PlanTrack(graph, angles, out_keep=(0,), in_keep=(0,)),)))
        else:
            steps.append(PlanStep((PlanTrack(graph, angles),)))
    return GatePlan(lattice, gate_id, r, tuple(steps), target_symplectic(gate_id),
                    parity=parity)


QRL_CZ_ANGLES = {
    "A": math.pi / 2 - math.atan(0.5),
    "B": 0.0,
    "C": math.pi / 2 + math.atan(0.5),
    "D": 0.0,
}


def _qrl_compensation_plan(r):
    params = lat.LatticeParams.from_r("QRL", r)
    graph = lat.single_step_graph(params)
    a = math.atan(math.tanh(2.0 * r) ** -2)
    angles = {0: a, 1: a, 2: -a, 3: -a}
    step = PlanStep((PlanTrack(graph, angles, out_keep=(0,), in_keep=(0,)),))
    return GatePlan("QRL", "S_INV_T", r, (step,),
                    sp.squeeze(1.0 / math.tanh(2.0 * r)))


def qrl_cz_plan(r: float) -> GatePlan:
    """Two-step QRL plan: single-step Fourier-CZ coupling, then a squeezing
    compensation step on each computation mode."""
    params = lat.LatticeParams.from_r("QRL", r)
    g1 = lat.single_step_graph(params)
    cz_angles = {0: QRL_CZ_ANGLES["C"], 1: QRL_CZ_ANGLES["B"],
                 2: QRL_CZ_ANGLES["A"], 3: QRL_CZ_ANGLES["D"]}
    # the coupling step redirects both modes: in1 -> B[k+1], in2 -> C[k+N]
    step1 = PlanStep((PlanTrack(g1, cz_angles, out_keep=(1, 0)),))
    a = math.atan(math.tanh(2.0 * r) ** -2)
    comp = {0: a, 1: a, 2: -a, 3: -a}
    step2 = PlanStep((
        PlanTrack(lat.single_step_graph(params), comp, out_keep=(1,), in_keep=(1,)),
        PlanTrack(lat.single_step_graph(params), comp, out_keep=(0,), in_keep=(0,)),
    ))
    n, m = FFCZ_EXPONENTS[("QRL", 0)]
    byproduct = sp.embed(_fourier_power(n), [0], 2) @ sp.embed(_fourier_power(m), [1], 2)
    return GatePlan("QRL", "FFCZ", r, (step1, step2),
                    target_symplectic("FFCZ", (n, m)), byproduct=byproduct)


DBSL_SWAP_FREE_ANGLES = (math.pi / 4, -math.pi / 4, math.pi / 4, -math.pi / 4,
                         0.0, math.pi / 2, math.pi / 2, 0.0, 0.0, math.pi / 2)


def dbsl_swap_plan(r: float) -> GatePlan:
    """Wire swap on the DBSL; the angles are squeezing-independent."""
    params = lat.LatticeParams.from_r("DBSL", r)
    graph = lat.cz_region_graph(params, parity=0)
    angles = graph.full_basis(DBSL_SWAP_FREE_ANGLES)
    byproduct = sp.embed(_fourier_power(1), [0], 2) @ sp.embed(_fourier_power(1), [1], 2)
    return GatePlan("DBSL", "SWAP", r, (PlanStep((PlanTrack(graph, angles),)),),
                    byproduct @ target_symplectic("SWAP"), byproduct=byproduct)


# ------------------------------------------------------------------ CZ cache

def default_table_path() -> Path:
    cache_dir = os.environ.get("CVMBQC_CACHE_DIR")
    if cache_dir:
        return Path(cache_dir) / "cz_basis_table.json"
    return Path(__file__).parent / "data" / "cz_basis_table.json"


def load_basis_table(path: str | Path | None = None) -> dict:
    p = Path(path) if path is not None else default_table_path()
    if not p.exists():
        raise CacheMissError(
            f"no optimized-basis table at {p}; generate one with "
            "`cvmbqc optimize --lattice <L> --db-min <a> --db-max <b> --out <path>`")
    with open(p) as fh:
        return json.load(fh)


def save_basis_table(table: dict, path: str | Path | None = None) -> Path:
    p = Path(path) if path is not None else default_table_path()
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w") as fh:
        json.dump(table, fh, indent=1)
    return p


def _lookup(table, lattice, db, variable_theta_c=False):
    for row in table["entries"]:
        if (row["lattice"] == lattice
                and bool(row.get("variable_theta_c")) == variable_theta_c
                and abs(row["squeezing_db"] - db) < 1e-9
                and row.get("accepted", True)):
            return row
    raise CacheMissError(
        f"no cached CZ basis for {lattice} at {db:g} dB"
        f"{' (variable theta_c)' if variable_theta_c else ''}; run "
        f"`cvmbqc optimize --lattice {lattice} --db-min {db:g} --db-max {db:g}`")


def cz_plan(lattice: str, db: float, parity: int = 0, table: dict | None = None,
            variable_theta_c: bool = False) -> GatePlan:
    """Optimized Fourier-CZ plan from the cached basis table."""
    if lattice == "QRL":
        return qrl_cz_plan(lat.db_to_r(db))
    if table is None:
        table = load_basis_table()
    row = _lookup(table, lattice, db, variable_theta_c)
    r = lat.db_to_r(db)
    params = lat.LatticeParams.from_r(lattice, r)
    theta_c = row.get("theta_c")
    graph = lat.cz_region_graph(params, parity=parity, theta_c=theta_c)
    free = list(row["angles"])
    if parity == 1:
        flips = DBSL_FLIP_POSITIONS if lattice == "DBSL" else (
            BSL_FLIP_POSITIONS if lattice == "BSL" else ())
        for i in flips:
            free[i] = -free[i]
    n, m = FFCZ_EXPONENTS[(lattice, parity)]
    byproduct = sp.embed(_fourier_power(n), [0], 2) @ sp.embed(_fourier_power(m), [1], 2)
    return GatePlan(lattice, "FFCZ", r, (PlanStep((PlanTrack(graph, graph.full_basis(free)),)),),
                    target_symplectic("FFCZ", (n, m)), byproduct=byproduct, parity=parity,
                    expected_residual=row.get("residual"), expected_perr=row.get("perr"))


def iter_catalog(r: float):
    """All closed-form plans at squeezing r (single-mode set, QRL CZ, DBSL swap)."""
    for lattice in ("DBSL", "BSL", "MBSL", "QRL"):
        for gate_id in SINGLE_MODE_GATES:
            yield basis_for(lattice, gate_id, r)
    yield qrl_cz_plan(r)
    yield dbsl_swap_plan(r)
