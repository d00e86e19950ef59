"""Empirical sensitivity of average sequences, orbit-density diagnostics, and
the rigid/sensitive dichotomy for mixing SFTs.

Dense sets are replaced by finite :class:`SampleNet` objects carrying a
declared mesh, and the "for every pair" quantifier becomes a minimum over
pairs.  A net point whose orbit passes :func:`orbit_density` is only
"diagnostic-passed": a finite orbit can never certify transitivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .avg_core import OscillationReport, birkhoff_partial_averages, oscillation_report
from .errors import LabError
from .symbolic import (
    RigidityResult,
    TransitionMatrix,
    Verdict,
    WindowObservable,
    Word,
    format_word,
    rigidity_test,
)


class Provenance(Enum):
    GRID = "GRID"
    ORBIT_SEGMENT = "ORBIT_SEGMENT"
    PREIMAGE_TREE = "PREIMAGE_TREE"
    USER = "USER"


class Pairing(Enum):
    ALL_PAIRS = "ALL_PAIRS"
    DIAGONAL = "DIAGONAL"


@dataclass(frozen=True)
class SampleNet:
    points: tuple
    mesh: float
    provenance: Provenance = Provenance.USER

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if not self.points:
            raise LabError("DOMAIN_EMPTY", "a sample net needs at least one point")
        if not self.mesh > 0:
            raise LabError("BAD_MESH", "mesh must be positive")


@dataclass(frozen=True)
class Witness:
    a_point: object
    b_point: object
    r_a: float
    r_b: float


@dataclass(frozen=True)
class SensitivityVerdict:
    sensitive: bool
    epsilon_est: float
    witness: Witness | None
    horizon: int
    cluster_tol: float
    mesh_a: float = 0.0
    mesh_b: float = 0.0
    pairing: Pairing = Pairing.ALL_PAIRS

    def to_dict(self, describe: Callable[[object], object] = str) -> dict:
        wit = None
        if self.witness is not None:
            wit = {
                "a_point": describe(self.witness.a_point),
                "b_point": describe(self.witness.b_point),
                "r_a": self.witness.r_a,
                "r_b": self.witness.r_b,
            }
        return {
            "sensitive": self.sensitive,
            "epsilon_est": self.epsilon_est,
            "witness": wit,
            "horizon": self.horizon,
            "cluster_tol": self.cluster_tol,
            "mesh_a": self.mesh_a,
            "mesh_b": self.mesh_b,
            "pairing": self.pairing.value,
        }


def _widest_pair(ra: OscillationReport, rb: OscillationReport) -> tuple[float, float, float]:
    best = (-1.0, 0.0, 0.0)
    for ca in ra.clusters:
        for cb in rb.clusters:
            d = abs(ca.center - cb.center)
            if d > best[0]:
                best = (d, ca.center, cb.center)
    return best


def sensitivity_test(
    netA: SampleNet,
    netB: SampleNet,
    average_trace: Callable[[object], OscillationReport],
    pairing: Pairing | str = Pairing.ALL_PAIRS,
) -> SensitivityVerdict:
    """Estimate the sensitivity gap between two nets.

    For a pair ``(a, b)`` the gap is the largest distance between a tail
    cluster of ``a`` and one of ``b``; ``epsilon_est`` is the smallest such gap
    over the required pairs and the minimizing pair is the witness.
    ``ALL_PAIRS`` uses ``netA x netB``; ``DIAGONAL`` pairs every point of
    ``netA`` with itself (``netB`` is then ignored), which measures the
    internal spread of each point's cluster set.  The verdict is sensitive only
    when ``epsilon_est > 2 * cluster_tol``.
    """
    pairing = Pairing(pairing)
    reports_a = [average_trace(p) for p in netA.points]
    reports_b = reports_a if pairing is Pairing.DIAGONAL else [average_trace(p) for p in netB.points]
    all_reports = reports_a + reports_b
    horizon, tol = all_reports[0].horizon, all_reports[0].cluster_tol
    if any(r.horizon != horizon or r.cluster_tol != tol for r in all_reports):
        raise LabError("TRACE_MISMATCH", "reports differ in horizon or cluster tolerance")

    if pairing is Pairing.DIAGONAL:
        pairs = [(i, i) for i in range(len(reports_a))]
    else:
        pairs = [(i, j) for i in range(len(reports_a)) for j in range(len(reports_b))]
    best = None
    for i, j in pairs:
        gap, ra, rb = _widest_pair(reports_a[i], reports_b[j])
        if best is None or gap < best[0]:
            best = (gap, i, j, ra, rb)
    gap, i, j, ra, rb = best
    sensitive = gap > 2 * tol
    b_points = netA.points if pairing is Pairing.DIAGONAL else netB.points
    witness = Witness(netA.points[i], b_points[j], ra, rb)
    return SensitivityVerdict(
        sensitive=sensitive,
        epsilon_est=gap,
        witness=witness if sensitive else None,
        horizon=horizon,
        cluster_tol=tol,
        mesh_a=netA.mesh,
        mesh_b=(netA if pairing is Pairing.DIAGONAL else netB).mesh,
        pairing=pairing,
    )


# ---------------------------------------------------------------------------
# orbit density


@dataclass(frozen=True)
class OrbitDensityDiagnostic:
    covered_fraction: float
    resolution: float
    orbit_length: int
    cells: int = 0
    visited: frozenset = field(default=frozenset(), repr=False)

    def to_dict(self) -> dict:
        return {
            "covered_fraction": self.covered_fraction,
            "resolution": self.resolution,
            "orbit_length": self.orbit_length,
            "cells": self.cells,
            "status": "diagnostic-passed" if self.covered_fraction >= 1.0 else "diagnostic-incomplete",
        }


def orbit_density(orbit_points, resolution: float, box: Sequence[tuple] | None = None) -> OrbitDensityDiagnostic:
    """Fraction of cells of side ``resolution`` visited by the orbit.

    ``box`` is a list of ``(lo, hi)`` pairs, one per coordinate (default: the
    unit cube).  Cells touching the upper face absorb points lying on it.
    Exact coordinates (``Fraction``) are binned exactly.
    """
    if not resolution > 0:
        raise LabError("BAD_RESOLUTION", "resolution must be positive")
    pts = list(orbit_points)
    if not pts:
        raise LabError("DOMAIN_EMPTY", "empty orbit")
    dim = len(pts[0]) if isinstance(pts[0], (tuple, list, np.ndarray)) else 1
    box = list(box) if box is not None else [(0, 1)] * dim
    shape = [max(1, math.ceil((hi - lo) / resolution)) for lo, hi in box]
    visited = set()
    for p in pts:
        coords = tuple(p) if dim > 1 else (p,)
        cell = []
        for c, (lo, hi), n in zip(coords, box, shape):
            if not lo <= c <= hi:
                raise LabError("OUT_OF_BOX", f"point {p!r} lies outside the box")
            cell.append(min(math.floor((c - lo) / resolution), n - 1))
        visited.add(tuple(cell))
    cells = math.prod(shape)
    return OrbitDensityDiagnostic(len(visited) / cells, resolution, len(pts), cells, frozenset(visited))


def cylinder_density(symbols, depth: int, alphabet_size: int = 2) -> OrbitDensityDiagnostic:
    """Fraction of depth-``depth`` cylinders met by the shifts of a symbol sequence."""
    s = np.asarray(symbols, dtype=np.int64)
    n = s.size - depth + 1
    if depth < 1 or n < 1:
        raise LabError("DOMAIN_EMPTY", "sequence shorter than the cylinder depth")
    codes = np.zeros(n, dtype=np.int64)
    for j in range(depth):
        codes = codes * alphabet_size + s[j:j + n]
    seen = np.unique(codes)
    cells = alphabet_size**depth
    return OrbitDensityDiagnostic(seen.size / cells, float(alphabet_size) ** -depth, n, cells)


# ---------------------------------------------------------------------------
# rigid / sensitive dichotomy on mixing SFTs


def periodic_trace(cycle: Word, observable: WindowObservable, horizon: int, cluster_tol: float, tail_fraction: float = 0.25) -> OscillationReport:
    """Birkhoff averages of a periodic point sampled at whole periods ``n = k * period``.

    Along these times the averages equal the periodic average up to rounding,
    so the single accumulation value is recovered without a ``period / n`` bias.
    """
    one_period = observable.cyclic_values(cycle)
    period = len(cycle)
    averages = birkhoff_partial_averages(np.tile(one_period, horizon))[period - 1::period]
    return oscillation_report(averages, tail_fraction, cluster_tol)


class Branch(Enum):
    RIGID_NO_IRREGULARITY_INDICATED = "RIGID_NO_IRREGULARITY_INDICATED"
    SENSITIVE = "SENSITIVE"


@dataclass(frozen=True)
class DichotomyReport:
    branch: Branch
    rigidity: RigidityResult
    sensitivity: SensitivityVerdict | None
    max_period: int
    horizon: int
    tol: float

    @property
    def witness_gap(self) -> float | None:
        return None if self.sensitivity is None else self.sensitivity.epsilon_est

    def to_dict(self, alphabet_size: int = 2) -> dict:
        return {
            "branch": self.branch.value,
            "rigidity": self.rigidity.to_dict(alphabet_size),
            "sensitivity": None
            if self.sensitivity is None
            else self.sensitivity.to_dict(lambda w: format_word(w, alphabet_size)),
            "max_period": self.max_period,
            "horizon": self.horizon,
            "tol": self.tol,
        }


def dichotomy_report(
    sft: TransitionMatrix,
    observable: WindowObservable,
    max_period: int = 6,
    horizon: int = 64,
    tol: float = 1e-9,
) -> DichotomyReport:
    """Either all periodic averages agree (rigid) or two periodic points witness sensitivity.

    ``rigidity_test`` runs at ``tol``; on NON_RIGID the two extremal cycles
    become one-point nets and :func:`sensitivity_test` runs with cluster
    tolerance ``tol / 2``.  Since the witness spread exceeds ``tol``, the
    sensitivity threshold ``2 * (tol / 2)`` is always met, so the two branches
    are exclusive and exhaustive by construction.
    """
    if not sft.mixing:
        raise LabError("NOT_MIXING", "the dichotomy is only run on mixing SFTs")
    rigidity = rigidity_test(sft, observable, max_period, tol)
    if rigidity.verdict is Verdict.RIGID:
        return DichotomyReport(Branch.RIGID_NO_IRREGULARITY_INDICATED, rigidity, None, max_period, horizon, tol)
    low, high = rigidity.witness
    verdict = sensitivity_test(
        SampleNet([low], mesh=1.0, provenance=Provenance.USER),
        SampleNet([high], mesh=1.0, provenance=Provenance.USER),
        lambda c: periodic_trace(c, observable, horizon, tol / 2),
    )
    if not verdict.sensitive:
        raise LabError("INCONSISTENT", "non-rigid periodic data failed the sensitivity threshold")
    return DichotomyReport(Branch.SENSITIVE, rigidity, verdict, max_period, horizon, tol)
