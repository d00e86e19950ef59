"""Partial averages and the finite-horizon oscillation quantities built on them.

Every asymptotic quantity is replaced by a declared finite surrogate:

* ``liminf`` / ``limsup`` of an average sequence -> min / max over a tail
  window holding the last ``ceil(tail_fraction * H)`` entries;
* the accumulation set of the averages -> single-linkage clusters of the tail
  values at radius ``cluster_tol``;
* weak* limits of empirical measures -> clusters of histogram snapshots in
  total variation.

A gap above a threshold at horizon ``H`` is an *indication* of irregular
behavior, never a proof.  Likewise the bounds from
:func:`transitive_bounds_estimate` range over finitely many sampled orbits:
``lstar_est`` is an upper estimate of the infimum over all transitive points
and ``Lstar_est`` a lower estimate of the supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import LabError
from .summation import exact_sum, split_cumsum

DEFAULT_TAIL_FRACTION = 0.25
DEFAULT_CLUSTER_TOL = 0.01


@dataclass(frozen=True)
class ObservableSeq:
    """Observable values ``phi_1(y), ..., phi_H(y)`` along one orbit."""

    values: np.ndarray
    bound: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size < 1:
            raise LabError("DOMAIN_EMPTY", "an observable sequence needs H >= 1")
        if np.any(np.abs(values) > self.bound):
            raise LabError("OUT_OF_BOUND", f"values exceed the admitted bound {self.bound}")
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class Cluster:
    center: float
    weight: int


@dataclass(frozen=True)
class OscillationReport:
    horizon: int
    partial_averages: np.ndarray = field(repr=False)
    liminf_est: float
    limsup_est: float
    gap: float
    tail_fraction: float
    clusters: tuple[Cluster, ...]
    cluster_tol: float

    def to_dict(self, include_averages: bool = True) -> dict:
        out = {"horizon": self.horizon}
        if include_averages:
            out["partial_averages"] = [float(v) for v in self.partial_averages]
        out.update(
            liminf_est=self.liminf_est,
            limsup_est=self.limsup_est,
            gap=self.gap,
            tail_fraction=self.tail_fraction,
            clusters=[{"center": c.center, "weight": c.weight} for c in self.clusters],
        )
        return out


@dataclass(frozen=True)
class LambdaProbe:
    N: int
    eta: float
    violated: bool
    violation_pair: tuple[int, int] | None = None

    def to_dict(self) -> dict:
        pair = list(self.violation_pair) if self.violation_pair else None
        return {"N": self.N, "eta": self.eta, "violated": self.violated, "violation_pair": pair}


class Membership(Enum):
    IN_LEVEL_SET = "IN_LEVEL_SET"
    IN_HAT_LEVEL_SET = "IN_HAT_LEVEL_SET"
    OUTSIDE = "OUTSIDE"


@dataclass(frozen=True)
class LevelSetClassification:
    alpha: float
    beta: float
    membership: Membership
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "membership": self.membership.value,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box ``[lo, hi]`` cut into ``shape`` equal cells per axis.

    Cells are half open except the last one along each axis, which also
    contains the upper face, so a closed box such as ``[0, 1]`` is covered.
    """

    lo: tuple
    hi: tuple
    shape: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.shape)):
            raise LabError("BAD_GRID", "lo, hi and shape must have equal length")
        if any(h <= l for l, h in zip(self.lo, self.hi)) or any(s < 1 for s in self.shape):
            raise LabError("BAD_GRID", "empty grid box")

    @classmethod
    def interval(cls, lo, hi, bins: int) -> "Grid":
        return cls((lo,), (hi,), (bins,))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def cell_of(self, point) -> int:
        """Flat (row-major) cell index; exact for ``Fraction`` coordinates."""
        coords = (point,) if self.dim == 1 and not isinstance(point, (tuple, list, np.ndarray)) else tuple(point)
        if len(coords) != self.dim:
            raise LabError("OUT_OF_BOX", f"point {point!r} has the wrong dimension")
        flat = 0
        for c, lo, hi, bins in zip(coords, self.lo, self.hi, self.shape):
            if not (lo <= c <= hi):
                raise LabError("OUT_OF_BOX", f"point {point!r} lies outside the grid box")
            k = min(math.floor((c - lo) * bins / (hi - lo)), bins - 1)
            flat = flat * bins + k
        return flat

    def cells_of_array(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(len(points), self.dim)
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if np.any(pts < lo) or np.any(pts > hi) or not np.all(np.isfinite(pts)):
            raise LabError("OUT_OF_BOX", "some points lie outside the grid box")
        shape = np.asarray(self.shape)
        idx = np.minimum(np.floor((pts - lo) * shape / (hi - lo)).astype(np.int64), shape - 1)
        return np.ravel_multi_index(idx.T, self.shape)

    def to_dict(self) -> dict:
        return {"lo": [_num(v) for v in self.lo], "hi": [_num(v) for v in self.hi], "shape": list(self.shape)}


def _num(v):
    return str(v) if isinstance(v, Fraction) else float(v)


@dataclass(frozen=True)
class EmpiricalMeasure:
    bins: int
    weights: np.ndarray
    support_box: Grid

    def to_dict(self) -> dict:
        return {
            "bins": self.bins,
            "weights": [float(w) for w in self.weights],
            "support_box": self.support_box.to_dict(),
        }


@dataclass(frozen=True)
class TransitiveBoundsEstimate:
    lstar_est: float
    Lstar_est: float
    sample_orbits: int

    def to_dict(self) -> dict:
        return {"lstar_est": self.lstar_est, "Lstar_est": self.Lstar_est, "sample_orbits": self.sample_orbits}


def birkhoff_partial_averages(orbit_values: Sequence[float], horizon: int | None = None) -> np.ndarray:
    """Return ``avg[n-1] = (1/n) * sum(orbit_values[:n])`` for ``n = 1..horizon``.

    Running totals of the deviations from ``orbit_values[0]`` use
    :func:`~historiclab.summation.split_cumsum`, which keeps the error far
    below the ~1e-3 gaps of interest up to horizons of 2**24; constant
    sequences are reproduced exactly.
    """
    values = np.asarray(orbit_values, dtype=np.float64)
    if values.size == 0:
        raise LabError("DOMAIN_EMPTY", "no orbit values")
    if horizon is None:
        horizon = values.size
    if horizon < 1 or horizon > values.size:
        raise LabError("BAD_HORIZON", f"horizon {horizon} outside [1, {values.size}]")
    x = values[:horizon]
    # average the deviations from the first value; two-sum keeps the subtraction exact,
    # and a constant sequence comes back exactly
    c = x[0]
    d = x - c
    back = d - x
    residual = (x - (d - back)) + (-c - back)
    totals = split_cumsum(d) + split_cumsum(residual)
    return c + totals / np.arange(1, horizon + 1, dtype=np.float64)


def _tail(averages, tail_fraction: float) -> np.ndarray:
    avg = np.asarray(averages, dtype=np.float64)
    if not 0.0 < tail_fraction <= 1.0:
        raise LabError("BAD_TAIL", f"tail_fraction {tail_fraction} not in (0, 1]")
    width = math.ceil(tail_fraction * avg.size)
    if width < 1:
        raise LabError("DOMAIN_EMPTY", "tail window is empty")
    return avg[avg.size - width:]


def cluster_values(values, tol: float) -> tuple[Cluster, ...]:
    """Single-linkage clusters of real values at radius ``tol``, by increasing center."""
    if tol <= 0:
        raise LabError("BAD_TOLERANCE", "cluster tolerance must be positive")
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        raise LabError("DOMAIN_EMPTY", "nothing to cluster")
    cuts = np.flatnonzero(np.diff(ordered) > tol) + 1
    clusters = []
    for chunk in np.split(ordered, cuts):
        center = exact_sum(chunk) / chunk.size
        # the mean of a chunk can round one ulp past its extremes
        center = min(max(center, float(chunk[0])), float(chunk[-1]))
        clusters.append(Cluster(center, int(chunk.size)))
    return tuple(clusters)


def oscillation_report(
    averages: Sequence[float],
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> OscillationReport:
    avg = np.asarray(averages, dtype=np.float64)
    tail = _tail(avg, tail_fraction)
    lo, hi = float(tail.min()), float(tail.max())
    return OscillationReport(
        horizon=int(avg.size),
        partial_averages=avg,
        liminf_est=lo,
        limsup_est=hi,
        gap=hi - lo,
        tail_fraction=tail_fraction,
        clusters=cluster_values(tail, cluster_tol),
        cluster_tol=cluster_tol,
    )


def indicates_irregularity(report: OscillationReport, threshold: float) -> bool:
    """Finite-horizon indication (not proof) that the averages do not converge."""
    return report.gap > threshold


def lambda_probe(averages: Sequence[float], N: int, eta: float) -> LambdaProbe:
    """Check whether the averages are ``eta``-Cauchy from index ``N`` on.

    Indices are 1-based (``averages[0]`` is the average at ``n = 1``).  A
    violation is reported with the lexicographically first pair ``(n, m)``,
    ``N <= n < m <= H``, such that ``|avg(n) - avg(m)| > eta``.
    """
    avg = np.asarray(averages, dtype=np.float64)
    if eta <= 0:
        raise LabError("BAD_TOLERANCE", "eta must be positive")
    if N < 1 or N > avg.size:
        raise LabError("BAD_WINDOW", f"N = {N} outside [1, {avg.size}]")
    window = avg[N - 1:]
    if float(window.max() - window.min()) <= eta:
        return LambdaProbe(N, eta, False, None)
    # suffix extremes over strictly later indices
    suffix_max = np.maximum.accumulate(window[::-1])[::-1]
    suffix_min = np.minimum.accumulate(window[::-1])[::-1]
    later_max = np.append(suffix_max[1:], -np.inf)
    later_min = np.append(suffix_min[1:], np.inf)
    bad = (later_max - window > eta) | (window - later_min > eta)
    i = int(np.argmax(bad))
    j = i + 1 + int(np.argmax(np.abs(window[i + 1:] - window[i]) > eta))
    return LambdaProbe(N, eta, True, (N + i, N + j))


def classify_level_set(report: OscillationReport, alpha: float, beta: float, tol: float) -> LevelSetClassification:
    if alpha > beta:
        raise LabError("BAD_INTERVAL", f"alpha {alpha} > beta {beta}")
    if tol <= 0:
        raise LabError("BAD_TOLERANCE", "tol must be positive")
    lo, hi = report.liminf_est, report.limsup_est
    if abs(lo - alpha) <= tol and abs(hi - beta) <= tol:
        membership = Membership.IN_LEVEL_SET
    elif lo <= alpha + tol and hi >= beta - tol:
        membership = Membership.IN_HAT_LEVEL_SET
    else:
        membership = Membership.OUTSIDE
    return LevelSetClassification(alpha, beta, membership, tol)


def empirical_measure(orbit_points, binning: Grid) -> EmpiricalMeasure:
    """Histogram of orbit points on ``binning``; weight of a cell = hits / points.

    Float arrays are binned vectorially; any other sequence (for instance of
    :class:`fractions.Fraction` or objects convertible to ``Fraction``) is
    binned point by point in exact arithmetic.
    """
    if isinstance(orbit_points, np.ndarray) and orbit_points.dtype.kind == "f":
        if orbit_points.shape[0] == 0:
            raise LabError("DOMAIN_EMPTY", "empty orbit")
        cells = binning.cells_of_array(orbit_points)
    else:
        pts = [_exact(p) for p in orbit_points]
        if not pts:
            raise LabError("DOMAIN_EMPTY", "empty orbit")
        cells = np.fromiter((binning.cell_of(p) for p in pts), dtype=np.int64, count=len(pts))
    counts = np.bincount(cells, minlength=binning.size)
    return EmpiricalMeasure(binning.size, counts / cells.size, binning)


def _exact(p):
    if isinstance(p, (tuple, list)):
        return tuple(_exact(c) for c in p)
    if hasattr(p, "as_fraction"):
        return p.as_fraction()
    return p


def total_variation(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    if mu.support_box != nu.support_box:
        raise LabError("BIN_MISMATCH", "measures live on different grids")
    return 0.5 * exact_sum(np.abs(mu.weights - nu.weights))


def vT_cluster_report(snapshots: Sequence[EmpiricalMeasure], tol: float) -> list[EmpiricalMeasure]:
    """One representative (earliest snapshot) per single-linkage TV cluster.

    Two or more representatives are the finite-resolution stand-in for an
    orbit whose empirical measures have more than one weak* limit.
    """
    if tol <= 0:
        raise LabError("BAD_TOLERANCE", "tol must be positive")
    if not snapshots:
        raise LabError("DOMAIN_EMPTY", "no snapshots")
    grid = snapshots[0].support_box
    if any(s.support_box != grid for s in snapshots):
        raise LabError("BIN_MISMATCH", "snapshots do not share a binning")
    parent = list(range(len(snapshots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(snapshots)):
        for j in range(i + 1, len(snapshots)):
            if total_variation(snapshots[i], snapshots[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(len(snapshots))})
    return [snapshots[r] for r in roots]


def transitive_bounds_estimate(reports: Sequence[OscillationReport]) -> TransitiveBoundsEstimate:
    if not reports:
        raise LabError("DOMAIN_EMPTY", "no reports")
    return TransitiveBoundsEstimate(
        lstar_est=min(r.liminf_est for r in reports),
        Lstar_est=max(r.limsup_est for r in reports),
        sample_orbits=len(reports),
    )
