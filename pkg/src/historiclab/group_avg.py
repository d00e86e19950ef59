"""Averages over group and semigroup actions.

Two actions are covered:

* the ``Z^2`` action ``(m, n) -> g1**m g2**n`` on the torus generated by
  ``A1 = [[2,1],[1,1]]`` and ``A2 = [[1,1],[1,0]]``, averaged over the
  symmetric boxes ``F_n = [-n, n]^2``;
* the semigroup generated by ``g1: theta -> 4 theta`` and
  ``g2: theta -> 6 theta`` on the circle.  Because the generators commute,
  the words of length ``k`` collapse to ``g1**j g2**(k-j)`` with binomial
  multiplicities, so spherical averages carry weights ``C(k, j) / 2**k``.

Circle observables are callables on :class:`CirclePointRational`; torus
observables are callables on :class:`TorusPointExact`.  Every orbit point is
computed exactly; only the observable values are floating point.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import LabError
from .summation import exact_sum
from .systems import (
    A1,
    A2,
    CirclePointRational,
    ToralMatrix,
    TorusPointExact,
    circle_mult_power,
    z2_action_apply,
)

G1_MULT = 4
G2_MULT = 6
NORMALIZATION_DRIFT = 1e-12
DENSE_RESIDUES = 1 << 20  # denominators up to this use a lookup table instead of sorting
WEIGHT_CACHE_MAX = 2048  # larger tables are streamed instead of kept

CircleObservable = Callable[[CirclePointRational], float]


@dataclass(frozen=True)
class TrigPolynomial:
    """``sum_j cos_coeffs[j] cos(2 pi j theta) + sin_coeffs[j] sin(2 pi j theta)``.

    ``cos_coeffs[0]`` is the constant term.  The angle ``j * theta`` is reduced
    mod 1 exactly before conversion to float.
    """

    cos_coeffs: tuple[float, ...] = (0.0, 1.0)
    sin_coeffs: tuple[float, ...] = ()

    @property
    def degree(self) -> int:
        nz = [j for j, c in enumerate(self.cos_coeffs) if c] + [j for j, c in enumerate(self.sin_coeffs) if c]
        return max(nz, default=0)

    @property
    def coefficient_bound(self) -> float:
        """``sum |coefficients|``, an upper bound for the sup norm."""
        return math.fsum(abs(c) for c in self.cos_coeffs) + math.fsum(abs(c) for c in self.sin_coeffs)

    def at(self, theta: Fraction) -> float:
        terms = []
        for j, c in enumerate(self.cos_coeffs):
            if c:
                terms.append(c * math.cos(2.0 * math.pi * float(j * theta % 1)))
        for j, s in enumerate(self.sin_coeffs):
            if s:
                terms.append(s * math.sin(2.0 * math.pi * float(j * theta % 1)))
        return math.fsum(terms)

    def __call__(self, p) -> float:
        return self.at(p.as_fraction() if hasattr(p, "as_fraction") else Fraction(p))

    def sup_norm(self, samples: int = 1 << 16) -> float:
        """Sup norm on a fine grid (a lower estimate, exact at grid maxima)."""
        return max(abs(self.at(Fraction(i, samples))) for i in range(samples))


# ---------------------------------------------------------------------------
# Folner boxes on Z^2


@dataclass(frozen=True)
class FolnerBox:
    """``F_n = [-n, n]^2``."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise LabError("BAD_BOX", "box radius must be >= 0")

    @property
    def cardinality(self) -> int:
        return (2 * self.n + 1) ** 2

    def ranges(self) -> tuple[range, range]:
        r = range(-self.n, self.n + 1)
        return r, r

    def elements(self) -> Iterator[tuple[int, int]]:
        xs, ys = self.ranges()
        for m in xs:
            for k in ys:
                yield m, k

    def contains(self, g: tuple[int, int]) -> bool:
        return abs(g[0]) <= self.n and abs(g[1]) <= self.n


def folner_average(
    p: TorusPointExact,
    observable: Callable[[TorusPointExact], float],
    n: int,
    g1: ToralMatrix = A1,
    g2: ToralMatrix = A2,
) -> float:
    """``(1/|F_n|) sum_{(m,k) in F_n} phi(g1**m g2**k p)``, inverses included.

    Orbit points are tallied and the mean is formed exactly over the
    rationals, so the result is the correctly rounded average.
    """
    box = FolnerBox(n)
    counts: Counter[TorusPointExact] = Counter(z2_action_apply(m, k, p, g1, g2) for m, k in box.elements())
    total = sum(c * Fraction(float(observable(y))) for y, c in counts.items())
    return float(total / box.cardinality)


@dataclass(frozen=True)
class TemperedCheck:
    C: float
    minimal_C: float
    verified_up_to: int
    holds: bool

    def to_dict(self) -> dict:
        return {"C": self.C, "minimal_C": self.minimal_C, "verified_up_to": self.verified_up_to, "holds": self.holds}


def _difference_set(xs: range, ys: range) -> np.ndarray:
    """``{-x + y}`` computed literally."""
    return np.unique(np.add.outer(-np.asarray(xs), np.asarray(ys)))


def tempered_check(up_to: int, C: float, boxes: Callable[[int], FolnerBox] = FolnerBox) -> TemperedCheck:
    """Count ``|U_{0 <= k < n} F_k^{-1} F_n|`` on the lattice for ``1 <= n <= up_to``.

    ``F_k^{-1} F_n`` is the product of the coordinatewise difference sets of
    two boxes; the union over ``k`` is marked on a boolean grid and counted.
    ``minimal_C`` is the largest ratio to ``|F_n|`` met up to the horizon.
    """
    if up_to < 1:
        raise LabError("BAD_HORIZON", "up_to must be >= 1")
    worst = Fraction(0)
    for n in range(1, up_to + 1):
        fn = boxes(n)
        parts = []
        for k in range(n):
            fk = boxes(k)
            (kx, ky), (nx, ny) = fk.ranges(), fn.ranges()
            parts.append((_difference_set(kx, nx), _difference_set(ky, ny)))
        lo_x = min(int(px.min()) for px, _ in parts)
        lo_y = min(int(py.min()) for _, py in parts)
        hi_x = max(int(px.max()) for px, _ in parts)
        hi_y = max(int(py.max()) for _, py in parts)
        grid = np.zeros((hi_x - lo_x + 1, hi_y - lo_y + 1), dtype=bool)
        for px, py in parts:
            grid[np.ix_(px - lo_x, py - lo_y)] = True
        worst = max(worst, Fraction(int(grid.sum()), fn.cardinality))
    minimal = float(worst)
    return TemperedCheck(C, minimal, up_to, worst <= Fraction(C))


# ---------------------------------------------------------------------------
# spherical weights


@dataclass(frozen=True)
class SphericalWeights:
    k: int
    weights: np.ndarray

    @classmethod
    def exact(cls, k: int) -> "SphericalWeights":
        """``C(k, j) / 2**k`` from exact integers (correctly rounded division)."""
        if k < 0:
            raise LabError("BAD_ORDER", "k must be >= 0")
        denom = 1 << k
        return cls(k, np.array([math.comb(k, j) / denom for j in range(k + 1)]))


@lru_cache(maxsize=8)
def _weight_table(kmax: int) -> tuple[SphericalWeights, ...]:
    rows = tuple(_weight_rows(kmax))
    for r in rows:
        r.weights.setflags(write=False)
    return rows


def spherical_weight_rows(kmax: int) -> Iterator[SphericalWeights]:
    """Rows ``k = 0..kmax`` of the binomial weights (cached for moderate ``kmax``)."""
    if kmax <= WEIGHT_CACHE_MAX:
        return iter(_weight_table(kmax))
    return _weight_rows(kmax)


def _weight_rows(kmax: int) -> Iterator[SphericalWeights]:
    """Rows ``k = 0..kmax`` by ``w_{k+1, j} = (w_{k, j-1} + w_{k, j}) / 2``.

    A row is renormalized whenever its sum drifts from 1 by more than 1e-12.
    """
    row = np.array([1.0])
    for k in range(kmax + 1):
        if k:
            nxt = np.empty(k + 1)
            nxt[0], nxt[-1] = 0.5 * row[0], 0.5 * row[-1]
            nxt[1:-1] = 0.5 * (row[:-1] + row[1:])
            total = exact_sum(nxt)
            if abs(total - 1.0) > NORMALIZATION_DRIFT:
                nxt /= total
            row = nxt
        yield SphericalWeights(k, row)


# ---------------------------------------------------------------------------
# semigroup orbit points and averages


class _CircleOrbit:
    """Residues of ``g1**j g2**l theta`` and cached observable values."""

    def __init__(self, theta: CirclePointRational, observable: CircleObservable, g1: int, g2: int):
        self.theta = theta
        self.q = theta.denominator
        self.observable = observable
        self.g1, self.g2 = g1, g2
        self.cache: dict[int, float] = {}
        self.small = self.q < (1 << 31)

    def powers(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        q, num = self.q, self.theta.numerator
        p1 = [pow(self.g1, j, q) for j in range(count)]
        p2 = [pow(self.g2, j, q) * num % q for j in range(count)]
        dtype = np.int64 if self.small else object
        return np.array(p1, dtype=dtype), np.array(p2, dtype=dtype)

    def value(self, r: int) -> float:
        v = self.cache.get(r)
        if v is None:
            v = self.cache[r] = float(self.observable(CirclePointRational.of(r, self.q)))
        return v

    def compress(self, residues: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distinct residues (sorted) and the index of each entry among them."""
        if self.small and self.q <= max(DENSE_RESIDUES, 4 * residues.size):
            flat = residues.ravel().astype(np.int64)
            uniq = np.flatnonzero(np.bincount(flat, minlength=self.q))
            position = np.zeros(self.q, dtype=np.int64)
            position[uniq] = np.arange(uniq.size)
            return uniq, position[flat].reshape(residues.shape)
        uniq, inverse = np.unique(residues, return_inverse=True)
        return uniq, inverse.reshape(residues.shape)

    def values(self, residues: np.ndarray) -> np.ndarray:
        uniq, inverse = self.compress(residues)
        vals = np.array([self.value(int(r)) for r in uniq])
        return vals[inverse]


def _orbit(theta, observable, g1, g2) -> _CircleOrbit:
    if not isinstance(theta, CirclePointRational):
        theta = CirclePointRational.of(Fraction(theta))
    return _CircleOrbit(theta, observable, g1, g2)


def spherical_average(theta, observable: CircleObservable, k: int, g1: int = G1_MULT, g2: int = G2_MULT) -> float:
    """``s_k = sum_j C(k, j) 2**-k phi(g1**j g2**(k-j) theta)``."""
    if k < 0:
        raise LabError("BAD_ORDER", "k must be >= 0")
    orb = _orbit(theta, observable, g1, g2)
    p1, p2 = orb.powers(k + 1)
    residues = p1 * p2[::-1] % orb.q
    w = SphericalWeights.exact(k).weights
    return exact_sum(w * orb.values(residues))


def spherical_trace(theta, observable: CircleObservable, n: int, g1: int = G1_MULT, g2: int = G2_MULT) -> np.ndarray:
    """``[s_0, ..., s_{n-1}]`` with weights streamed by the binomial row recurrence."""
    if n < 1:
        raise LabError("BAD_HORIZON", "n must be >= 1")
    orb = _orbit(theta, observable, g1, g2)
    p1, p2 = orb.powers(n)
    # values[j, l] = phi(g1**j g2**l theta); row k reads the antidiagonal j + l = k
    flipped = orb.values(np.multiply.outer(p1, p2) % orb.q)[:, ::-1]
    out = np.empty(n)
    for row in spherical_weight_rows(n - 1):
        k = row.k
        out[k] = exact_sum(row.weights * np.diagonal(flipped, offset=n - 1 - k))
    return out


def cesaro_spherical(theta, observable: CircleObservable, n: int, g1: int = G1_MULT, g2: int = G2_MULT) -> float:
    """``Phi_n = (1/n) sum_{k<n} s_k``."""
    return exact_sum(spherical_trace(theta, observable, n, g1, g2)) / n


def cesaro_spherical_trace(theta, observable: CircleObservable, n: int, g1: int = G1_MULT, g2: int = G2_MULT) -> np.ndarray:
    """``[Phi_1, ..., Phi_n]``."""
    s = spherical_trace(theta, observable, n, g1, g2)
    totals = np.array([exact_sum(s[: i + 1]) for i in range(n)])
    return totals / np.arange(1, n + 1)


def double_average_psi(theta, observable: CircleObservable, n: int, g1: int = G1_MULT, g2: int = G2_MULT) -> float:
    """``Psi_n = (1/n**2) sum_{k, l < n} phi(g1**k g2**l theta)``.

    The ``n**2`` orbit points are tallied by residue, so the double sum is
    a short exact-count sum over distinct points.
    """
    if n < 1:
        raise LabError("BAD_HORIZON", "n must be >= 1")
    orb = _orbit(theta, observable, g1, g2)
    p1, p2 = orb.powers(n)
    uniq, inverse = orb.compress(np.multiply.outer(p1, p2) % orb.q)
    counts = np.bincount(inverse.ravel(), minlength=uniq.size)
    vals = [orb.value(int(r)) for r in uniq]
    return exact_sum(c * v for c, v in zip(counts.tolist(), vals)) / (n * n)


def psi_trace(theta, observable: CircleObservable, n_max: int, g1: int = G1_MULT, g2: int = G2_MULT):
    """``(Psi_n, visited sup |phi|)`` for ``n = 1..n_max``, grown one row and column at a time."""
    if n_max < 1:
        raise LabError("BAD_HORIZON", "n_max must be >= 1")
    orb = _orbit(theta, observable, g1, g2)
    p1, p2 = orb.powers(n_max)
    uniq, inverse = orb.compress(np.multiply.outer(p1, p2) % orb.q)
    vals = np.array([orb.value(int(r)) for r in uniq])
    counts = np.zeros(uniq.size, dtype=np.int64)
    psi = np.empty(n_max)
    sup = np.empty(n_max)
    seen_max = 0.0
    for n in range(1, n_max + 1):
        new = np.concatenate([inverse[n - 1, :n], inverse[: n - 1, n - 1]])
        counts += np.bincount(new, minlength=uniq.size)
        seen_max = max(seen_max, float(np.max(np.abs(vals[new]))))
        hit = np.flatnonzero(counts)
        psi[n - 1] = exact_sum(counts[hit].astype(np.float64) * vals[hit]) / (n * n)
        sup[n - 1] = seen_max
    return psi, sup


# ---------------------------------------------------------------------------
# pre-orbits of the common fixed point and the Psi error bound


@dataclass(frozen=True)
class PreOrbitWitness:
    """``g1**a g2**b theta = target`` (checked exactly on construction)."""

    theta: CirclePointRational
    a: int
    b: int
    target: CirclePointRational
    g1: int = G1_MULT
    g2: int = G2_MULT

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise LabError("BAD_WITNESS", "exponents must be >= 0")
        image = circle_mult_power(self.g1, self.a, circle_mult_power(self.g2, self.b, self.theta))
        if image != self.target:
            raise LabError("BAD_WITNESS", f"g1^{self.a} g2^{self.b} ({self.theta}) = {image}, not {self.target}")

    def to_dict(self) -> dict:
        return {"theta": str(self.theta), "a": self.a, "b": self.b, "target": str(self.target)}


def preorbit_construct(target: CirclePointRational, a: int, b: int, branch: int = 0, g1: int = G1_MULT, g2: int = G2_MULT) -> PreOrbitWitness:
    """Solve ``g1**a g2**b theta = target``: ``theta = (target + branch) / (g1**a g2**b)``.

    ``branch`` ranges over ``0 .. g1**a g2**b - 1``; branch 0 is the smallest
    non-negative solution.
    """
    if a < 0 or b < 0:
        raise LabError("BAD_WITNESS", "exponents must be >= 0")
    degree = g1**a * g2**b
    if not 0 <= branch < degree:
        raise LabError("BAD_BRANCH", f"branch must lie in [0, {degree})")
    theta = (target.as_fraction() + branch) / degree
    return PreOrbitWitness(CirclePointRational.of(theta.numerator, theta.denominator), a, b, target, g1, g2)


@dataclass(frozen=True)
class PsiBoundCheck:
    n: int
    lhs: float
    bound: float
    holds: bool


def _psi_row(w: PreOrbitWitness, n: int, psi: float, phi_target: float, sup_norm: float) -> PsiBoundCheck:
    main = (n - w.a) * (n - w.b) / (n * n) * phi_target
    lhs = abs(psi - main)
    bound = (w.a + w.b) / n * sup_norm
    return PsiBoundCheck(n, lhs, bound, lhs <= bound + 1e-12)


def psi_error_bound_check(w: PreOrbitWitness, observable: CircleObservable, n: int, sup_norm: float | None = None) -> PsiBoundCheck:
    """``|Psi_n(theta) - (n-a)(n-b)/n**2 phi(target)| <= (a+b)/n ||phi||``.

    Without ``sup_norm`` the norm is the max of ``|phi|`` over the ``n**2``
    visited points, which contain every point entering the sum.
    """
    if n <= max(w.a, w.b):
        raise LabError("HORIZON_TOO_SMALL", f"n = {n} must exceed max(a, b) = {max(w.a, w.b)}")
    psi_all, sup_all = psi_trace(w.theta, observable, n, w.g1, w.g2)
    norm = sup_all[-1] if sup_norm is None else sup_norm
    return _psi_row(w, n, float(psi_all[-1]), float(observable(w.target)), norm)


def psi_bound_rows(
    w: PreOrbitWitness,
    observable: CircleObservable,
    n_values: Sequence[int],
    sup_norm: float | None = None,
) -> list[PsiBoundCheck]:
    """:func:`psi_error_bound_check` for many horizons from one incremental trace."""
    n_values = list(n_values)
    for n in n_values:
        if n <= max(w.a, w.b):
            raise LabError("HORIZON_TOO_SMALL", f"n = {n} must exceed max(a, b) = {max(w.a, w.b)}")
    psi, sup = psi_trace(w.theta, observable, max(n_values), w.g1, w.g2)
    phi_target = float(observable(w.target))
    return [_psi_row(w, n, float(psi[n - 1]), phi_target, sup[n - 1] if sup_norm is None else sup_norm) for n in n_values]
