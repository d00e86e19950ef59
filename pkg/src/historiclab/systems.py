"""Concrete systems: expanding circle maps, Kan's skew product, toral automorphisms.

Hyperbolic maps (``x -> k x`` on the circle, linear Anosov maps of the torus)
are only iterated on rational points in exact integer arithmetic.  Floating
point toral orbits are refused past :data:`MAX_FLOAT_ANOSOV_STEPS` because
roundoff is amplified by the expansion and the computed orbit stops
shadowing the true one.  Kan's map runs in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import LabError
from .rng import SplitMix64

MAX_FLOAT_ANOSOV_STEPS = 50
KAN_THRESHOLDS = (0.01, 0.99)
KAN_MAX_ITER = 100_000


# ---------------------------------------------------------------------------
# circle


@dataclass(frozen=True)
class CirclePointRational:
    """The point ``numerator / denominator`` of ``R/Z`` in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator < 1 or not 0 <= self.numerator < self.denominator:
            raise LabError("BAD_POINT", f"{self.numerator}/{self.denominator} is not reduced into [0, 1)")
        if math.gcd(self.numerator, self.denominator) != 1:
            raise LabError("BAD_POINT", f"{self.numerator}/{self.denominator} is not in lowest terms")

    @classmethod
    def of(cls, numerator: int, denominator: int = 1) -> "CirclePointRational":
        """Reduce any rational mod 1."""
        f = Fraction(numerator, denominator)
        f -= math.floor(f)
        return cls(f.numerator, f.denominator)

    @classmethod
    def parse(cls, text: str) -> "CirclePointRational":
        return cls.of(Fraction(text.strip()))

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def circle_mult(k: int, p: CirclePointRational) -> CirclePointRational:
    """``theta -> k * theta mod 1``; for ``k = 4`` this is ``z -> z**4`` on the unit circle."""
    return CirclePointRational.of(k * p.numerator % p.denominator, p.denominator)


def circle_mult_power(k: int, e: int, p: CirclePointRational) -> CirclePointRational:
    """``e``-fold iterate of :func:`circle_mult` by modular exponentiation."""
    if e < 0:
        raise LabError("BAD_EXPONENT", "circle maps are not invertible")
    return CirclePointRational.of(pow(k, e, p.denominator) * p.numerator % p.denominator, p.denominator)


def circle_rotation_orbit(theta: float, alpha: float, n: int) -> np.ndarray:
    """Float orbit of the rotation ``theta -> theta + alpha mod 1`` (an isometry, so roundoff stays bounded)."""
    return np.mod(theta + alpha * np.arange(n, dtype=np.float64), 1.0)


def reciprocal_orbit(length: int, start: int = 1) -> list[Fraction]:
    """Orbit ``1/start, 1/(start+1), ...`` of ``T(1/n) = 1/(n+1)``, ``T(0) = 0`` on ``{1/n} U {0}``."""
    return [Fraction(1, start + i) for i in range(length)]


# ---------------------------------------------------------------------------
# Kan's skew product on the annulus


@dataclass(frozen=True)
class KanState:
    x: float
    t: float

    def __post_init__(self):
        if not (0.0 <= self.x < 1.0 and 0.0 <= self.t <= 1.0):
            raise LabError("BAD_STATE", f"({self.x}, {self.t}) is outside [0,1) x [0,1]")


def kan_step(s: KanState) -> KanState:
    """``(x, t) -> (3x mod 1, t + t(1-t)/32 * cos(2 pi x))``; both boundary circles are invariant."""
    t = s.t + s.t * (1.0 - s.t) / 32.0 * math.cos(2.0 * math.pi * s.x)
    return KanState((3.0 * s.x) % 1.0, t)


def kan_step_arrays(x: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`kan_step` with the same operation order."""
    t = t + t * (1.0 - t) / 32.0 * np.cos(2.0 * np.pi * x)
    return np.mod(3.0 * x, 1.0), t


class Basin(Enum):
    B0 = "B0"
    B1 = "B1"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class BasinLabel:
    label: Basin
    iterations_used: int


def _check_thresholds(thresholds) -> tuple[float, float]:
    low, high = thresholds
    if not 0.0 < low < high < 1.0:
        raise LabError("BAD_THRESHOLDS", f"need 0 < low < high < 1, got {thresholds}")
    return float(low), float(high)


def kan_basin_classify(s: KanState, max_iter: int = KAN_MAX_ITER, thresholds=KAN_THRESHOLDS) -> BasinLabel:
    """Iterate until ``t`` drops below ``low`` (B0), exceeds ``high`` (B1), or ``max_iter`` runs out."""
    low, high = _check_thresholds(thresholds)
    x, t = s.x, s.t
    for i in range(max_iter + 1):
        if t < low:
            return BasinLabel(Basin.B0, i)
        if t > high:
            return BasinLabel(Basin.B1, i)
        if i == max_iter:
            break
        t = t + t * (1.0 - t) / 32.0 * math.cos(2.0 * math.pi * x)
        x = (3.0 * x) % 1.0
    return BasinLabel(Basin.UNDECIDED, max_iter)


def kan_basin_labels(x, t, max_iter: int = KAN_MAX_ITER, thresholds=KAN_THRESHOLDS) -> np.ndarray:
    """Vectorized :func:`kan_basin_classify`: 0 = B0, 1 = B1, -1 = undecided."""
    low, high = _check_thresholds(thresholds)
    x = np.array(x, dtype=np.float64)
    t = np.array(t, dtype=np.float64)
    labels = np.full(x.size, -1, dtype=np.int8)
    live = np.arange(x.size)
    for i in range(max_iter + 1):
        lo, hi = t < low, t > high
        done = lo | hi
        if done.any():
            labels[live[lo]] = 0
            labels[live[hi]] = 1
            keep = ~done
            x, t, live = x[keep], t[keep], live[keep]
        if live.size == 0 or i == max_iter:
            break
        x, t = kan_step_arrays(x, t)
    return labels


@dataclass(frozen=True)
class KanScanRow:
    box_i: int
    box_j: int
    n_B0: int
    n_B1: int
    n_undecided: int


def kan_grid_samples(grid: int, samples_per_box: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Uniform samples in each box of a ``grid x grid`` partition of the annulus.

    Boxes are ordered ``(box_i, box_j)`` row-major with ``box_i`` along ``x``;
    each sample consumes two SplitMix64 doubles (``x`` then ``t``).  Samples
    landing exactly on ``t = 0`` are kept (they are boundary points).
    """
    n = grid * grid * samples_per_box
    u = SplitMix64(seed).random_array(2 * n).reshape(n, 2)
    bi = np.repeat(np.arange(grid), grid * samples_per_box)
    bj = np.tile(np.repeat(np.arange(grid), samples_per_box), grid)
    x = (bi + u[:, 0]) / grid
    t = (bj + u[:, 1]) / grid
    return bi, bj, x, t


def kan_basin_scan(
    grid: int = 8,
    samples_per_box: int = 200,
    seed: int = 7,
    max_iter: int = KAN_MAX_ITER,
    thresholds=KAN_THRESHOLDS,
) -> list[KanScanRow]:
    bi, bj, x, t = kan_grid_samples(grid, samples_per_box, seed)
    labels = kan_basin_labels(x, t, max_iter, thresholds)
    rows = []
    for i in range(grid):
        for j in range(grid):
            box = labels[(bi == i) & (bj == j)]
            rows.append(KanScanRow(i, j, int((box == 0).sum()), int((box == 1).sum()), int((box == -1).sum())))
    return rows


def kan_orbit(s: KanState, n: int) -> np.ndarray:
    """``n`` consecutive states starting at ``s`` as an ``(n, 2)`` array."""
    out = np.empty((n, 2))
    x, t = s.x, s.t
    for i in range(n):
        out[i] = x, t
        t = t + t * (1.0 - t) / 32.0 * math.cos(2.0 * math.pi * x)
        x = (3.0 * x) % 1.0
    return out


# ---------------------------------------------------------------------------
# torus


@dataclass(frozen=True)
class TorusPointExact:
    """The point ``(a/q, b/q)`` of the 2-torus."""

    q: int
    a: int
    b: int

    def __post_init__(self):
        if self.q < 1 or not (0 <= self.a < self.q and 0 <= self.b < self.q):
            raise LabError("BAD_POINT", f"residues ({self.a}, {self.b}) not reduced mod {self.q}")

    @classmethod
    def parse(cls, text: str) -> "TorusPointExact":
        """Parse ``"a/q,b/q"`` (a common denominator is found if they differ)."""
        fx, fy = (Fraction(s.strip()) for s in text.split(","))
        fx, fy = fx - math.floor(fx), fy - math.floor(fy)
        q = math.lcm(fx.denominator, fy.denominator)
        return cls(q, int(fx * q), int(fy * q))

    def as_fraction(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.a, self.q), Fraction(self.b, self.q)

    def __str__(self) -> str:
        return f"{self.a}/{self.q},{self.b}/{self.q}"


Matrix2 = tuple[tuple[int, int], tuple[int, int]]


def _mat_mul(m: Matrix2, n: Matrix2, q: int | None = None) -> Matrix2:
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    out = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
    if q is not None:
        out = tuple(tuple(v % q for v in row) for row in out)
    return out


@dataclass(frozen=True)
class ToralMatrix:
    entries: Matrix2

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise LabError("BAD_MATRIX", "toral matrix must be 2x2")
        object.__setattr__(self, "entries", rows)
        if self.determinant not in (1, -1):
            raise LabError("BAD_MATRIX", f"determinant {self.determinant} is not +-1")

    @property
    def determinant(self) -> int:
        (a, b), (c, d) = self.entries
        return a * d - b * c

    def inverse(self) -> "ToralMatrix":
        (a, b), (c, d) = self.entries
        det = self.determinant
        return ToralMatrix(((d * det, -b * det), (-c * det, a * det)))

    def __matmul__(self, other: "ToralMatrix") -> "ToralMatrix":
        return ToralMatrix(_mat_mul(self.entries, other.entries))

    def power_mod(self, e: int, q: int) -> Matrix2:
        """``M**e`` reduced mod ``q``; negative ``e`` uses the exact integer inverse."""
        base = (self.inverse() if e < 0 else self).entries
        e = abs(e)
        result: Matrix2 = ((1 % q, 0), (0, 1 % q))
        base = _mat_mul(base, ((1, 0), (0, 1)), q)
        while e:
            if e & 1:
                result = _mat_mul(result, base, q)
            base = _mat_mul(base, base, q)
            e >>= 1
        return result


A1 = ToralMatrix(((2, 1), (1, 1)))
A2 = ToralMatrix(((1, 1), (1, 0)))


def _apply_mod(m: Matrix2, p: TorusPointExact) -> TorusPointExact:
    (a, b), (c, d) = m
    return TorusPointExact(p.q, (a * p.a + b * p.b) % p.q, (c * p.a + d * p.b) % p.q)


def toral_apply(M: ToralMatrix, p: TorusPointExact) -> TorusPointExact:
    return _apply_mod(M.entries, p)


def z2_action_apply(m: int, n: int, p: TorusPointExact, g1: ToralMatrix = A1, g2: ToralMatrix = A2) -> TorusPointExact:
    """``g1**m g2**n (p)`` by fast modular powers; negative exponents allowed."""
    return _apply_mod(_mat_mul(g1.power_mod(m, p.q), g2.power_mod(n, p.q), p.q), p)


def toral_orbit_float(M: ToralMatrix, x: float, y: float, steps: int) -> np.ndarray:
    if steps > MAX_FLOAT_ANOSOV_STEPS:
        raise LabError(
            "HYPERBOLIC_FLOAT_HORIZON",
            f"{steps} float iterates of a hyperbolic map exceed the {MAX_FLOAT_ANOSOV_STEPS}-step limit; use exact points",
        )
    m = np.asarray(M.entries, dtype=np.float64)
    out = np.empty((steps + 1, 2))
    out[0] = x, y
    for i in range(steps):
        out[i + 1] = np.mod(m @ out[i], 1.0)
    return out


# ---------------------------------------------------------------------------
# periodicity of exact orbits


def eventual_period(step, x0, max_steps: int = 10**6) -> tuple[int, int]:
    """``(preperiod, period)`` of the orbit of ``x0`` under ``step`` (hashable states)."""
    seen = {}
    x = x0
    for i in range(max_steps + 1):
        if x in seen:
            return seen[x], i - seen[x]
        seen[x] = i
        x = step(x)
    raise LabError("NO_PERIOD", f"no repetition within {max_steps} steps")


def multiplicative_order(k: int, q: int) -> int:
    """Order of ``k`` in the unit group mod ``q`` (``q >= 1``, ``gcd(k, q) = 1``)."""
    if math.gcd(k, q) != 1:
        raise LabError("NOT_UNIT", f"{k} is not invertible mod {q}")
    if q == 1:
        return 1
    e, x = 1, k % q
    while x != 1:
        x = x * k % q
        e += 1
    return e


def matrix_order_mod(M: ToralMatrix, q: int) -> int:
    """Smallest ``e >= 1`` with ``M**e = I`` mod ``q``."""
    ident = ((1 % q, 0), (0, 1 % q))
    base = _mat_mul(M.entries, ((1, 0), (0, 1)), q)
    power, e = base, 1
    while power != ident:
        power = _mat_mul(power, base, q)
        e += 1
    return e
