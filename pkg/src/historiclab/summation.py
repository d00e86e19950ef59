"""Compensated summation helpers used by every averaging routine.

Scalar totals go through :func:`math.fsum` (correctly rounded).  Running
totals over long horizons use :func:`split_cumsum`, which splits each value
into a coarse part whose prefix sums are exact in binary64 and a small
residual whose prefix sums carry the only rounding error.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import LabError

_MANTISSA_BITS = 52


def exact_sum(values) -> float:
    """Correctly rounded sum of an iterable of floats."""
    if isinstance(values, np.ndarray):
        values = values.tolist()  # fsum iterates plain floats much faster than numpy scalars
    return math.fsum(values)


def split_cumsum(values) -> np.ndarray:
    """Prefix sums ``s[n] = values[0] + ... + values[n]`` with controlled error.

    Each value ``x`` is written as ``hi + lo`` where ``hi`` is ``x`` rounded
    to a multiple of a power-of-two ``step`` chosen so that every prefix sum
    of the ``hi`` parts is an integer multiple of ``step`` below ``2**53``
    times ``step`` (hence exact).  ``lo = x - hi`` is computed exactly and is
    at most ``step / 2`` in magnitude, so the residual prefix sums contribute
    an error of order ``n**3 * max|x| * 2**-106`` instead of the
    ``n**2 * max|x| * 2**-53`` of a naive running sum.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise LabError("BAD_SHAPE", "expected a one-dimensional sequence")
    if x.size == 0:
        raise LabError("DOMAIN_EMPTY", "cannot sum an empty sequence")
    if not np.all(np.isfinite(x)):
        raise LabError("NON_FINITE", "sequence contains NaN or infinity")
    peak = float(np.max(np.abs(x)))
    if peak == 0.0:
        return np.zeros_like(x)
    # clamp so the step never underflows to zero for subnormal inputs
    exponent = max(math.ceil(math.log2(peak * x.size)) - _MANTISSA_BITS, -1074)
    step = math.ldexp(1.0, exponent)
    hi = np.round(x / step) * step
    lo = x - hi
    return np.cumsum(hi) + np.cumsum(lo)


class RunningSum:
    """Neumaier-compensated accumulator for streamed values."""

    __slots__ = ("total", "compensation")

    def __init__(self) -> None:
        self.total = 0.0
        self.compensation = 0.0

    def add(self, value: float) -> None:
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.compensation += (self.total - t) + value
        else:
            self.compensation += (value - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.compensation
