"""Shift spaces over finite alphabets.

Words are tuples of non-negative ints.  Anything accepting a word also takes
a digit string (``"0110"``) or a comma-separated string (``"3,10,2"``).

Observables on shift spaces are finite-window functions: a
:class:`WindowObservable` of width ``w`` depends on coordinates ``0..w-1``
only and is stored as a lookup table indexed by the base-``k`` code of the
window, which makes evaluation along long words a vectorized gather.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import LabError
from .summation import exact_sum

Word = tuple[int, ...]


def as_word(w) -> Word:
    if isinstance(w, str):
        if "," in w:
            return tuple(int(s) for s in w.split(",") if s.strip())
        return tuple(int(c) for c in w)
    return tuple(int(s) for s in w)


def format_word(w: Sequence[int], alphabet_size: int = 2) -> str:
    w = as_word(w)
    if alphabet_size <= 10:
        return "".join(str(s) for s in w)
    return ",".join(str(s) for s in w)


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise LabError("BAD_ALPHABET", f"alphabet needs at least 2 symbols, got {self.size}")

    @property
    def symbols(self) -> range:
        return range(self.size)


class TransitionMatrix:
    """0/1 adjacency matrix of a subshift of finite type.

    ``labels`` records which states of a larger (e.g. countable) index set the
    rows stand for; symbols used in words are always the row indices.
    """

    def __init__(self, entries, labels: Sequence[int] | None = None):
        a = np.asarray(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise LabError("BAD_MATRIX", "transition matrix must be square and nonempty")
        if not np.all((a == 0) | (a == 1)):
            raise LabError("BAD_MATRIX", "entries must be 0 or 1")
        a = a.astype(bool)
        if not a.any(axis=1).all() or not a.any(axis=0).all():
            raise LabError("BAD_MATRIX", "every state needs an incoming and an outgoing transition")
        self.entries = a
        self.entries.setflags(write=False)
        self.labels = tuple(labels) if labels is not None else tuple(range(a.shape[0]))
        self._successors = [tuple(int(j) for j in np.flatnonzero(row)) for row in a]
        self.mixing_exponent = _primitivity_exponent(a)

    @classmethod
    def full_shift(cls, k: int = 2) -> "TransitionMatrix":
        return cls(np.ones((k, k), dtype=int))

    @classmethod
    def golden_mean(cls) -> "TransitionMatrix":
        """Two symbols with the word ``11`` forbidden."""
        return cls([[1, 1], [1, 0]])

    @classmethod
    def from_rows(cls, rows) -> "TransitionMatrix":
        return cls(np.asarray(rows, dtype=int))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def mixing(self) -> bool:
        return self.mixing_exponent is not None

    def allows(self, a: int, b: int) -> bool:
        return bool(self.entries[a, b])

    def successors(self, a: int) -> tuple[int, ...]:
        return self._successors[a]

    def is_admissible(self, word) -> bool:
        w = as_word(word)
        if any(s < 0 or s >= self.size for s in w):
            return False
        return all(self.entries[a, b] for a, b in zip(w, w[1:]))

    def is_admissible_cycle(self, word) -> bool:
        w = as_word(word)
        return len(w) > 0 and self.is_admissible(w) and self.allows(w[-1], w[0])

    def to_rows(self) -> list[list[int]]:
        return self.entries.astype(int).tolist()

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"TransitionMatrix({self.to_rows()})"


def _primitivity_exponent(a: np.ndarray) -> int | None:
    """Smallest ``m`` with ``a**m`` entrywise positive, or None (Wielandt bound)."""
    n = a.shape[0]
    bound = (n - 1) ** 2 + 1
    power = a.copy()
    for m in range(1, bound + 1):
        if power.all():
            return m
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
    return None


class WindowObservable:
    """Real function of the first ``width`` coordinates of a point."""

    def __init__(self, width: int, alphabet_size: int, table):
        self.width = int(width)
        self.alphabet_size = int(alphabet_size)
        self.table = np.asarray(table, dtype=np.float64).reshape(-1)
        if self.width < 1 or self.table.size != self.alphabet_size**self.width:
            raise LabError("BAD_OBSERVABLE", "table size must be alphabet_size ** width")
        self._weights = self.alphabet_size ** np.arange(self.width - 1, -1, -1, dtype=np.int64)

    @classmethod
    def from_function(cls, width: int, alphabet_size: int, fn: Callable[[Word], float]) -> "WindowObservable":
        windows = itertools.product(range(alphabet_size), repeat=width)
        return cls(width, alphabet_size, [fn(w) for w in windows])

    @classmethod
    def symbol_values(cls, values: Sequence[float]) -> "WindowObservable":
        """``phi(x) = values[x_0]``."""
        return cls(1, len(values), values)

    @classmethod
    def first_symbol(cls, alphabet_size: int = 2) -> "WindowObservable":
        return cls.symbol_values(list(range(alphabet_size)))

    @classmethod
    def indicator(cls, symbol: int, alphabet_size: int = 2) -> "WindowObservable":
        return cls.symbol_values([1.0 if s == symbol else 0.0 for s in range(alphabet_size)])

    @classmethod
    def constant(cls, c: float, alphabet_size: int = 2) -> "WindowObservable":
        return cls.symbol_values([c] * alphabet_size)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.table)))

    def __call__(self, window) -> float:
        w = as_word(window)[: self.width]
        if len(w) < self.width:
            raise LabError("BAD_WINDOW", f"window shorter than {self.width}")
        return float(self.table[int(np.dot(w, self._weights))])

    def values_along(self, symbols) -> np.ndarray:
        """``phi(sigma^j x)`` for every ``j`` with a full window inside ``symbols``."""
        s = np.asarray(symbols, dtype=np.int64)
        n = s.size - self.width + 1
        if n < 1:
            raise LabError("DOMAIN_EMPTY", "not enough symbols for one window")
        codes = np.zeros(n, dtype=np.int64)
        for j in range(self.width):
            codes = codes * self.alphabet_size + s[j:j + n]
        return self.table[codes]

    def cyclic_values(self, word) -> np.ndarray:
        """Values along the periodic point ``word word word ...`` over one period."""
        w = np.asarray(as_word(word), dtype=np.int64)
        reps = -(-(len(w) + self.width - 1) // len(w))
        return self.values_along(np.tile(w, reps)[: len(w) + self.width - 1])


# ---------------------------------------------------------------------------
# block schedules and lazily generated points


class LengthRule(Enum):
    GEOMETRIC = "GEOMETRIC"
    SUPERLINEAR = "SUPERLINEAR"


@dataclass(frozen=True)
class BlockSchedule:
    """Alternating low/high runs with lengths ``l_1, l_2, ...``.

    ``GEOMETRIC``: ``l_i = first_length * ratio**(i-1)``.
    ``SUPERLINEAR``: ``l_{i+1} = i * (l_1 + ... + l_i)``; the cumulative
    lengths are ``first_length * i!``.
    """

    low_symbol_value: float = 0.0
    high_symbol_value: float = 1.0
    rule: LengthRule = LengthRule.GEOMETRIC
    ratio: int = 2
    first_length: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rule", LengthRule(self.rule))
        if self.rule is LengthRule.GEOMETRIC and (int(self.ratio) != self.ratio or self.ratio < 1):
            raise LabError("BAD_SCHEDULE", "geometric ratio must be an integer >= 1")
        if self.first_length < 1:
            raise LabError("BAD_SCHEDULE", "block lengths must be >= 1")

    def validate(self) -> None:
        if self.low_symbol_value == self.high_symbol_value:
            raise LabError("DEGENERATE_TARGET", "low and high values coincide")
        if self.low_symbol_value > self.high_symbol_value:
            raise LabError("BAD_SCHEDULE", "low value must be below high value")

    def lengths(self) -> Iterator[int]:
        if self.rule is LengthRule.GEOMETRIC:
            length = self.first_length
            while True:
                yield length
                length *= int(self.ratio)
        else:
            total, i, length = 0, 1, self.first_length
            while True:
                yield length
                total += length
                length = i * total
                i += 1

    def limit_values(self) -> tuple[float, float]:
        """Liminf/limsup of the averages of ``symbol_observable`` along the point."""
        lo, hi = self.low_symbol_value, self.high_symbol_value
        if self.rule is LengthRule.SUPERLINEAR:
            return lo, hi
        r = float(self.ratio)
        return lo + (hi - lo) / (r + 1), lo + (hi - lo) * r / (r + 1)

    def symbol_observable(self, alphabet_size: int = 2, low: int = 0, high: int = 1) -> WindowObservable:
        values = [0.0] * alphabet_size
        values[low], values[high] = self.low_symbol_value, self.high_symbol_value
        return WindowObservable.symbol_values(values)


@dataclass(frozen=True)
class Periodic:
    word: Word

    def chunks(self) -> Iterator[np.ndarray]:
        block = np.tile(np.asarray(self.word, dtype=np.int64), max(1, 4096 // len(self.word)))
        while True:
            yield block


@dataclass(frozen=True)
class Eventually:
    word: Word
    tail_symbol: int

    def chunks(self) -> Iterator[np.ndarray]:
        if self.word:
            yield np.asarray(self.word, dtype=np.int64)
        block = np.full(4096, self.tail_symbol, dtype=np.int64)
        while True:
            yield block


@dataclass(frozen=True)
class BlockRuns:
    """Runs ``low_word**l_1, high_word**l_2, low_word**l_3, ...``.

    With an SFT, shortest lexicographically-least connectors are inserted
    wherever consecutive runs do not join admissibly.
    """

    schedule: BlockSchedule
    low_word: Word = (0,)
    high_word: Word = (1,)
    sft: TransitionMatrix | None = None

    def chunks(self) -> Iterator[np.ndarray]:
        words = (np.asarray(self.low_word, dtype=np.int64), np.asarray(self.high_word, dtype=np.int64))
        last = None
        for i, length in enumerate(self.schedule.lengths()):
            w = words[i % 2]
            if self.sft is not None and last is not None and not self.sft.allows(last, int(w[0])):
                yield np.asarray(connector(self.sft, last, int(w[0])), dtype=np.int64)
            yield np.tile(w, length)
            last = int(w[-1])


class SymbolicPoint:
    """Infinite word ``prefix + generator`` with a monotonically growing cache.

    The cache is guarded by a lock, so one point may be shared across threads.
    """

    def __init__(self, prefix=(), generator=None, alphabet_size: int = 2):
        self.prefix = as_word(prefix)
        self.generator = generator if generator is not None else Eventually((), 0)
        self.alphabet_size = alphabet_size
        self._lock = threading.Lock()
        self._source = self.generator.chunks()
        self._flat = np.asarray(self.prefix, dtype=np.int64)

    @classmethod
    def periodic(cls, word, alphabet_size: int = 2) -> "SymbolicPoint":
        w = as_word(word)
        if not w:
            raise LabError("BAD_WORD", "periodic word must be nonempty")
        return cls((), Periodic(w), alphabet_size)

    @classmethod
    def eventually(cls, word, tail_symbol: int, alphabet_size: int = 2) -> "SymbolicPoint":
        return cls((), Eventually(as_word(word), int(tail_symbol)), alphabet_size)

    def _grow(self, n: int) -> None:
        with self._lock:
            if self._flat.size >= n:
                return
            # grow geometrically so repeated symbol(i) queries stay linear
            target = max(n, 2 * self._flat.size)
            parts, size = [self._flat], self._flat.size
            while size < target:
                chunk = next(self._source)
                parts.append(chunk)
                size += chunk.size
            self._flat = np.concatenate(parts)

    def symbols(self, n: int) -> np.ndarray:
        """First ``n`` coordinates as an int64 array (read-only view)."""
        self._grow(n)
        out = self._flat[:n]
        out.setflags(write=False)
        return out

    def word(self, n: int) -> Word:
        return tuple(int(s) for s in self.symbols(n))

    def symbol(self, i: int) -> int:
        return int(self.symbols(i + 1)[i])

    def __repr__(self):
        return f"SymbolicPoint(prefix={format_word(self.prefix, self.alphabet_size)!r}, generator={self.generator!r})"


@dataclass(frozen=True)
class Cylinder:
    word: Word

    def __post_init__(self):
        object.__setattr__(self, "word", as_word(self.word))

    @property
    def depth(self) -> int:
        return len(self.word)

    def contains(self, point: SymbolicPoint) -> bool:
        return point.word(self.depth) == self.word


def all_cylinders(depth: int, alphabet_size: int = 2, sft: TransitionMatrix | None = None) -> list[Cylinder]:
    words = itertools.product(range(alphabet_size), repeat=depth)
    return [Cylinder(w) for w in words if sft is None or sft.is_admissible(w)]


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class ShiftMetricValue:
    value: float
    truncation_error: float


def _prefix(x, depth: int) -> np.ndarray:
    if isinstance(x, SymbolicPoint):
        return x.symbols(depth)
    w = np.asarray(as_word(x), dtype=np.int64)
    if w.size < depth:
        raise LabError("BAD_WORD", f"word shorter than depth {depth}")
    return w[:depth]


def shift_metric_sum(x, y, depth: int, alphabet_size: int = 2) -> ShiftMetricValue:
    """Truncated ``sum_{n=1}^{depth} |x_n - y_n| / 2**n`` (``x_1`` is coordinate 0)."""
    if depth < 1:
        raise LabError("BAD_DEPTH", "depth must be >= 1")
    diff = np.abs(_prefix(x, depth) - _prefix(y, depth)).astype(np.float64)
    weights = np.ldexp(1.0, -np.arange(1, depth + 1))
    value = exact_sum(diff * weights)
    return ShiftMetricValue(value, (alphabet_size - 1) * math.ldexp(1.0, -depth))


def mismatch_metric(x, y, depth: int) -> ShiftMetricValue:
    """``2**-k`` for the first 1-based mismatch position ``k <= depth``, else 0."""
    if depth < 1:
        raise LabError("BAD_DEPTH", "depth must be >= 1")
    neq = np.flatnonzero(_prefix(x, depth) != _prefix(y, depth))
    value = math.ldexp(1.0, -(int(neq[0]) + 1)) if neq.size else 0.0
    return ShiftMetricValue(value, 0.0 if neq.size else math.ldexp(1.0, -(depth + 1)))


# ---------------------------------------------------------------------------
# constructions


def build_oscillating_point(
    schedule: BlockSchedule,
    alphabet: Alphabet,
    sft: TransitionMatrix | None = None,
    low_word=(0,),
    high_word=(1,),
) -> SymbolicPoint:
    """Point made of alternating low/high runs with the schedule's lengths.

    For the default symbols and ``schedule.symbol_observable()``, the tail
    extremes of the Birkhoff averages approach ``schedule.limit_values()``:
    ``(1/3, 2/3)`` for ``GEOMETRIC(2)`` and ``(0, 1)`` for ``SUPERLINEAR``.
    """
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet(int(alphabet))
    schedule.validate()
    low, high = as_word(low_word), as_word(high_word)
    for w in (low, high):
        if not w or max(w) >= alphabet.size:
            raise LabError("BAD_WORD", f"run word {w} not over the alphabet")
        if sft is not None and not sft.is_admissible_cycle(w):
            raise LabError("BAD_WORD", f"run word {w} cannot repeat inside the SFT")
    if sft is not None and not sft.mixing:
        raise LabError("NOT_MIXING", "connectors need a mixing SFT")
    return SymbolicPoint((), BlockRuns(schedule, low, high, sft), alphabet.size)


def cylinder_irregular_witness(
    cyl: Cylinder,
    schedule: BlockSchedule,
    alphabet: Alphabet = Alphabet(2),
    sft: TransitionMatrix | None = None,
    low_word=(0,),
    high_word=(1,),
) -> SymbolicPoint:
    """A point inside ``cyl`` whose tail is the oscillating block word."""
    if not isinstance(cyl, Cylinder):
        cyl = Cylinder(cyl)
    if any(s >= alphabet.size for s in cyl.word) or (sft is not None and not sft.is_admissible(cyl.word)):
        raise LabError("BAD_CYLINDER", f"cylinder {format_word(cyl.word, alphabet.size)!r} is not admissible")
    tail = build_oscillating_point(schedule, alphabet, sft, low_word, high_word)
    prefix = cyl.word
    if sft is not None and prefix:
        head = as_word(low_word)[0]
        if not sft.allows(prefix[-1], head):
            prefix = prefix + connector(sft, prefix[-1], head)
    return SymbolicPoint(prefix, tail.generator, alphabet.size)


def connector(sft: TransitionMatrix, u: int, v: int) -> Word:
    """Shortest, then lexicographically least, word ``c`` with ``u c v`` admissible."""
    if sft.allows(u, v):
        return ()
    parent: dict[int, int | None] = {}
    queue: deque[int] = deque()
    for y in sft.successors(u):
        if y not in parent:
            parent[y] = None
            queue.append(y)
    while queue:
        x = queue.popleft()
        if sft.allows(x, v):
            path = [x]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return tuple(reversed(path))
        for y in sft.successors(x):
            if y not in parent:
                parent[y] = x
                queue.append(y)
    raise LabError("NOT_MIXING", f"no path from {u} to {v}")


def sft_specification_shadow(segments: Iterable, sft: TransitionMatrix) -> Word:
    """Concatenate admissible segments in order, joined by BFS connectors.

    Each connector is at most ``sft.mixing_exponent - 1`` symbols long.
    """
    if not sft.mixing:
        raise LabError("NOT_MIXING", "specification shadowing needs a mixing SFT")
    words = [as_word(s) for s in segments]
    for w in words:
        if not sft.is_admissible(w):
            raise LabError("BAD_SEGMENT", f"segment {format_word(w, sft.size)!r} is not admissible")
    out: list[int] = []
    for w in words:
        if not w:
            continue
        if out:
            out.extend(connector(sft, out[-1], w[0]))
        out.extend(w)
    return tuple(out)


# ---------------------------------------------------------------------------
# periodic orbits and rigidity


def lyndon_words(alphabet_size: int, max_length: int) -> Iterator[Word]:
    """Lyndon words of length <= max_length in lexicographic order (Duval's algorithm)."""
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < max_length:
            w.append(w[len(w) - m])
        while w and w[-1] == alphabet_size - 1:
            w.pop()


def primitive_cycles(sft: TransitionMatrix, max_period: int) -> list[Word]:
    """All primitive periodic orbits of period <= max_period, as least rotations.

    Sorted by period, then lexicographically.
    """
    cycles = [w for w in lyndon_words(sft.size, max_period) if sft.is_admissible_cycle(w)]
    return sorted(cycles, key=lambda w: (len(w), w))


def periodic_average(orbit_word, observable: WindowObservable, sft: TransitionMatrix | None = None) -> float:
    """Exact average of ``observable`` over the shifts of a periodic point."""
    w = as_word(orbit_word)
    if not w:
        raise LabError("BAD_CYCLE", "empty cycle")
    if sft is not None and not sft.is_admissible_cycle(w):
        raise LabError("BAD_CYCLE", f"cycle {format_word(w, sft.size)!r} is not admissible")
    return exact_sum(observable.cyclic_values(w)) / len(w)


class Verdict(Enum):
    RIGID = "RIGID"
    NON_RIGID = "NON_RIGID"


@dataclass(frozen=True)
class RigidityResult:
    verdict: Verdict
    tolerance: float
    c_phi: float | None = None
    witness: tuple[Word, Word] | None = None
    witness_averages: tuple[float, float] | None = None
    cycles_tested: int = 0

    def to_dict(self, alphabet_size: int = 2) -> dict:
        out = {"verdict": self.verdict.value, "tolerance": self.tolerance, "cycles_tested": self.cycles_tested}
        if self.verdict is Verdict.RIGID:
            out["c_phi"] = self.c_phi
        else:
            out["witness"] = [format_word(w, alphabet_size) for w in self.witness]
            out["witness_averages"] = list(self.witness_averages)
        return out


def rigidity_test(sft: TransitionMatrix, observable: WindowObservable, max_period: int, tol: float) -> RigidityResult:
    """RIGID if all periodic averages up to ``max_period`` span at most ``tol``.

    Otherwise NON_RIGID with the (first-found) minimizing and maximizing cycles.
    """
    if max_period < 1:
        raise LabError("BAD_PERIOD", "max_period must be >= 1")
    cycles = primitive_cycles(sft, max_period)
    if not cycles:
        raise LabError("NO_CYCLES", f"no periodic orbits of period <= {max_period}")
    averages = [periodic_average(c, observable) for c in cycles]
    i_min = min(range(len(cycles)), key=lambda i: (averages[i], i))
    i_max = max(range(len(cycles)), key=lambda i: (averages[i], -i))
    spread = averages[i_max] - averages[i_min]
    if spread <= tol:
        return RigidityResult(Verdict.RIGID, tol, c_phi=exact_sum(averages) / len(averages), cycles_tested=len(cycles))
    return RigidityResult(
        Verdict.NON_RIGID,
        tol,
        witness=(cycles[i_min], cycles[i_max]),
        witness_averages=(averages[i_min], averages[i_max]),
        cycles_tested=len(cycles),
    )


def markov_truncation(adjacency_rule: Callable[[int, int], bool], level: int) -> TransitionMatrix:
    """Restrict a countable 0/1 rule to states ``0..level-1`` and prune stranded states.

    The returned matrix's ``labels`` hold the surviving original state indices.
    """
    if level < 2:
        raise LabError("BAD_LEVEL", "truncation level must be >= 2")
    a = np.array([[1 if adjacency_rule(i, j) else 0 for j in range(level)] for i in range(level)], dtype=int)
    keep = np.arange(level)
    while keep.size:
        sub = a[np.ix_(keep, keep)]
        ok = sub.any(axis=1) & sub.any(axis=0)
        if ok.all():
            break
        keep = keep[ok]
    if keep.size == 0:
        raise LabError("EMPTY_TRUNCATION", f"nothing survives pruning at level {level}")
    return TransitionMatrix(a[np.ix_(keep, keep)], labels=[int(k) for k in keep])
