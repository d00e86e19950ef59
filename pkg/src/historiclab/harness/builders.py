"""Turn the tagged JSON descriptions of a scenario into library objects.

Every builder raises :class:`ConfigError` with the offending field path, so
``validate_config`` can run them as its last check.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, LabError
from ..group_avg import TrigPolynomial, preorbit_construct
from ..rng import SplitMix64
from ..symbolic import (
    Alphabet,
    BlockSchedule,
    LengthRule,
    SymbolicPoint,
    TransitionMatrix,
    WindowObservable,
    build_oscillating_point,
)
from ..systems import CirclePointRational, TorusPointExact

SYSTEM_KINDS = ("shift", "sft", "kan", "toral_z2", "circle_semigroup", "reciprocal")
OBSERVABLE_KINDS = ("coordinate", "window", "indicator", "constant", "trig")


def _fail(path: str, message: str):
    raise ConfigError("CONFIG_INVALID", [(path, message)])


def _get(desc: dict, key: str, path: str, types, default=None, required: bool = False):
    if key not in desc:
        if required:
            _fail(f"{path}.{key}", "required")
        return default
    value = desc[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        _fail(f"{path}.{key}", "must not be a boolean")
    if not isinstance(value, types):
        _fail(f"{path}.{key}", f"expected {types}")
    return value


def alphabet_size(system: dict) -> int:
    if system["kind"] == "sft":
        return len(system["matrix"])
    return int(system.get("alphabet", 2))


def build_schedule(point: dict, path: str) -> BlockSchedule:
    rule = _get(point, "rule", path, str, "GEOMETRIC")
    if rule not in LengthRule.__members__:
        _fail(f"{path}.rule", f"unknown rule {rule!r}")
    try:
        return BlockSchedule(
            low_symbol_value=float(_get(point, "low_value", path, (int, float), 0.0)),
            high_symbol_value=float(_get(point, "high_value", path, (int, float), 1.0)),
            rule=LengthRule(rule),
            ratio=_get(point, "ratio", path, int, 2),
            first_length=_get(point, "first_length", path, int, 1),
        )
    except LabError as exc:
        _fail(path, str(exc))


def build_shift_point(system: dict, seed: int, horizon: int, path: str = "system.point") -> SymbolicPoint:
    point = system.get("point") or {}
    k = alphabet_size(system)
    kind = _get(point, "type", path, str, required=True)
    try:
        if kind == "block":
            schedule = build_schedule(point, path)
            return build_oscillating_point(schedule, Alphabet(k))
        if kind == "periodic":
            return SymbolicPoint.periodic(_get(point, "word", path, str, required=True), k)
        if kind == "eventually":
            word = _get(point, "word", path, str, "")
            return SymbolicPoint.eventually(word, _get(point, "tail", path, int, 0), k)
        if kind == "random":
            symbols = SplitMix64(seed).integers(horizon, k)
            return SymbolicPoint.eventually(symbols.tolist(), 0, k)
    except LabError as exc:
        _fail(path, str(exc))
    _fail(f"{path}.type", f"unknown point type {kind!r}")


def build_sft(system: dict, path: str = "system") -> TransitionMatrix:
    rows = _get(system, "matrix", path, list, required=True)
    try:
        return TransitionMatrix.from_rows(rows)
    except (LabError, ValueError) as exc:
        _fail(f"{path}.matrix", str(exc))


def _trig(desc: dict, path: str) -> TrigPolynomial:
    cos = _get(desc, "cos", path, list, [0.0, 1.0])
    sin = _get(desc, "sin", path, list, [])
    if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in cos + sin):
        _fail(path, "trig coefficients must be numbers")
    return TrigPolynomial(tuple(float(c) for c in cos), tuple(float(s) for s in sin))


class TorusTrig:
    """``(f(x) + f(y)) / 2`` for a one-variable trig polynomial ``f``."""

    def __init__(self, f: TrigPolynomial):
        self.f = f

    def __call__(self, p: TorusPointExact) -> float:
        fx, fy = p.as_fraction()
        return 0.5 * (self.f.at(fx) + self.f.at(fy))


def build_observable(desc: dict, system: dict, path: str = "observable"):
    kind = _get(desc, "kind", path, str, required=True)
    if kind not in OBSERVABLE_KINDS:
        _fail(f"{path}.kind", f"unknown observable kind {kind!r}")
    sk = system["kind"]
    try:
        if sk in ("shift", "sft"):
            k = alphabet_size(system)
            if kind == "coordinate":
                values = _get(desc, "values", path, list, list(range(k)))
                if len(values) != k:
                    _fail(f"{path}.values", f"need {k} values")
                return WindowObservable.symbol_values([float(v) for v in values])
            if kind == "window":
                width = _get(desc, "width", path, int, required=True)
                return WindowObservable(width, k, _get(desc, "table", path, list, required=True))
            if kind == "indicator":
                return WindowObservable.indicator(_get(desc, "symbol", path, int, required=True), k)
            if kind == "constant":
                return WindowObservable.constant(float(_get(desc, "value", path, (int, float), required=True)), k)
        elif sk in ("circle_semigroup", "reciprocal"):
            if kind == "trig":
                return _trig(desc, path)
            if kind == "indicator":
                target = CirclePointRational.parse(_get(desc, "point", path, str, required=True))
                return lambda p, target=target: 1.0 if p == target else 0.0
            if kind == "constant":
                c = float(_get(desc, "value", path, (int, float), required=True))
                return lambda p, c=c: c
        elif sk == "toral_z2":
            if kind == "trig":
                return TorusTrig(_trig(desc, path))
            if kind == "indicator":
                target = TorusPointExact.parse(_get(desc, "point", path, str, required=True))
                return lambda p, t=target.as_fraction(): 1.0 if p.as_fraction() == t else 0.0
            if kind == "constant":
                c = float(_get(desc, "value", path, (int, float), required=True))
                return lambda p, c=c: c
        elif sk == "kan":
            if kind == "coordinate":
                index = _get(desc, "index", path, int, 1)
                if index not in (0, 1):
                    _fail(f"{path}.index", "Kan states have coordinates 0 (x) and 1 (t)")
                return lambda s, i=index: float(s[i])
            if kind == "constant":
                c = float(_get(desc, "value", path, (int, float), required=True))
                return lambda s, c=c: c
    except (LabError, ValueError, ZeroDivisionError) as exc:
        _fail(path, str(exc))
    _fail(f"{path}.kind", f"observable kind {kind!r} is not defined on {sk!r} systems")


def circle_theta(system: dict, path: str = "system"):
    """``(theta, witness or None)`` from either ``theta`` or a pre-orbit spec."""
    try:
        if "theta" in system:
            return CirclePointRational.parse(_get(system, "theta", path, str)), None
        target = CirclePointRational.parse(_get(system, "target", path, str, "0"))
        w = preorbit_construct(
            target,
            _get(system, "a", path, int, 0),
            _get(system, "b", path, int, 0),
            _get(system, "branch", path, int, 0),
        )
        return w.theta, w
    except (LabError, ValueError, ZeroDivisionError) as exc:
        _fail(path, str(exc))


def torus_points(system: dict, path: str = "system") -> list[TorusPointExact]:
    texts = _get(system, "points", path, list, ["0/1,0/1"])
    try:
        return [TorusPointExact.parse(t) for t in texts]
    except (LabError, ValueError, ZeroDivisionError) as exc:
        _fail(f"{path}.points", str(exc))


def check_system(system: dict, horizon: int) -> None:
    """Build everything a system description refers to (errors carry paths)."""
    kind = system["kind"]
    if kind == "shift":
        k = _get(system, "alphabet", "system", int, 2)
        if k < 2:
            _fail("system.alphabet", "alphabet needs at least 2 symbols")
        if "point" in system:
            point = system["point"]
            if not isinstance(point, dict):
                _fail("system.point", "expected an object")
            if point.get("type") != "random":
                build_shift_point(system, 0, 1)
    elif kind == "sft":
        build_sft(system)
    elif kind == "circle_semigroup":
        circle_theta(system)
    elif kind == "toral_z2":
        torus_points(system)
    elif kind == "kan":
        grid = _get(system, "grid", "system", int, 8)
        per = _get(system, "samples_per_box", "system", int, 200)
        thresholds = _get(system, "thresholds", "system", list, [0.01, 0.99])
        if grid < 1 or per < 1:
            _fail("system", "grid and samples_per_box must be >= 1")
        if len(thresholds) != 2 or not 0 < thresholds[0] < thresholds[1] < 1:
            _fail("system.thresholds", "need 0 < low < high < 1")


def seeded_uniform(seed: int, n: int) -> np.ndarray:
    return SplitMix64(seed).random_array(n)
