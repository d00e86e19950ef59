"""Scenario configuration: JSON parsing, preset defaults and validation."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum

from ..errors import ConfigError
from . import builders
from .presets import INLINE_TASKS, PRESETS

INLINE = "INLINE"
REQUIRED = ("scenario", "system", "observable", "scheme", "horizon")
KNOWN_KEYS = REQUIRED + ("seeds", "tolerances", "output_dir", "options")
TOLERANCE_DEFAULTS = {"tail_fraction": 0.25, "cluster_tol": 0.01, "level_tol": 0.01}


class AverageScheme(Enum):
    BIRKHOFF = "birkhoff"
    FOLNER = "folner"
    SPHERICAL = "spherical"
    CESARO_SPHERICAL = "cesaro_spherical"
    DOUBLE_PSI = "double_psi"


@dataclass(frozen=True)
class Tolerances:
    tail_fraction: float = 0.25
    cluster_tol: float = 0.01
    level_tol: float = 0.01

    def to_dict(self) -> dict:
        return {"tail_fraction": self.tail_fraction, "cluster_tol": self.cluster_tol, "level_tol": self.level_tol}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    system: dict
    observable: dict
    scheme: AverageScheme
    horizon: int
    seeds: tuple[int, ...] = (0,)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "runs"
    options: dict = field(default_factory=dict)

    @property
    def task(self) -> str:
        if self.scenario == INLINE:
            return INLINE_TASKS[(self.system["kind"], self.scheme.value)]
        return PRESETS[self.scenario].task

    def to_dict(self, include_output_dir: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "system": copy.deepcopy(self.system),
            "observable": copy.deepcopy(self.observable),
            "scheme": self.scheme.value,
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "tolerances": self.tolerances.to_dict(),
            "options": copy.deepcopy(self.options),
        }
        if include_output_dir:
            out["output_dir"] = self.output_dir
        return out

    def replace(self, **changes) -> "ScenarioConfig":
        """Re-validated copy with top-level fields replaced."""
        raw = self.to_dict()
        raw.update(changes)
        return validate_dict(raw)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_json(raw: str | bytes) -> object:
    """``json.loads`` with errors turned into PARSE_ERROR carrying a byte offset."""
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ConfigError(
            "PARSE_ERROR",
            [("", f"{exc.msg} at byte {offset} (line {exc.lineno}, column {exc.colno})")],
            offset=offset,
        ) from None


def validate_config(raw: str | bytes) -> ScenarioConfig:
    """Parse and validate a JSON scenario description.

    Raises ``ConfigError`` with code PARSE_ERROR (malformed JSON; ``offset`` is
    the byte position), UNKNOWN_SCENARIO, or CONFIG_INVALID listing every
    ``(field path, message)`` violation found.
    """
    return validate_dict(parse_json(raw))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate_dict(raw) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("CONFIG_INVALID", [("", "configuration must be a JSON object")])
    scenario = raw.get("scenario")
    if isinstance(scenario, str) and scenario != INLINE:
        if scenario not in PRESETS:
            raise ConfigError("UNKNOWN_SCENARIO", [("scenario", f"unknown scenario {scenario!r}")])
        preset = PRESETS[scenario]
        # a system of another kind replaces the preset system instead of merging into it
        user_system = raw.get("system")
        base = preset.config()
        if isinstance(user_system, dict) and user_system.get("kind", base["system"]["kind"]) != base["system"]["kind"]:
            base.pop("system")
        raw = _merge(base, raw)

    errors: list[tuple[str, str]] = []
    for key in REQUIRED:
        if key not in raw:
            errors.append((key, "required"))
    for key in raw:
        if key not in KNOWN_KEYS:
            errors.append((key, "unknown field"))

    if "scenario" in raw and not isinstance(raw["scenario"], str):
        errors.append(("scenario", "must be a preset name or INLINE"))

    scheme = None
    if "scheme" in raw:
        try:
            scheme = AverageScheme(raw["scheme"])
        except ValueError:
            errors.append(("scheme", f"must be one of {[s.value for s in AverageScheme]}"))

    horizon = raw.get("horizon")
    if "horizon" in raw and not (_is_int(horizon) and horizon >= 1):
        errors.append(("horizon", "must be an integer >= 1"))

    seeds = raw.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds:
        errors.append(("seeds", "must be a non-empty list of integers"))
    else:
        for i, s in enumerate(seeds):
            if not (_is_int(s) and 0 <= s < 1 << 64):
                errors.append((f"seeds[{i}]", "must be an integer in [0, 2**64)"))

    tol_raw = raw.get("tolerances", {})
    tolerances = None
    if not isinstance(tol_raw, dict):
        errors.append(("tolerances", "must be an object"))
    else:
        tol = dict(TOLERANCE_DEFAULTS)
        for k, v in tol_raw.items():
            if k not in tol:
                errors.append((f"tolerances.{k}", "unknown field"))
            elif not (_is_number(v) and v > 0):
                errors.append((f"tolerances.{k}", "must be a number > 0"))
            else:
                tol[k] = float(v)
        if tol["tail_fraction"] > 1:
            errors.append(("tolerances.tail_fraction", "must lie in (0, 1]"))
        tolerances = Tolerances(**tol)

    options = raw.get("options", {})
    if not isinstance(options, dict):
        errors.append(("options", "must be an object"))

    output_dir = raw.get("output_dir", f"runs/{raw.get('scenario', INLINE)}")
    if not isinstance(output_dir, str) or not output_dir:
        errors.append(("output_dir", "must be a non-empty path string"))

    system, observable = raw.get("system"), raw.get("observable")
    for name, desc, kinds in (
        ("system", system, builders.SYSTEM_KINDS),
        ("observable", observable, builders.OBSERVABLE_KINDS),
    ):
        if name not in raw:
            continue
        if not isinstance(desc, dict):
            errors.append((name, "must be an object with a 'kind' tag"))
        elif desc.get("kind") not in kinds:
            errors.append((f"{name}.kind", f"must be one of {list(kinds)}"))

    if not errors and raw["scenario"] == INLINE and (system["kind"], scheme.value) not in INLINE_TASKS:
        errors.append(("scheme", f"scheme {scheme.value!r} is not available for {system['kind']!r} systems"))

    if not errors:
        # structural checks passed: build the described objects
        for check in (
            lambda: builders.check_system(system, horizon),
            lambda: builders.build_observable(observable, system),
        ):
            try:
                check()
            except ConfigError as exc:
                errors.extend(exc.errors)

    if errors:
        raise ConfigError("CONFIG_INVALID", errors)
    return ScenarioConfig(
        scenario=raw["scenario"],
        system=copy.deepcopy(system),
        observable=copy.deepcopy(observable),
        scheme=scheme,
        horizon=horizon,
        seeds=tuple(seeds),
        tolerances=tolerances,
        output_dir=output_dir,
        options=copy.deepcopy(options),
    )
