"""Named example scenarios.

Each preset is a default configuration plus the task that executes it.  A
user config naming a preset is merged over these defaults, so ``{"scenario":
"psi-bound"}`` alone is a complete configuration.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    task: str
    defaults: dict

    def config(self) -> dict:
        out = copy.deepcopy(self.defaults)
        out["scenario"] = self.name
        return out


_COORD = {"kind": "coordinate", "values": [0.0, 1.0]}
_GOLDEN = [[1, 1], [1, 0]]


def _tol(tail=0.25, cluster=0.01, level=0.01) -> dict:
    return {"tail_fraction": tail, "cluster_tol": cluster, "level_tol": level}


_PRESETS = [
    Preset(
        "shift-blocks-geometric",
        "Full 2-shift point with doubling 0/1 runs; averages oscillate between 1/3 and 2/3.",
        "birkhoff_shift",
        {
            "system": {"kind": "shift", "alphabet": 2, "point": {"type": "block", "rule": "GEOMETRIC", "ratio": 2}},
            "observable": _COORD,
            "scheme": "birkhoff",
            "horizon": 1 << 20,
            "seeds": [1],
            "tolerances": _tol(tail=0.5),
            "options": {"lambda_N": [1, 10, 100, 1000, 10000], "lambda_eta": 0.1, "csv_stride": 1024},
        },
    ),
    Preset(
        "shift-blocks-superlinear",
        "Full 2-shift point with factorially growing runs; averages swing towards 0 and 1.",
        "birkhoff_shift",
        {
            "system": {"kind": "shift", "alphabet": 2, "point": {"type": "block", "rule": "SUPERLINEAR"}},
            "observable": _COORD,
            "scheme": "birkhoff",
            "horizon": 10**6,
            "seeds": [1],
            "tolerances": _tol(tail=0.25, level=0.05),
            "options": {"lambda_N": [1, 10, 100, 1000, 10000], "lambda_eta": 0.1, "csv_stride": 1000},
        },
    ),
    Preset(
        "shift-sensitivity-fixedpoints",
        "Points in the stable sets of the fixed points 0^inf and 1^inf separate the averages of the first symbol.",
        "shift_sensitivity",
        {
            "system": {"kind": "shift", "alphabet": 2, "net_depth": 4},
            "observable": _COORD,
            "scheme": "birkhoff",
            "horizon": 4096,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "cylinder-density",
        "Oscillating witness inside every cylinder of depth <= 8 of the full 2-shift.",
        "cylinder_density",
        {
            "system": {
                "kind": "shift",
                "alphabet": 2,
                "point": {"type": "block", "rule": "GEOMETRIC", "ratio": 2},
                "depth": 8,
                "gap_fraction": 0.3,
            },
            "observable": _COORD,
            "scheme": "birkhoff",
            "horizon": 1 << 20,
            "seeds": [0],
            "tolerances": _tol(tail=0.5),
        },
    ),
    Preset(
        "coin-toss-transitive-bounds",
        "Seeded random 0/1 sequences next to a block point: orbit-density diagnostics and average extremes.",
        "transitive_bounds",
        {
            "system": {"kind": "shift", "alphabet": 2, "samples": 8, "depth": 8},
            "observable": _COORD,
            "scheme": "birkhoff",
            "horizon": 1 << 16,
            "seeds": [3],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "sft-shadow-goldenmean",
        "Golden-mean SFT: connectors, shadowing of word segments and an oscillating point avoiding 11.",
        "sft_shadow",
        {
            "system": {"kind": "sft", "matrix": _GOLDEN, "segments": ["1", "1", "0", "101"], "low_word": "0", "high_word": "10"},
            "observable": {"kind": "indicator", "symbol": 1},
            "scheme": "birkhoff",
            "horizon": 1 << 18,
            "seeds": [0],
            "tolerances": _tol(tail=0.5),
        },
    ),
    Preset(
        "rigidity-goldenmean",
        "Golden-mean SFT with the indicator of symbol 1: periodic averages differ, so the sensitive branch is taken.",
        "dichotomy",
        {
            "system": {"kind": "sft", "matrix": _GOLDEN, "max_period": 6, "rigidity_tol": 1e-9},
            "observable": {"kind": "indicator", "symbol": 1},
            "scheme": "birkhoff",
            "horizon": 64,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "kan-intermingled",
        "Kan map on the annulus: per-box basin counts from seeded uniform samples.",
        "kan_scan",
        {
            "system": {"kind": "kan", "grid": 8, "samples_per_box": 200, "thresholds": [0.01, 0.99]},
            "observable": {"kind": "coordinate", "index": 1},
            "scheme": "birkhoff",
            "horizon": 100000,
            "seeds": [7],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "kan-boundary-measures",
        "Kan orbit from a seeded point on the boundary t = 0: x-histogram snapshots and their TV clusters.",
        "kan_measures",
        {
            "system": {"kind": "kan", "start": "boundary", "bins": 16, "snapshots": 8, "histogram_coordinate": 0},
            "observable": {"kind": "coordinate", "index": 1},
            "scheme": "birkhoff",
            "horizon": 1 << 17,
            "seeds": [11],
            "tolerances": _tol(cluster=0.1),
        },
    ),
    Preset(
        "folner-z2-fixedpoint",
        "Z^2 toral action: Folner box averages at the common fixed point and at rational points.",
        "folner",
        {
            "system": {"kind": "toral_z2", "points": ["0/1,0/1", "1/5,0/5", "1/7,2/7"]},
            "observable": {"kind": "trig", "cos": [1.0, -1.0]},
            "scheme": "folner",
            "horizon": 20,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "tempered-boxes",
        "Exact counting check that symmetric boxes are tempered with C = 4.",
        "tempered",
        {
            "system": {"kind": "toral_z2", "C": 4.0},
            "observable": {"kind": "constant", "value": 1.0},
            "scheme": "folner",
            "horizon": 100,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "cesaro-spherical-preorbit",
        "z^4/z^6 semigroup: spherical and Cesaro-spherical averages at a pre-image of the fixed point 0.",
        "circle_averages",
        {
            "system": {"kind": "circle_semigroup", "target": "0/1", "a": 1, "b": 1, "branch": 1},
            "observable": {"kind": "trig", "cos": [0.0, 1.0]},
            "scheme": "cesaro_spherical",
            "horizon": 200,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "psi-bound",
        "z^4/z^6 semigroup at theta = 1/4: the double average error bound for n = 2..1000.",
        "psi_bound",
        {
            "system": {"kind": "circle_semigroup", "target": "0/1", "a": 1, "b": 0, "branch": 1, "sup_norm": 1.0},
            "observable": {"kind": "trig", "cos": [0.0, 1.0]},
            "scheme": "double_psi",
            "horizon": 1000,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
    Preset(
        "dense-orbit-example",
        "Orbit 1, 1/2, 1/3, ... on [0, 1]: density diagnostic and Birkhoff averages of a continuous observable.",
        "reciprocal",
        {
            "system": {"kind": "reciprocal", "resolution": 0.01},
            "observable": {"kind": "trig", "cos": [0.0, 1.0]},
            "scheme": "birkhoff",
            "horizon": 4096,
            "seeds": [0],
            "tolerances": _tol(),
        },
    ),
]

PRESETS: dict[str, Preset] = {p.name: p for p in sorted(_PRESETS, key=lambda p: p.name)}


def list_presets() -> list[tuple[str, str]]:
    """``(name, description)`` pairs sorted by name."""
    return [(p.name, p.description) for p in PRESETS.values()]


# task used for INLINE configurations, keyed by (system kind, scheme)
INLINE_TASKS: dict[tuple[str, str], str] = {
    ("shift", "birkhoff"): "birkhoff_shift",
    ("sft", "birkhoff"): "dichotomy",
    ("kan", "birkhoff"): "kan_measures",
    ("reciprocal", "birkhoff"): "reciprocal",
    ("toral_z2", "folner"): "folner",
    ("circle_semigroup", "spherical"): "circle_averages",
    ("circle_semigroup", "cesaro_spherical"): "circle_averages",
    ("circle_semigroup", "double_psi"): "circle_averages",
}
