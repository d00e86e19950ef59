"""Scenario execution and artifact writing.

Every task returns a :class:`TaskResult`; :func:`run_scenario` writes

* ``averages.csv``: the task's table (columns are fixed per task, listed
  in the README), header row first;
* ``report.json``: config echo (without ``output_dir``) and results, a pure
  function of the config, so reruns are byte-identical;
* ``manifest.json``: full config echo, artifact digests, wall-clock and
  version.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..avg_core import (
    Grid,
    birkhoff_partial_averages,
    classify_level_set,
    empirical_measure,
    indicates_irregularity,
    lambda_probe,
    oscillation_report,
    transitive_bounds_estimate,
    vT_cluster_report,
)
from ..errors import LabError
from ..group_avg import (
    cesaro_spherical_trace,
    folner_average,
    psi_bound_rows,
    psi_trace,
    spherical_trace,
    tempered_check,
)
from ..rng import SplitMix64
from ..sensitivity import (
    Pairing,
    Provenance,
    SampleNet,
    cylinder_density,
    dichotomy_report,
    orbit_density,
    sensitivity_test,
)
from ..symbolic import (
    Alphabet,
    SymbolicPoint,
    all_cylinders,
    build_oscillating_point,
    connector,
    cylinder_irregular_witness,
    format_word,
    periodic_average,
    primitive_cycles,
    sft_specification_shadow,
)
from ..systems import KanState, kan_basin_classify, kan_basin_scan, kan_orbit, reciprocal_orbit
from . import builders
from .config import ScenarioConfig
from .serialize import sha256_file, write_csv, write_json

REPORT = "report.json"
AVERAGES = "averages.csv"
MANIFEST = "manifest.json"


@dataclass
class TaskResult:
    results: dict
    header: list[str]
    rows: list
    summary: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class RunManifest:
    config: dict
    artifacts: tuple[dict, ...]
    wall_clock_seconds: float
    version: str
    output_dir: Path
    summary: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "artifacts": list(self.artifacts),
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    def verify(self) -> bool:
        """True when every listed artifact exists and matches its digest."""
        for a in self.artifacts:
            path = self.output_dir / a["path"]
            if not path.is_file() or sha256_file(path) != a["sha256"]:
                return False
        return True


# ---------------------------------------------------------------------------
# helpers


def _stride_rows(averages: np.ndarray, stride: int, prefix: tuple = ()) -> list:
    """``(n, A_n)`` rows at ``n = stride, 2 stride, ...`` plus the last index."""
    n = averages.size
    idx = list(range(stride, n + 1, stride))
    if not idx or idx[-1] != n:
        idx.append(n)
    return [(*prefix, i, float(averages[i - 1])) for i in idx]


def _oscillation(values: np.ndarray, cfg: ScenarioConfig):
    averages = birkhoff_partial_averages(values, cfg.horizon)
    return averages, oscillation_report(averages, cfg.tolerances.tail_fraction, cfg.tolerances.cluster_tol)


def _shift_values(point: SymbolicPoint, obs, horizon: int) -> np.ndarray:
    return obs.values_along(point.symbols(horizon + obs.width - 1))


def _stride(cfg: ScenarioConfig, default: int = 1) -> int:
    stride = cfg.options.get("csv_stride", default)
    if not isinstance(stride, int) or stride < 1:
        raise LabError("CONFIG_INVALID", "options.csv_stride must be an integer >= 1")
    return stride


# ---------------------------------------------------------------------------
# tasks


def task_birkhoff_shift(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    obs = builders.build_observable(cfg.observable, system)
    point_desc = system.get("point", {"type": "block"})
    random = point_desc.get("type") == "random"
    seeds = cfg.seeds if random else cfg.seeds[:1]
    stride = _stride(cfg)
    probes_N = cfg.options.get("lambda_N", [])
    eta = cfg.options.get("lambda_eta", 0.1)
    runs, rows, summary = [], [], []
    for seed in seeds:
        point = builders.build_shift_point(dict(system, point=point_desc), seed, cfg.horizon + obs.width)
        averages, rep = _oscillation(_shift_values(point, obs, cfg.horizon), cfg)
        run = {
            "seed": seed,
            "oscillation": rep.to_dict(include_averages=False),
            "irregularity_indicated": indicates_irregularity(rep, 2 * cfg.tolerances.cluster_tol),
            "lambda_probes": [lambda_probe(averages, N, eta).to_dict() for N in probes_N if N <= cfg.horizon],
        }
        if point_desc.get("type") == "block":
            schedule = builders.build_schedule(point_desc, "system.point")
            lo, hi = schedule.limit_values()
            run["predicted_limits"] = [lo, hi]
            run["level_set"] = classify_level_set(rep, lo, hi, cfg.tolerances.level_tol).to_dict()
        runs.append(run)
        rows.extend(_stride_rows(averages, stride, (seed,)))
        summary.append(
            f"seed {seed}: liminf {rep.liminf_est:.6f} limsup {rep.limsup_est:.6f} gap {rep.gap:.6f}"
        )
    return TaskResult({"runs": runs}, ["seed", "n", "average"], rows, summary)


def task_shift_sensitivity(cfg: ScenarioConfig) -> TaskResult:
    """Nets ``w 0^inf`` and ``w 1^inf`` over all words ``w`` of length ``net_depth``."""
    system = cfg.system
    k = builders.alphabet_size(system)
    depth = system.get("net_depth", 4)
    obs = builders.build_observable(cfg.observable, system)
    words = [c.word for c in all_cylinders(depth, k)]
    net_a = SampleNet([SymbolicPoint.eventually(w, 0, k) for w in words], 2.0**-depth, Provenance.GRID)
    net_b = SampleNet([SymbolicPoint.eventually(w, k - 1, k) for w in words], 2.0**-depth, Provenance.GRID)
    reports = {}

    def trace(p):
        rep = _oscillation(_shift_values(p, obs, cfg.horizon), cfg)[1]
        reports[id(p)] = rep
        return rep

    verdict = sensitivity_test(net_a, net_b, trace, Pairing.ALL_PAIRS)
    describe = lambda p: format_word(p.word(depth + 2), k) + "..."
    rows = []
    for label, net in (("A", net_a), ("B", net_b)):
        for p in net.points:
            rep = reports[id(p)]
            rows.append((label, describe(p), rep.liminf_est, rep.limsup_est))
    summary = [f"sensitive={verdict.sensitive} epsilon_est={verdict.epsilon_est:.6f}"]
    return TaskResult({"verdict": verdict.to_dict(describe)}, ["net", "point", "liminf_est", "limsup_est"], rows, summary)


def task_cylinder_density(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    k = builders.alphabet_size(system)
    depth = system.get("depth", 8)
    fraction = system.get("gap_fraction", 0.3)
    schedule = builders.build_schedule(system.get("point", {}), "system.point")
    lo, hi = schedule.limit_values()
    threshold = fraction * (hi - lo)
    obs = builders.build_observable(cfg.observable, system)
    rows, passed, min_gap = [], 0, math.inf
    for cyl in all_cylinders(depth, k):
        point = cylinder_irregular_witness(cyl, schedule, Alphabet(k))
        rep = _oscillation(_shift_values(point, obs, cfg.horizon), cfg)[1]
        inside = cyl.contains(point)
        ok = inside and rep.gap >= threshold
        passed += ok
        min_gap = min(min_gap, rep.gap)
        rows.append((format_word(cyl.word, k), inside, rep.liminf_est, rep.limsup_est, rep.gap, ok))
    results = {
        "depth": depth,
        "cylinders": len(rows),
        "passed": passed,
        "gap_threshold": threshold,
        "min_gap": min_gap,
        "certificate": passed == len(rows),
    }
    summary = [f"{passed}/{len(rows)} cylinders of depth {depth} hold a witness with gap >= {threshold:.6f}"]
    return TaskResult(results, ["cylinder", "in_cylinder", "liminf_est", "limsup_est", "gap", "passes"], rows, summary)


def task_transitive_bounds(cfg: ScenarioConfig) -> TaskResult:
    """Random sequences (one SplitMix64 stream per seed) plus a block point for contrast."""
    system = cfg.system
    k = builders.alphabet_size(system)
    samples = system.get("samples", 8)
    depth = system.get("depth", 8)
    obs = builders.build_observable(cfg.observable, system)
    rows, per_seed, dense_reports = [], [], []
    for seed in cfg.seeds:
        rng = SplitMix64(seed)
        for i in range(samples):
            symbols = rng.integers(cfg.horizon + obs.width - 1, k)
            rep = _oscillation(obs.values_along(symbols), cfg)[1]
            dens = cylinder_density(symbols, depth, k)
            if dens.covered_fraction >= 1.0:
                dense_reports.append(rep)
            rows.append((seed, i, dens.covered_fraction, rep.liminf_est, rep.limsup_est))
            per_seed.append({"seed": seed, "sample": i, "density": dens.to_dict(), "oscillation": rep.to_dict(False)})
    block = build_oscillating_point(builders.build_schedule({}, "system.point"), Alphabet(k))
    block_rep = _oscillation(_shift_values(block, obs, cfg.horizon), cfg)[1]
    block_dens = cylinder_density(block.symbols(cfg.horizon), depth, k)
    if block_dens.covered_fraction >= 1.0:
        dense_reports.append(block_rep)
    bounds = transitive_bounds_estimate(dense_reports).to_dict() if dense_reports else None
    results = {
        "samples": per_seed,
        "block_point": {"density": block_dens.to_dict(), "oscillation": block_rep.to_dict(False)},
        "bounds_over_dense_orbits": bounds,
    }
    summary = [f"{len(dense_reports)} of {len(per_seed) + 1} orbits met every depth-{depth} cylinder"]
    return TaskResult(results, ["seed", "sample", "covered_fraction", "liminf_est", "limsup_est"], rows, summary)


def task_sft_shadow(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    sft = builders.build_sft(system)
    k = sft.size
    segments = system.get("segments", [])
    shadow = sft_specification_shadow(segments, sft) if segments else ()
    connectors = {
        f"{format_word((u,), k)}->{format_word((v,), k)}": format_word(connector(sft, u, v), k)
        for u in range(k)
        for v in range(k)
    }
    schedule = builders.build_schedule(system.get("point", {}), "system.point")
    point = build_oscillating_point(schedule, Alphabet(k), sft, system.get("low_word", "0"), system.get("high_word", "1"))
    obs = builders.build_observable(cfg.observable, system)
    symbols = point.symbols(cfg.horizon + obs.width - 1)
    averages, rep = _oscillation(obs.values_along(symbols), cfg)
    results = {
        "mixing": sft.mixing,
        "connectors": connectors,
        "shadow": format_word(shadow, k),
        "shadow_admissible": sft.is_admissible(shadow) if shadow else True,
        "point_admissible": sft.is_admissible(symbols),
        "oscillation": rep.to_dict(False),
    }
    summary = [f"shadow {results['shadow']!r}; oscillation gap {rep.gap:.6f}"]
    return TaskResult(results, ["seed", "n", "average"], _stride_rows(averages, _stride(cfg, 256), (cfg.seeds[0],)), summary)


def task_dichotomy(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    sft = builders.build_sft(system)
    obs = builders.build_observable(cfg.observable, system)
    max_period = system.get("max_period", 6)
    tol = system.get("rigidity_tol", 1e-9)
    report = dichotomy_report(sft, obs, max_period, cfg.horizon, tol)
    rows = [(format_word(c, sft.size), len(c), periodic_average(c, obs)) for c in primitive_cycles(sft, max_period)]
    summary = [f"branch {report.branch.value}"]
    if report.witness_gap is not None:
        summary.append(f"witness gap {report.witness_gap:.12g}")
    return TaskResult({"dichotomy": report.to_dict(sft.size)}, ["cycle", "period", "average"], rows, summary)


def task_kan_scan(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    grid = system.get("grid", 8)
    per = system.get("samples_per_box", 200)
    thresholds = tuple(system.get("thresholds", (0.01, 0.99)))
    rows, runs, summary = [], [], []
    for seed in cfg.seeds:
        scan = kan_basin_scan(grid, per, seed, cfg.horizon, thresholds)
        total = grid * grid * per
        undecided = sum(r.n_undecided for r in scan)
        mixed = sum(1 for r in scan if r.n_B0 > 0 and r.n_B1 > 0)
        runs.append(
            {
                "seed": seed,
                "samples": total,
                "n_B0": sum(r.n_B0 for r in scan),
                "n_B1": sum(r.n_B1 for r in scan),
                "n_undecided": undecided,
                "decided_fraction": (total - undecided) / total,
                "boxes_with_both_basins": mixed,
                "boxes": len(scan),
                "intermingled_on_grid": mixed == len(scan),
            }
        )
        rows.extend((seed, r.box_i, r.box_j, r.n_B0, r.n_B1, r.n_undecided) for r in scan)
        summary.append(f"seed {seed}: {mixed}/{len(scan)} boxes meet both basins; {total - undecided}/{total} decided")
    results = {"grid": grid, "samples_per_box": per, "max_iter": cfg.horizon, "thresholds": list(thresholds), "runs": runs}
    return TaskResult(results, ["seed", "box_i", "box_j", "n_B0", "n_B1", "n_undecided"], rows, summary)


def task_kan_measures(cfg: ScenarioConfig) -> TaskResult:
    """Kan orbit from a seeded point; histogram snapshots at doubling times.

    ``start`` is ``"boundary"`` (``t = 0``, ``x`` seeded) or ``"interior"``
    (both coordinates seeded); ``histogram_coordinate`` picks ``x`` (0) or
    ``t`` (1) for the empirical measures.
    """
    system = cfg.system
    bins = system.get("bins", 16)
    snapshots = system.get("snapshots", 8)
    start_kind = system.get("start", "boundary")
    coord = system.get("histogram_coordinate", 0)
    if start_kind not in ("boundary", "interior") or coord not in (0, 1):
        raise LabError("CONFIG_INVALID", "system.start must be boundary|interior and histogram_coordinate 0|1")
    obs = builders.build_observable(cfg.observable, system)
    grid = Grid.interval(0.0, 1.0, bins)
    runs, rows, summary = [], [], []
    for seed in cfg.seeds:
        x, t = SplitMix64(seed).random_array(2)
        start = KanState(float(x), 0.0 if start_kind == "boundary" else float(t))
        orbit = kan_orbit(start, cfg.horizon)
        values = np.array([obs(s) for s in orbit])
        averages, rep = _oscillation(values, cfg)
        times = sorted({max(1, cfg.horizon >> i) for i in range(snapshots)})
        measures = [empirical_measure(orbit[:n, coord:coord + 1], grid) for n in times]
        reps = vT_cluster_report(measures, cfg.tolerances.cluster_tol)
        label = kan_basin_classify(start, cfg.horizon)
        runs.append(
            {
                "seed": seed,
                "start": [start.x, start.t],
                "basin": label.label.value,
                "basin_iterations": label.iterations_used,
                "oscillation": rep.to_dict(False),
                "snapshot_times": times,
                "snapshots": [m.weights for m in measures],
                "vT_cluster_times": [times[i] for i, m in enumerate(measures) if any(m is r for r in reps)],
            }
        )
        rows.extend(_stride_rows(averages, _stride(cfg, 256), (seed,)))
        summary.append(f"seed {seed}: basin {label.label.value}; {len(reps)} empirical-measure cluster(s)")
    return TaskResult({"runs": runs}, ["seed", "n", "average"], rows, summary)


def task_folner(cfg: ScenarioConfig) -> TaskResult:
    system = cfg.system
    obs = builders.build_observable(cfg.observable, system)
    points = builders.torus_points(system)
    rows, per_point = [], []
    for p in points:
        values = [folner_average(p, obs, n) for n in range(1, cfg.horizon + 1)]
        rows.extend((str(p), n, v) for n, v in enumerate(values, start=1))
        per_point.append({"point": str(p), "phi": float(obs(p)), "final_average": values[-1]})
    summary = [f"{d['point']}: phi {d['phi']:.6f}, average at n={cfg.horizon} {d['final_average']:.6f}" for d in per_point]
    return TaskResult({"points": per_point}, ["point", "n", "average"], rows, summary)


def task_tempered(cfg: ScenarioConfig) -> TaskResult:
    C = float(cfg.system.get("C", 4.0))
    check = tempered_check(cfg.horizon, C)
    rows = [(check.verified_up_to, check.C, check.minimal_C, check.holds)]
    summary = [f"tempered with C={C}: {check.holds} (minimal C {check.minimal_C:.6f} up to n={check.verified_up_to})"]
    return TaskResult({"tempered": check.to_dict()}, ["up_to", "C", "minimal_C", "holds"], rows, summary)


def task_circle_averages(cfg: ScenarioConfig) -> TaskResult:
    theta, witness = builders.circle_theta(cfg.system)
    obs = builders.build_observable(cfg.observable, cfg.system)
    scheme = cfg.scheme.value
    if scheme == "spherical":
        values, name = spherical_trace(theta, obs, cfg.horizon), "s_k"
        index = range(0, cfg.horizon)
    elif scheme == "cesaro_spherical":
        values, name = cesaro_spherical_trace(theta, obs, cfg.horizon), "Phi_n"
        index = range(1, cfg.horizon + 1)
    else:
        values, name = psi_trace(theta, obs, cfg.horizon)[0], "Psi_n"
        index = range(1, cfg.horizon + 1)
    results = {"theta": str(theta), "quantity": name, "final": float(values[-1])}
    rows = [(i, float(v)) for i, v in zip(index, values)]
    summary = [f"{name} at theta={theta}: final value {float(values[-1]):.12g}"]
    if witness is not None:
        target_value = float(obs(witness.target))
        errors = np.abs(values - target_value)
        results.update(witness=witness.to_dict(), phi_target=target_value, final_error=float(errors[-1]))
        rows = [(i, float(v), float(e)) for i, v, e in zip(index, values, errors)]
        summary.append(f"error against phi(target) {float(errors[-1]):.6g}")
        return TaskResult(results, ["index", "value", "error"], rows, summary)
    return TaskResult(results, ["index", "value"], rows, summary)


def task_psi_bound(cfg: ScenarioConfig) -> TaskResult:
    theta, witness = builders.circle_theta(cfg.system)
    if witness is None:
        raise LabError("CONFIG_INVALID", "psi-bound needs target/a/b/branch, not a bare theta")
    obs = builders.build_observable(cfg.observable, cfg.system)
    sup = cfg.system.get("sup_norm")
    start = max(2, max(witness.a, witness.b) + 1)
    if cfg.horizon < start:
        raise LabError("HORIZON_TOO_SMALL", f"horizon must be at least {start} for this witness")
    checks = psi_bound_rows(witness, obs, range(start, cfg.horizon + 1), sup)
    all_hold = all(c.holds for c in checks)
    results = {
        "witness": witness.to_dict(),
        "sup_norm": sup,
        "n_range": [start, cfg.horizon],
        "rows": len(checks),
        "all_hold": all_hold,
        "min_margin": min(c.bound - c.lhs for c in checks) if checks else None,
    }
    rows = [(c.n, c.lhs, c.bound, c.holds) for c in checks]
    summary = [f"{sum(c.holds for c in checks)}/{len(checks)} horizons satisfy the bound"]
    return TaskResult(results, ["n", "lhs", "bound", "holds"], rows, summary)


def task_reciprocal(cfg: ScenarioConfig) -> TaskResult:
    """Orbit of ``1`` in ``X = {1/n} U {0}``: dense in ``X``, averages converge to ``phi(0)``.

    Density is measured relative to ``X``: the reference cells are those met by
    ``X`` itself (every ``1/n`` with ``n <= 1/resolution + 1``, and ``0``).
    """
    resolution = cfg.system.get("resolution", 0.01)
    obs = builders.build_observable(cfg.observable, cfg.system)
    orbit = reciprocal_orbit(cfg.horizon)
    space_cells = orbit_density(reciprocal_orbit(math.ceil(1 / resolution) + 1) + [Fraction(0)], resolution).visited
    orbit_cells = orbit_density(orbit, resolution).visited
    covered = len(orbit_cells & space_cells) / len(space_cells)
    values = np.array([obs(p) for p in orbit])
    averages, rep = _oscillation(values, cfg)
    results = {
        "resolution": resolution,
        "cells_met_by_space": len(space_cells),
        "covered_fraction_of_space": covered,
        "status": "diagnostic-passed" if covered >= 1.0 else "diagnostic-incomplete",
        "phi_at_limit": float(obs(Fraction(0))),
        "oscillation": rep.to_dict(False),
        "irregularity_indicated": indicates_irregularity(rep, 2 * cfg.tolerances.cluster_tol),
    }
    summary = [f"covered fraction of X {covered:.4f}; average at n={cfg.horizon} {averages[-1]:.6f} (phi(0) = {results['phi_at_limit']:.6f})"]
    return TaskResult(results, ["seed", "n", "average"], _stride_rows(averages, _stride(cfg, 16), (cfg.seeds[0],)), summary)


TASKS: dict[str, Callable[[ScenarioConfig], TaskResult]] = {
    "birkhoff_shift": task_birkhoff_shift,
    "shift_sensitivity": task_shift_sensitivity,
    "cylinder_density": task_cylinder_density,
    "transitive_bounds": task_transitive_bounds,
    "sft_shadow": task_sft_shadow,
    "dichotomy": task_dichotomy,
    "kan_scan": task_kan_scan,
    "kan_measures": task_kan_measures,
    "folner": task_folner,
    "tempered": task_tempered,
    "circle_averages": task_circle_averages,
    "psi_bound": task_psi_bound,
    "reciprocal": task_reciprocal,
}


def execute(cfg: ScenarioConfig) -> tuple[dict, TaskResult]:
    """Run the task behind ``cfg`` and return ``(report, result)`` without writing files."""
    result = TASKS[cfg.task](cfg)
    report = {
        "scenario": cfg.scenario,
        "task": cfg.task,
        "version": __version__,
        "config": cfg.to_dict(include_output_dir=False),
        "results": result.results,
    }
    return report, result


def run_scenario(config: ScenarioConfig, output_dir: str | Path | None = None) -> RunManifest:
    """Execute ``config`` and write ``averages.csv``, ``report.json`` and ``manifest.json``."""
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    report, result = execute(config)
    write_csv(out / AVERAGES, result.header, result.rows)
    write_json(out / REPORT, report)
    elapsed = time.perf_counter() - started
    artifacts = tuple(
        {"path": name, "sha256": sha256_file(out / name), "bytes": (out / name).stat().st_size}
        for name in (AVERAGES, REPORT)
    )
    echo = config.to_dict()
    echo["output_dir"] = str(out)
    manifest = RunManifest(echo, artifacts, elapsed, __version__, out, tuple(result.summary))
    write_json(out / MANIFEST, manifest.to_dict())
    return manifest
