"""Experiment runners behind the command-line interface.

Each runner turns a validated ExperimentConfig into a ResultBundle of
traces, matrices, tables, and a summary dict; ``emit`` writes the bundle
as CSV/JSON plus optional figures.  Every runner is deterministic in
(config, seed): reruns produce byte-identical CSVs.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .applications import (
    LogDetProblem,
    MetricFitConfig,
    MetricLearnProblem,
    PcaFitConfig,
    PcaProblem,
    bw_sq_distance,
    fit_gmm,
    geodesic_convexity_report,
    metric_learn_fit,
    nearest_neighbor_accuracy,
    pca_fit,
    reduced_bw_sq_distance,
    separation_ratio,
)
from .barycenter import BarycenterProblem, barycenter, optimality_residual
from .datasets import gmm_synthetic, ingest_covariances, random_spd, two_class_spd_dataset
from .geometry import GbwManifold
from .io import read_matrix_csv, write_matrix_csv, write_summary_json
from .linalg import GbwParam, SpdMatrix, _spd_power, _sym
from .manifolds import make_manifold
from .solvers import SgdConfig, SolveTrace, TrustRegionConfig, trust_region

__all__ = [
    "COMMANDS",
    "GEOMETRY_CHOICES",
    "ConfigError",
    "ExperimentConfig",
    "ResultBundle",
    "load_file_config",
    "build_config",
    "run",
    "emit",
]

COMMANDS = ("logdet", "gmm", "pca", "metric", "barycenter", "distance", "convexity")

# The user-facing geometry tokens; "gbw" selects the iterate-adapted metric.
GEOMETRY_CHOICES = ("ai", "bw", "gbw")
_GEOM_KIND = {"ai": "ai", "bw": "bw", "gbw": "gbw_adaptive"}


class ConfigError(ValueError):
    """Invalid experiment configuration (bad knob, unknown key, missing file)."""


@dataclass
class ExperimentConfig:
    command: str
    n: int = 20
    d: int = 5
    k: int = 2
    cond: float = 10.0
    geometry: tuple = ("ai", "bw", "gbw")
    seed: int = 7
    tol: float = 1e-9
    max_iters: int = 500
    step0: float = 5e-2
    decay: float = 1e-3
    batch: int = 50
    epochs: int = 50
    samples: int = 2000
    trials: int = 10
    group_size: int = 50
    cadence: int = 0
    data: Optional[str] = None
    out: str = ""
    no_plots: bool = False


# Per-command defaults layered over the dataclass baseline.
_DEFAULTS = {
    "logdet": {},
    "gmm": {"n": 2, "geometry": ("gbw",)},
    "pca": {"samples": 20, "tol": 1e-5, "max_iters": 200, "step0": 1e-2, "geometry": ("bw",)},
    "metric": {"samples": 8, "tol": 1e-6, "max_iters": 150, "step0": 1e-2, "geometry": ("bw",)},
    "barycenter": {"samples": 10, "tol": 1e-10, "max_iters": 1000, "geometry": ("bw",)},
    "distance": {"samples": 8, "geometry": ("bw", "gbw", "ai")},
    # k = 0 means "use the full spectrum" for the eigenvalue-sum function.
    "convexity": {"n": 4, "trials": 100, "k": 0},
}

# Keys each command accepts from config files and flags.
_ALLOWED = {
    "logdet": {"n", "cond", "geometry", "seed", "tol", "max_iters", "cadence", "out", "no_plots"},
    "gmm": {"n", "k", "geometry", "seed", "samples", "epochs", "batch", "step0", "decay", "data", "out", "no_plots"},
    "pca": {"n", "d", "samples", "trials", "seed", "tol", "max_iters", "step0", "out", "no_plots"},
    "metric": {"n", "d", "samples", "seed", "tol", "max_iters", "step0", "out", "no_plots"},
    "barycenter": {"n", "samples", "geometry", "seed", "tol", "max_iters", "data", "group_size", "out", "no_plots"},
    "distance": {"n", "samples", "geometry", "seed", "data", "group_size", "out", "no_plots"},
    "convexity": {"n", "k", "trials", "seed", "out", "no_plots"},
}

_INT_KEYS = {"n", "d", "k", "seed", "max_iters", "batch", "epochs", "samples", "trials", "group_size", "cadence"}
_FLOAT_KEYS = {"cond", "tol", "step0", "decay"}
_BOOL_KEYS = {"no_plots"}


def _coerce(key: str, raw):
    if key == "geometry":
        if isinstance(raw, str):
            parts = tuple(p.strip() for p in raw.split(",") if p.strip())
        else:
            parts = tuple(raw)
        if not parts:
            raise ConfigError("geometry list must be nonempty")
        return parts
    try:
        if key in _INT_KEYS:
            return int(str(raw))
        if key in _FLOAT_KEYS:
            return float(str(raw))
        if key in _BOOL_KEYS:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    return str(raw)


def load_file_config(path: str, command: str) -> dict:
    """Read the ``[command]`` section of a key = value config file."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if command not in parser:
        return {}
    out = {}
    for key, raw in parser[command].items():
        if key not in _ALLOWED[command]:
            raise ConfigError(f"unknown config key for {command}: {key}")
        out[key] = _coerce(key, raw)
    return out


def _positive(cfg, name, strict=True, minimum=None):
    val = getattr(cfg, name)
    if minimum is not None:
        if val < minimum:
            raise ConfigError(f"{name} must be >= {minimum}, got {val}")
    elif strict:
        if not val > 0:
            raise ConfigError(f"{name} must be positive, got {val}")
    elif val < 0:
        raise ConfigError(f"{name} must be nonnegative, got {val}")
    return val


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command: {cfg.command}")
    _positive(cfg, "n", minimum=1)
    _positive(cfg, "seed", strict=False)
    _positive(cfg, "max_iters", minimum=1)
    _positive(cfg, "tol")
    _positive(cfg, "step0")
    _positive(cfg, "decay", strict=False)
    _positive(cfg, "batch", minimum=1)
    _positive(cfg, "epochs", minimum=1)
    _positive(cfg, "samples", minimum=1)
    _positive(cfg, "trials", minimum=1)
    _positive(cfg, "group_size", minimum=2)
    _positive(cfg, "cadence", strict=False)
    if cfg.cond < 1.0:
        raise ConfigError(f"cond must be >= 1, got {cfg.cond}")
    if cfg.command in ("pca", "metric") and not 1 <= cfg.d <= cfg.n:
        raise ConfigError(f"d must satisfy 1 <= d <= n={cfg.n}, got {cfg.d}")
    if cfg.command == "gmm" and cfg.k < 1:
        raise ConfigError(f"k must be >= 1, got {cfg.k}")
    if cfg.command == "convexity" and not 0 <= cfg.k <= cfg.n:
        raise ConfigError(f"k must satisfy 0 <= k <= n={cfg.n} (0 = all), got {cfg.k}")
    if not cfg.geometry:
        raise ConfigError("geometry list must be nonempty")
    allowed_geoms = ("bw", "gbw") if cfg.command == "barycenter" else GEOMETRY_CHOICES
    for g in cfg.geometry:
        if g not in allowed_geoms:
            raise ConfigError(
                f"unknown geometry {g!r} for {cfg.command}; choose from {allowed_geoms}"
            )
    if cfg.data is not None and not os.path.exists(cfg.data):
        raise ConfigError(f"data file not found: {cfg.data}")
    return cfg


def build_config(command: str, file_values: Optional[dict] = None, flag_values: Optional[dict] = None) -> ExperimentConfig:
    """Layer defaults < config file < flags, then validate."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command: {command}")
    merged = dict(_DEFAULTS[command])
    for source in (file_values or {}, flag_values or {}):
        for key, val in source.items():
            if val is None:
                continue
            if key not in _ALLOWED[command]:
                raise ConfigError(f"unknown config key for {command}: {key}")
            merged[key] = _coerce(key, val)
    cfg = ExperimentConfig(command=command, **merged)
    if not cfg.out:
        cfg.out = os.path.join("gbw_runs", command)
    return validate(cfg)


@dataclass
class ResultBundle:
    command: str
    config: dict
    summary: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)
    failed: bool = False
    failure: str = ""


def _bundle(cfg: ExperimentConfig) -> ResultBundle:
    echo = asdict(cfg)
    echo["geometry"] = list(cfg.geometry)
    return ResultBundle(command=cfg.command, config=echo)


def _load_spd_set(cfg: ExperimentConfig, rng):
    """SPD matrices for set-valued commands: ingested or synthetic."""
    if cfg.data is not None:
        try:
            ingested = ingest_covariances(cfg.data, group_size=cfg.group_size)
        except ValueError as exc:
            raise ConfigError(f"cannot ingest {cfg.data}: {exc}") from exc
        if not ingested:
            raise ConfigError(f"{cfg.data}: no complete groups of size {cfg.group_size}")
        return [s.cov.mat for s in ingested], [s.label for s in ingested]
    mats = [random_spd(rng, cfg.n).mat for _ in range(cfg.samples)]
    return mats, [str(i) for i in range(len(mats))]


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------


def run_logdet(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    prob = LogDetProblem.from_condition(rng, cfg.n, cfg.cond)
    obj = prob.objective()
    star_norm = float(np.linalg.norm(prob.x_star, ord=2))
    bundle = _bundle(cfg)
    bundle.matrices["logdet_x_star"] = prob.x_star
    geoms = {}
    for geom in cfg.geometry:
        man = make_manifold(_GEOM_KIND[geom], n=cfg.n)
        res = trust_region(
            man,
            obj,
            np.eye(cfg.n),
            TrustRegionConfig(
                gtol=cfg.tol,
                max_outer=cfg.max_iters,
                rebase_cadence=cfg.cadence,
                reference=prob.x_star,
            ),
        )
        bundle.traces[f"logdet_{geom}"] = res.trace
        rel = float(np.linalg.norm(res.point - prob.x_star, ord=2)) / star_norm
        geoms[geom] = {
            "converged": res.converged,
            "stop_reason": res.stop_reason,
            "outer_iterations": res.n_outer,
            "cumulative_inner_iterations": res.cumulative_inner,
            "final_cost": res.cost,
            "final_grad_norm": res.grad_norm,
            "rel_spectral_error": rel,
        }
    bundle.summary = {"cond": cfg.cond, "n": cfg.n, "geometries": geoms}
    bundle.figures.append(
        {
            "kind": "convergence",
            "name": "logdet_convergence",
            "traces": sorted(bundle.traces),
            "x": "cumulative_inner_iters",
            "y": "dist_to_ref",
            "logy": True,
            "title": f"distance to optimum, cond={cfg.cond:g}",
        }
    )
    return bundle


def run_gmm(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    if cfg.data is not None:
        try:
            data = read_matrix_csv(cfg.data)
        except ValueError as exc:
            raise ConfigError(f"cannot read {cfg.data}: {exc}") from exc
    else:
        data = gmm_synthetic(rng, cfg.n, cfg.samples, k=cfg.k)
    bundle = _bundle(cfg)
    geoms = {}
    pilot_epochs = min(5, cfg.epochs)
    candidates = [cfg.step0 / 4.0, cfg.step0, cfg.step0 * 4.0]
    for geom in cfg.geometry:
        kind = _GEOM_KIND[geom]
        pilot_costs = []
        for s0 in candidates:
            _, pilot = fit_gmm(
                data,
                cfg.k,
                kind=kind,
                config=SgdConfig(
                    step0=s0, decay=cfg.decay, batch_size=cfg.batch,
                    epochs=pilot_epochs, seed=cfg.seed,
                ),
            )
            pilot_costs.append(
                float("inf") if pilot.aborted else float(pilot.trace.rows[-1][2])
            )
        best = candidates[int(np.argmin(pilot_costs))]
        model, res = fit_gmm(
            data,
            cfg.k,
            kind=kind,
            config=SgdConfig(
                step0=best, decay=cfg.decay, batch_size=cfg.batch,
                epochs=cfg.epochs, seed=cfg.seed,
            ),
        )
        bundle.traces[f"gmm_{geom}"] = res.trace
        for j, p in enumerate(model.precisions):
            bundle.matrices[f"gmm_{geom}_component_{j}"] = p
        first, last = res.trace.rows[0], res.trace.rows[-1]
        geoms[geom] = {
            "step0_candidates": candidates,
            "pilot_final_costs": pilot_costs,
            "chosen_step0": best,
            "aborted": res.aborted,
            "stop_reason": res.stop_reason,
            "epochs": cfg.epochs,
            "initial_cost": first[2],
            "final_cost": last[2],
            "initial_grad_proxy": first[3],
            "final_grad_proxy": last[3],
            "weights": model.weights.tolist(),
        }
        if res.aborted:
            bundle.failed = True
            bundle.failure = f"stochastic solver aborted for geometry {geom}: {res.stop_reason}"
    bundle.summary = {"n": data.shape[1], "n_samples": data.shape[0], "k": cfg.k, "geometries": geoms}
    bundle.figures.append(
        {
            "kind": "convergence",
            "name": "gmm_grad_proxy",
            "traces": sorted(bundle.traces),
            "x": "iter",
            "y": "grad_norm",
            "logy": True,
            "title": "full-data gradient proxy per epoch",
        }
    )
    return bundle


def run_pca(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    samples, labels = two_class_spd_dataset(rng, cfg.n, cfg.samples)
    mats = [s.mat for s in samples]
    labels = np.asarray(labels)
    bundle = _bundle(cfg)
    split_rows = []
    monotone_all = True
    for split in range(cfg.trials):
        srng = np.random.default_rng(cfg.seed + 1000 + split)
        perm = srng.permutation(len(mats))
        half = len(mats) // 2
        tr_idx, te_idx = perm[:half], perm[half:]
        train = [mats[i] for i in tr_idx]
        test = [mats[i] for i in te_idx]
        prob = PcaProblem.from_samples(train, cfg.d)
        fit = pca_fit(
            prob,
            PcaFitConfig(
                max_iters=cfg.max_iters, tol=cfg.tol, step0=cfg.step0,
                seed=cfg.seed + split,
            ),
        )
        vals = [row[2] for row in fit.trace.rows]
        monotone = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        monotone_all = monotone_all and monotone
        acc_full = nearest_neighbor_accuracy(
            train, labels[tr_idx], test, labels[te_idx], bw_sq_distance
        )
        acc_red = nearest_neighbor_accuracy(
            train,
            labels[tr_idx],
            test,
            labels[te_idx],
            lambda a, b: reduced_bw_sq_distance(a, b, fit.w),
        )
        bundle.traces[f"pca_split_{split:02d}"] = fit.trace
        split_rows.append(
            [split, acc_full, acc_red, fit.value, int(monotone), int(fit.converged)]
        )
        if split == 0:
            bundle.matrices["pca_w_split_00"] = fit.w
    accs_full = [r[1] for r in split_rows]
    accs_red = [r[2] for r in split_rows]
    bundle.tables["pca_splits"] = (
        ["split", "acc_full", "acc_reduced", "objective", "monotone", "converged"],
        split_rows,
    )
    bundle.summary = {
        "n": cfg.n,
        "d": cfg.d,
        "splits": cfg.trials,
        "mean_acc_full": float(np.mean(accs_full)),
        "mean_acc_reduced": float(np.mean(accs_red)),
        "min_acc_reduced": float(np.min(accs_red)),
        "accuracy_gap": float(np.mean(accs_full) - np.mean(accs_red)),
        "objective_monotone_all_splits": monotone_all,
    }
    bundle.figures.append(
        {
            "kind": "convergence",
            "name": "pca_objective",
            "traces": sorted(bundle.traces),
            "x": "iter",
            "y": "cost",
            "logy": False,
            "title": "projected spread along the ascent",
        }
    )
    return bundle


def run_metric(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    samples, labels = two_class_spd_dataset(rng, cfg.n, cfg.samples)
    mats = [s.mat for s in samples]
    prob = MetricLearnProblem(mats, labels)
    fit = metric_learn_fit(
        prob,
        cfg.d,
        MetricFitConfig(
            max_iters=cfg.max_iters, tol=cfg.tol, step0=cfg.step0, seed=cfg.seed
        ),
    )
    before = separation_ratio(prob, np.eye(cfg.n))
    after = separation_ratio(prob, fit.w)
    vals = [row[2] for row in fit.trace.rows]
    bundle = _bundle(cfg)
    bundle.traces["metric_loss"] = fit.trace
    bundle.matrices["metric_w"] = fit.w
    bundle.matrices["metric_s"] = fit.s
    bundle.summary = {
        "n": cfg.n,
        "d": cfg.d,
        "pairs": len(mats) * (len(mats) - 1) // 2,
        "separation_ratio_identity": before,
        "separation_ratio_fitted": after,
        "ratio_decreased": bool(after < before),
        "loss_monotone": all(b <= a + 1e-12 for a, b in zip(vals, vals[1:])),
        "converged": fit.converged,
        "final_loss": fit.value,
    }
    bundle.figures.append(
        {
            "kind": "convergence",
            "name": "metric_loss",
            "traces": ["metric_loss"],
            "x": "iter",
            "y": "cost",
            "logy": False,
            "title": "pair loss along the descent",
        }
    )
    return bundle


def run_barycenter(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    mats, _ = _load_spd_set(cfg, rng)
    bundle = _bundle(cfg)
    geoms = {}
    for geom in cfg.geometry:
        if geom == "gbw":
            m = _sym(sum(mats) / len(mats))
            man = GbwManifold(GbwParam(SpdMatrix(m)))
        else:
            man = GbwManifold.bures_wasserstein(mats[0].shape[0])
        prob = BarycenterProblem(man, mats)
        res = barycenter(prob, tol=cfg.tol, max_iters=cfg.max_iters)
        trace = SolveTrace()
        trace.append(0, 0, res.objective_trace[0], None, None, None)
        for i, obj_val in enumerate(res.objective_trace[1:], start=1):
            trace.append(i, 0, obj_val, None, res.change_trace[i - 1], None)
        bundle.traces[f"barycenter_{geom}"] = trace
        bundle.matrices[f"barycenter_{geom}"] = res.point.mat
        geoms[geom] = {
            "converged": res.converged,
            "iterations": res.n_iters,
            "final_objective": res.objective_trace[-1],
            "optimality_residual": optimality_residual(prob, res.point),
        }
    bundle.summary = {"n": mats[0].shape[0], "count": len(mats), "geometries": geoms}
    bundle.figures.append(
        {
            "kind": "convergence",
            "name": "barycenter_objective",
            "traces": sorted(bundle.traces),
            "x": "iter",
            "y": "cost",
            "logy": False,
            "title": "weighted variance along the fixed-point iteration",
        }
    )
    return bundle


def _ai_distance(x: np.ndarray, y: np.ndarray) -> float:
    irt = _spd_power(x, -0.5)
    w = np.linalg.eigvalsh(_sym(irt @ y @ irt))
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def run_distance(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    mats, _ = _load_spd_set(cfg, rng)
    count = len(mats)
    bundle = _bundle(cfg)
    geoms = {}
    for geom in cfg.geometry:
        if geom == "ai":
            dist = _ai_distance
        elif geom == "gbw":
            m = _sym(sum(mats) / len(mats))
            man = GbwManifold(GbwParam(SpdMatrix(m)))
            dist = lambda a, b: man.distance(a, b)  # noqa: E731
        else:
            dist = lambda a, b: float(np.sqrt(bw_sq_distance(a, b)))  # noqa: E731
        dmat = np.zeros((count, count))
        for i in range(count):
            for j in range(i + 1, count):
                dmat[i, j] = dmat[j, i] = dist(mats[i], mats[j])
        triangle_violations = 0
        for i in range(count):
            for j in range(count):
                for l in range(count):
                    if dmat[i, l] > dmat[i, j] + dmat[j, l] + 1e-8:
                        triangle_violations += 1
        bundle.matrices[f"distance_{geom}"] = dmat
        geoms[geom] = {
            "max_distance": float(dmat.max()),
            "mean_offdiag": float(dmat.sum() / (count * (count - 1))) if count > 1 else 0.0,
            "triangle_violations": triangle_violations,
        }
        bundle.figures.append(
            {
                "kind": "heatmap",
                "name": f"distance_{geom}",
                "matrix": f"distance_{geom}",
                "title": f"pairwise distance, geometry={geom}",
            }
        )
    bundle.summary = {"count": count, "n": mats[0].shape[0], "geometries": geoms}
    return bundle


def run_convexity(cfg: ExperimentConfig) -> ResultBundle:
    rng = np.random.default_rng(cfg.seed)
    k = cfg.n if cfg.k == 0 else cfg.k
    report = geodesic_convexity_report(cfg.n, rng, trials=cfg.trials, k=k)
    bundle = _bundle(cfg)
    rows = [
        [r.function, r.trials, r.checks, r.max_gap, r.violations]
        for r in report.rows
    ]
    bundle.tables["convexity_report"] = (
        ["function", "trials", "checks", "max_gap", "violations"],
        rows,
    )
    bundle.summary = {
        "n": cfg.n,
        "trials": cfg.trials,
        "k": k,
        "total_violations": report.total_violations,
        "max_gaps": {r.function: r.max_gap for r in report.rows},
    }
    bundle.figures.append(
        {
            "kind": "bars",
            "name": "convexity_gaps",
            "labels": [r.function for r in report.rows],
            "values": [max(r.max_gap, 1e-18) for r in report.rows],
            "logy": True,
            "title": "worst chord gap per function (<= 1e-9 passes)",
        }
    )
    return bundle


_RUNNERS = {
    "logdet": run_logdet,
    "gmm": run_gmm,
    "pca": run_pca,
    "metric": run_metric,
    "barycenter": run_barycenter,
    "distance": run_distance,
    "convexity": run_convexity,
}


def run(cfg: ExperimentConfig) -> ResultBundle:
    return _RUNNERS[cfg.command](cfg)


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------


def _write_table_csv(path: str, header, rows) -> str:
    def fmt(v):
        if isinstance(v, bool):
            return str(int(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def emit(bundle: ResultBundle, out_dir: str, plots: bool = True, wall_time_s: Optional[float] = None) -> list:
    """Write the bundle under ``out_dir``; returns the written paths.

    Trace and matrix CSVs are bytewise deterministic in (config, seed);
    wall time lives only in the JSON summary.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in sorted(bundle.traces):
        path = os.path.join(out_dir, f"{name}_trace.csv")
        bundle.traces[name].write_csv(path)
        written.append(path)
    for name in sorted(bundle.matrices):
        path = os.path.join(out_dir, f"{name}.csv")
        write_matrix_csv(path, bundle.matrices[name])
        written.append(path)
    for name in sorted(bundle.tables):
        header, rows = bundle.tables[name]
        path = os.path.join(out_dir, f"{name}.csv")
        _write_table_csv(path, header, rows)
        written.append(path)
    summary = {
        "command": bundle.command,
        "config": bundle.config,
        "version": __version__,
        "results": bundle.summary,
        "failed": bundle.failed,
        "failure": bundle.failure,
    }
    if wall_time_s is not None:
        summary["wall_time_s"] = float(wall_time_s)
    path = os.path.join(out_dir, "summary.json")
    write_summary_json(path, summary)
    written.append(path)
    if plots:
        from .plotting import bar_figure, convergence_figure, heatmap_figure

        for spec in bundle.figures:
            path = os.path.join(out_dir, f"{spec['name']}.png")
            if spec["kind"] == "convergence":
                convergence_figure(
                    {name: bundle.traces[name] for name in spec["traces"]},
                    path,
                    x_col=spec["x"],
                    y_col=spec["y"],
                    logy=spec["logy"],
                    title=spec.get("title", ""),
                )
            elif spec["kind"] == "heatmap":
                heatmap_figure(bundle.matrices[spec["matrix"]], path, title=spec.get("title", ""))
            elif spec["kind"] == "bars":
                bar_figure(
                    spec["labels"], spec["values"], path,
                    title=spec.get("title", ""), logy=spec.get("logy", False),
                )
            else:
                raise ValueError(f"unknown figure kind {spec['kind']!r}")
            written.append(path)
    return written
