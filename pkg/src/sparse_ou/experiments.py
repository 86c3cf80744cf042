"""Simulation studies: heatmap example (one replication) and error-vs-dimension sweep.

Per-replication seeds come from ``SeedSequence(master_seed, spawn_key=(d, rep))``,
so results do not depend on scheduling or on which other cells are run.
"""
from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import plotting
from .estimate import (
    SUPPORT_TAU, DantzigConfig, LassoConfig, dantzig, lambda_plugin, lambda_rule, lasso, mle,
)
from .exceptions import SparseOUError
from .io import dump_json, fmt, write_matrix_csv
from .model import ergodic_constants, generate_sparse_stable, norm_frobenius, norm_l1
from .simulate import Scheme, SimConfig, simulate_path, sufficient_stats

log = logging.getLogger(__name__)

METHODS = ("mle", "lasso", "dantzig")
NORMS = ("l1", "frobenius")
LAMBDA_MODES = ("theoretical", "plugin", "fixed")


@dataclass(frozen=True)
class ExperimentConfig:
    d_values: tuple = tuple(range(5, 21))
    rho: float = 0.3
    t_horizon: float = 300.0
    n_steps: int = 500_000
    n_reps: int = 10
    lambda_mode: str = "plugin"
    eps0: float = 0.1
    lambda_value: float | None = None
    seed: int = 0
    scheme: str = "exact"
    margin: float = 0.5
    tau: float = SUPPORT_TAU
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values))
        object.__setattr__(self, "scheme", Scheme(self.scheme).value)
        if not self.d_values:
            raise ValueError("d_values is empty")
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ValueError(f"lambda_mode must be one of {LAMBDA_MODES}")
        if self.lambda_mode == "fixed" and (self.lambda_value is None or self.lambda_value < 0):
            raise ValueError("fixed lambda mode needs lambda_value >= 0")
        if self.lambda_mode != "fixed" and not 0 < self.eps0 < 1:
            raise ValueError("eps0 must lie in (0, 1)")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        for d in self.d_values:
            s = self.sparsity(d)
            if s < d:
                raise ValueError(f"round(rho d^2) = {s} < d = {d}: the diagonal does not fit")
            if s > d * d:
                raise ValueError(f"rho = {self.rho} gives s > d^2 at d = {d}")

    def sparsity(self, d):
        # round half away from zero, independent of banker's rounding
        return int(math.floor(self.rho * d * d + 0.5))

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["d_values"] = list(self.d_values)
        return out

    @classmethod
    def from_dict(cls, obj):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ValueError(f"unknown experiment config keys: {', '.join(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(FsPath(path).read_text()))


def task_seeds(master, d, rep):
    """(model seed, path seed) for one cell."""
    ss = np.random.SeedSequence(int(master), spawn_key=(int(d), int(rep)))
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)


def support_metrics(a_hat, a0, tau=SUPPORT_TAU):
    """Precision, recall and F1 of {|a_hat| > tau} against the true support."""
    a_hat, a0 = np.asarray(a_hat), np.asarray(a0)
    if a_hat.shape != a0.shape:
        raise ValueError(f"shape mismatch: {a_hat.shape} vs {a0.shape}")
    if not tau > 0:
        raise ValueError("tau must be positive")
    pred = np.abs(a_hat) > tau
    true = a0 != 0
    tp = int(np.sum(pred & true))
    precision = tp / pred.sum() if pred.any() else 1.0
    recall = tp / true.sum() if true.any() else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return float(precision), float(recall), float(f1)


def _choose_lambda(cfg, model, stats):
    if cfg.lambda_mode == "fixed":
        return float(cfg.lambda_value)
    if cfg.lambda_mode == "plugin":
        return lambda_plugin(stats, cfg.eps0)
    return lambda_rule(model.d, stats.t_horizon, cfg.eps0, ergodic_constants(model.a0))


def fit_all(cfg, d, rep):
    """Generate, simulate and estimate one cell. Returns (model, lam, {method: result}, seeds)."""
    model_seed, path_seed = task_seeds(cfg.seed, d, rep)
    model = generate_sparse_stable(d, cfg.sparsity(d), cfg.margin, model_seed)
    sim = SimConfig(cfg.t_horizon, cfg.n_steps, cfg.scheme, path_seed)
    stats = sufficient_stats(simulate_path(model, sim))
    lam = _choose_lambda(cfg, model, stats)
    fits = {
        "mle": mle(stats),
        "lasso": lasso(stats, LassoConfig(lam=lam)),
        "dantzig": dantzig(stats, DantzigConfig(lam=lam)),
    }
    return model, lam, fits, (model_seed, path_seed)


def _replicate(args):
    cfg, d, rep = args
    try:
        model, lam, fits, seeds = fit_all(cfg, d, rep)
    except (SparseOUError, np.linalg.LinAlgError) as exc:
        seeds = task_seeds(cfg.seed, d, rep)
        return [
            {"d": d, "rep": rep, "method": m, "status": f"failed: {exc}", "lambda": math.nan,
             "model_seed": seeds[0], "path_seed": seeds[1]}
            for m in METHODS
        ]
    rows = []
    a0 = model.a0
    for m in METHODS:
        res = fits[m]
        err = res.a_hat - a0
        prec, rec, f1 = support_metrics(res.a_hat, a0, cfg.tau)
        rows.append({
            "d": d, "rep": rep, "method": m, "status": res.status,
            "lambda": res.lam if m != "mle" else lam,
            "l1": norm_l1(err) / norm_l1(a0),
            "frobenius": norm_frobenius(err) / norm_frobenius(a0),
            "precision": prec, "recall": rec, "f1": f1,
            "model_seed": seeds[0], "path_seed": seeds[1],
        })
    return rows


def _mean_std(values):
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


@dataclass
class ErrorReport:
    summary: list
    support: list
    raw: list
    meta: dict = field(default_factory=dict)

    def cell(self, d, method, norm="frobenius"):
        for r in self.summary:
            if r["d"] == d and r["method"] == method and r["norm"] == norm:
                return r
        raise KeyError((d, method, norm))

    def support_cell(self, d, method):
        for r in self.support:
            if r["d"] == d and r["method"] == method:
                return r
        raise KeyError((d, method))


def _aggregate(raw, cfg):
    summary, support = [], []
    for d in cfg.d_values:
        for m in METHODS:
            ok = [r for r in raw if r["d"] == d and r["method"] == m
                  and not r["status"].startswith("failed")]
            lam_mean, _ = _mean_std([r["lambda"] for r in ok])
            for norm in NORMS:
                mean, std = _mean_std([r[norm] for r in ok])
                summary.append({
                    "d": d, "method": m, "norm": norm, "mean": mean, "std": std,
                    "n_ok": len(ok), "lambda_mode": cfg.lambda_mode, "lambda_mean": lam_mean,
                })
            p, _ = _mean_std([r["precision"] for r in ok])
            rc, _ = _mean_std([r["recall"] for r in ok])
            f, fs = _mean_std([r["f1"] for r in ok])
            support.append({
                "d": d, "method": m, "precision": p, "recall": rc, "f1": f, "f1_std": fs,
                "n_ok": len(ok), "tau": cfg.tau,
            })
    return summary, support


def _csv_text(rows, columns):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else fmt(v)
    return v


SUMMARY_COLUMNS = ["d", "method", "norm", "mean", "std", "n_ok", "lambda_mode", "lambda_mean"]
SUPPORT_COLUMNS = ["d", "method", "precision", "recall", "f1", "f1_std", "n_ok", "tau"]
RAW_COLUMNS = ["d", "rep", "method", "status", "lambda", "l1", "frobenius", "precision",
               "recall", "f1", "model_seed", "path_seed"]

QUALITATIVE_NOTE = (
    "Drift-matrix law, tuning parameter and colour scale of the original study are unreported; "
    "these outputs are qualitative-trend reproductions."
)


def run_fig2(cfg, out_dir=None):
    """Relative errors (L1, Frobenius) and support metrics of MLE/Lasso/Dantzig across d."""
    start = time.perf_counter()
    tasks = [(cfg, d, rep) for d in cfg.d_values for rep in range(cfg.n_reps)]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            chunks = list(pool.map(_replicate, tasks))
    else:
        chunks = []
        for t in tasks:
            log.info("fig2: d=%d rep=%d", t[1], t[2])
            chunks.append(_replicate(t))
    raw = sorted((r for c in chunks for r in c),
                 key=lambda r: (r["d"], r["rep"], METHODS.index(r["method"])))
    summary, support = _aggregate(raw, cfg)
    failed = sorted({(r["d"], r["rep"]) for r in raw if r["status"].startswith("failed")})
    meta = {
        "kind": "fig2",
        "config": cfg.to_dict(),
        "scheme": cfg.scheme,
        "lambda_mode": cfg.lambda_mode,
        "cells": [
            {"d": r["d"], "rep": r["rep"], "lambda": r["lambda"], "model_seed": r["model_seed"],
             "path_seed": r["path_seed"]}
            for r in raw if r["method"] == "lasso"
        ],
        "failed_cells": [list(c) for c in failed],
        "note": QUALITATIVE_NOTE,
        "wall_time_s": time.perf_counter() - start,
    }
    report = ErrorReport(summary=summary, support=support, raw=raw, meta=meta)
    if out_dir is not None:
        write_fig2(report, out_dir)
    return report


def write_fig2(report, out_dir):
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fig2_summary.csv").write_text(_csv_text(report.summary, SUMMARY_COLUMNS))
    (out / "fig2_support.csv").write_text(_csv_text(report.support, SUPPORT_COLUMNS))
    (out / "fig2_raw.csv").write_text(_csv_text(report.raw, RAW_COLUMNS))
    for norm in NORMS:
        plotting.error_curves(report.summary, norm, out / f"fig2_{norm}.svg")
    dump_json(_jsonable(report.meta), out / "run_meta.json")


def _jsonable(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


FIG1_NAMES = ("a0", "mle", "lasso", "dantzig")


def run_fig1(d, cfg, out_dir=None):
    """One replication at dimension d: true drift and the three estimates, on a shared scale."""
    start = time.perf_counter()
    model, lam, fits, seeds = fit_all(cfg, d, 0)
    mats = {"a0": model.a0, **{m: fits[m].a_hat for m in METHODS}}
    vmax = max(float(np.max(np.abs(m))) for m in mats.values())
    metrics = {m: dict(zip(("precision", "recall", "f1"),
                           support_metrics(fits[m].a_hat, model.a0, cfg.tau))) for m in METHODS}
    bundle = {
        "matrices": mats,
        "lambda": lam,
        "support": metrics,
        "vmax": vmax,
        "results": fits,
        "meta": {
            "kind": "fig1",
            "d": d,
            "config": cfg.to_dict(),
            "scheme": cfg.scheme,
            "lambda_mode": cfg.lambda_mode,
            "lambda": lam,
            "model_seed": seeds[0],
            "path_seed": seeds[1],
            "support": metrics,
            "status": {m: fits[m].status for m in METHODS},
            "color_scale": [-vmax, vmax],
            "note": QUALITATIVE_NOTE,
        },
    }
    bundle["meta"]["wall_time_s"] = time.perf_counter() - start
    if out_dir is not None:
        out = FsPath(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        titles = {"a0": "true A0", "mle": "MLE", "lasso": "Lasso", "dantzig": "Dantzig"}
        for name in FIG1_NAMES:
            write_matrix_csv(out / f"fig1_{name}.csv", mats[name])
            plotting.heatmap(mats[name], out / f"fig1_{name}.svg", vmax, titles[name])
        dump_json(_jsonable(bundle["meta"]), out / "run_meta.json")
    return bundle
