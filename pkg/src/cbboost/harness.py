"""Benchmark orchestration: repeated synthetic runs, baselines and summaries.

A run draws fresh train/test data per repetition, injects label noise,
estimates confidence once per (repetition, noise level), and hands the same
confidence vector to every method that needs it, so method comparisons never
diverge through their preprocessing. Seeds for every random stage derive
from (base_seed, repetition, stage tag) through SHA-256, making each stage
independent of scheduling and of which other stages exist.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .boost import BoostConfig, Ensemble, predict, train_adaboost, train_cb_adaboost
from .confidence import (
    DEFAULT_K,
    DEFAULT_THRESHOLDS,
    ConfidenceVector,
    estimate_confidence,
)
from .dataset import Dataset, inject_label_noise
from .synth import gen_normal, gen_sine

__all__ = [
    "ExperimentConfig",
    "CellResult",
    "ResultsTable",
    "derive_seed",
    "test_error",
    "run_disc",
    "run_corr",
    "run_experiment",
    "weight_trace_groups",
    "table_to_json",
    "table_to_csv",
    "parse_method",
]

KNOWN_METHODS = ("stump", "adaboost", "cb", "disc", "corr")


def derive_seed(base_seed: int, rep: int, stage: str) -> int:
    """Stable 64-bit seed for one random stage of one repetition."""
    digest = hashlib.sha256(f"{base_seed}|{rep}|{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def parse_method(spec: str) -> tuple[str, float | None]:
    """'adaboost' -> ('adaboost', None); 'disc:0.5' -> ('disc', 0.5)."""
    name, _, arg = spec.partition(":")
    if name not in KNOWN_METHODS:
        raise ValueError(f"unknown method {name!r}, expected one of {KNOWN_METHODS}")
    if name in ("disc", "corr"):
        if not arg:
            raise ValueError(f"method {name!r} needs a threshold, e.g. {name}:0.5")
        thr = float(arg)
        if not (0.0 < thr < 1.0):
            raise ValueError(f"threshold for {name!r} must lie in (0, 1), got {thr}")
        return name, thr
    if arg:
        raise ValueError(f"method {name!r} takes no argument, got {spec!r}")
    return name, None


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark grid: scenario x noise levels x methods x repetitions."""

    scenario: str = "normal"
    train_n: int = 500
    test_n: int = 10000
    noise_levels: tuple = (0.0, 0.1, 0.2, 0.3)
    methods: tuple = ("adaboost", "cb")
    repetitions: int = 30
    base_seed: int = 20240501
    confidence_method: str = "knn"
    confidence_form: str = "consistent"
    k: int = DEFAULT_K
    filter_thresholds: tuple = DEFAULT_THRESHOLDS
    boost: BoostConfig = field(default_factory=BoostConfig)
    jobs: int = 1

    def __post_init__(self):
        if self.scenario not in ("normal", "sine"):
            raise ValueError(f"scenario must be 'normal' or 'sine', got {self.scenario!r}")
        if self.train_n < 2 or self.test_n < 1:
            raise ValueError(f"need train_n >= 2 and test_n >= 1, got {self.train_n}/{self.test_n}")
        if self.repetitions < 1:
            raise ValueError(f"need at least 1 repetition, got {self.repetitions}")
        for lv in self.noise_levels:
            if not (0.0 <= lv < 0.5):
                raise ValueError(f"noise levels must lie in [0, 0.5), got {lv}")
        if self.confidence_method not in ("knn", "bayes"):
            raise ValueError(f"confidence_method must be 'knn' or 'bayes', got {self.confidence_method!r}")
        for m in self.methods:
            parse_method(m)
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


@dataclass(frozen=True)
class CellResult:
    """Per-repetition outcomes for one (method, noise level) cell.

    values holds one test error per repetition, None where that repetition
    failed for this method (the error message lands in errors); stops holds
    the ensemble length per repetition (None on failure or for 'stump').
    """

    values: tuple
    stops: tuple
    errors: tuple

    @property
    def ok_values(self) -> list:
        return [v for v in self.values if v is not None]

    @property
    def mean(self) -> float | None:
        vals = self.ok_values
        return float(np.mean(vals)) if vals else None

    @property
    def std(self) -> float | None:
        # sample std over repetitions; a single value has spread 0 by convention
        vals = self.ok_values
        if not vals:
            return None
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0


@dataclass(frozen=True)
class ResultsTable:
    config: ExperimentConfig
    cells: dict

    def cell(self, method: str, level: float) -> CellResult:
        return self.cells[(method, float(level))]


def test_error(ensemble: Ensemble, test: Dataset) -> float:
    """Fraction of test rows whose predicted sign disagrees with the label."""
    return float(np.mean(predict(ensemble, test.features) != test.labels))


def run_disc(train: Dataset, gamma: ConfidenceVector, threshold: float, cfg: BoostConfig):
    """Baseline: drop every row with confidence below threshold, then boost plainly."""
    if gamma.n != train.n:
        raise ValueError(f"gamma length {gamma.n} does not match {train.n} rows")
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    keep = gamma.gamma >= threshold
    n_keep = int(keep.sum())
    if n_keep < 2:
        raise ValueError(f"discarding below {threshold} keeps only {n_keep} rows")
    sub = Dataset(train.features[keep], train.labels[keep])
    return train_adaboost(sub, cfg)


def run_corr(train: Dataset, gamma: ConfidenceVector, threshold: float, cfg: BoostConfig):
    """Baseline: flip the label of every row with confidence below threshold, then boost."""
    if gamma.n != train.n:
        raise ValueError(f"gamma length {gamma.n} does not match {train.n} rows")
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    flip = gamma.gamma < threshold
    labels = np.where(flip, -train.labels, train.labels)
    return train_adaboost(Dataset(train.features, labels), cfg)


def _gen(scenario: str, n: int, seed: int) -> Dataset:
    return gen_normal(n, seed) if scenario == "normal" else gen_sine(n, seed)


def _fit_method(name, thr, noisy, gamma, cfg: BoostConfig):
    if name == "stump":
        ens, _ = train_adaboost(noisy, replace(cfg, max_iterations=1))
        return ens
    if name == "adaboost":
        ens, _ = train_adaboost(noisy, cfg)
        return ens
    if name == "cb":
        ens, _ = train_cb_adaboost(noisy, gamma, cfg)
        return ens
    if name == "disc":
        ens, _ = run_disc(noisy, gamma, thr, cfg)
        return ens
    ens, _ = run_corr(noisy, gamma, thr, cfg)
    return ens


def _needs_gamma(methods) -> bool:
    return any(parse_method(m)[0] in ("cb", "disc", "corr") for m in methods)


def _run_repetition(cfg: ExperimentConfig, rep: int) -> dict:
    """All cells of one repetition: {(method, level): (value, stop, error)}."""
    out = {}
    test = _gen(cfg.scenario, cfg.test_n, derive_seed(cfg.base_seed, rep, "test"))
    train = _gen(cfg.scenario, cfg.train_n, derive_seed(cfg.base_seed, rep, "train"))
    for level in cfg.noise_levels:
        level = float(level)
        noisy, _mask = inject_label_noise(
            train, level, derive_seed(cfg.base_seed, rep, f"noise@{level!r}")
        )
        gamma = None
        gamma_err = None
        if _needs_gamma(cfg.methods):
            try:
                gamma, _report = estimate_confidence(
                    noisy,
                    method=cfg.confidence_method,
                    k=cfg.k,
                    thresholds=cfg.filter_thresholds,
                    noise_level=level if cfg.confidence_method == "bayes" else None,
                    form=cfg.confidence_form,
                )
            except (ValueError, np.linalg.LinAlgError) as exc:
                gamma_err = f"confidence failed: {exc}"
        for mspec in cfg.methods:
            name, thr = parse_method(mspec)
            if name in ("cb", "disc", "corr") and gamma is None:
                out[(mspec, level)] = (None, None, gamma_err or "confidence unavailable")
                continue
            bcfg = replace(cfg.boost, seed=derive_seed(cfg.base_seed, rep, f"boost@{mspec}@{level!r}"))
            try:
                ens = _fit_method(name, thr, noisy, gamma, bcfg)
                out[(mspec, level)] = (test_error(ens, test), len(ens), None)
            except ValueError as exc:
                out[(mspec, level)] = (None, None, f"{name} failed: {exc}")
    return out


def run_experiment(cfg: ExperimentConfig) -> ResultsTable:
    """Run the full grid; identical output for any jobs value.

    A method failing on one repetition leaves that cell entry missing (None)
    with its error recorded instead of aborting the whole run.
    """
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            per_rep = list(pool.map(_run_repetition, [cfg] * cfg.repetitions, range(cfg.repetitions)))
    else:
        per_rep = [_run_repetition(cfg, rep) for rep in range(cfg.repetitions)]
    cells = {}
    for mspec in cfg.methods:
        for level in cfg.noise_levels:
            level = float(level)
            triples = [rep_out[(mspec, level)] for rep_out in per_rep]
            cells[(mspec, level)] = CellResult(
                values=tuple(t[0] for t in triples),
                stops=tuple(t[1] for t in triples),
                errors=tuple(t[2] for t in triples),
            )
    return ResultsTable(config=cfg, cells=cells)


def weight_trace_groups(trace, mask=None, gamma=None, conf_cut: float = 0.7) -> dict:
    """Mean sampling weight per iteration for diagnostic instance groups.

    With a noise mask: groups "clean" and "mislabeled". With a confidence
    vector: groups "high_certainty" and "low_certainty", split on
    max(gamma, 1 - gamma) > conf_cut (certainty means commitment either way,
    so gamma near 0 is as certain as gamma near 1). Empty groups are omitted.
    """
    if not trace.rows:
        raise ValueError("trace has no recorded iterations")
    D = np.stack([row.sample_weights for row in trace.rows])
    series = {}
    if mask is not None:
        for name, sel in (("clean", ~mask.flipped), ("mislabeled", mask.flipped)):
            if sel.any():
                series[name] = D[:, sel].mean(axis=1)
    if gamma is not None:
        certain = np.maximum(gamma.gamma, 1.0 - gamma.gamma) > conf_cut
        for name, sel in (("high_certainty", certain), ("low_certainty", ~certain)):
            if sel.any():
                series[name] = D[:, sel].mean(axis=1)
    return series


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "train_n": cfg.train_n,
        "test_n": cfg.test_n,
        "noise_levels": list(cfg.noise_levels),
        "methods": list(cfg.methods),
        "repetitions": cfg.repetitions,
        "base_seed": cfg.base_seed,
        "confidence_method": cfg.confidence_method,
        "confidence_form": cfg.confidence_form,
        "k": cfg.k,
        "filter_thresholds": list(cfg.filter_thresholds),
        "boost": {
            "max_iterations": cfg.boost.max_iterations,
            "learner_mode": cfg.boost.learner_mode,
            "stop_rule": cfg.boost.stop_rule,
            "consistency_a": cfg.boost.consistency_a,
            "epsilon_clamp": cfg.boost.epsilon_clamp,
        },
    }


def table_to_json(table: ResultsTable) -> str:
    """Full per-repetition detail, deterministic bytes for a given table."""
    cells = []
    for (mspec, level), cell in sorted(table.cells.items()):
        cells.append(
            {
                "method": mspec,
                "noise_level": level,
                "mean": cell.mean,
                "std": cell.std,
                "values": list(cell.values),
                "stops": list(cell.stops),
                "errors": list(cell.errors),
                "failed": sum(v is None for v in cell.values),
            }
        )
    return json.dumps({"config": _config_echo(table.config), "cells": cells}, indent=2, sort_keys=True)


def table_to_csv(table: ResultsTable) -> str:
    """Summary rows: method, noise_level, mean, std, ok/total repetition counts."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["method", "noise_level", "mean", "std", "reps_ok", "reps_total"])
    for (mspec, level), cell in sorted(table.cells.items()):
        ok = len(cell.ok_values)
        writer.writerow(
            [
                mspec,
                repr(level),
                "" if cell.mean is None else format(cell.mean, ".6f"),
                "" if cell.std is None else format(cell.std, ".6f"),
                ok,
                len(cell.values),
            ]
        )
    return buf.getvalue()
