"""Seeded simulation campaigns over method-by-standardization pipelines.

Data are generated from the second-order model with independent mains;
one master seed spawns an independent stream per replicate (SeedSequence
entropy [master_seed, replicate]), so replicates can run concurrently and
every method cell consumes the identical datasets.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfigError, UnsupportedDistributionError
from .metrics import (
    LOGNORMAL01,
    STANDARD_NORMAL,
    AggregateStat,
    ReplicateMetrics,
    SnrEstimate,
    TruthSpec,
    aggregate,
    draw_mains,
    mse,
    score_selection,
    snr,
)
from .selectors import (
    FULL_START,
    FitResult,
    LassoOptions,
    StepwiseOptions,
    stepwise_aic,
    tune_lasso,
)
from .standardize import (
    HIER_STD,
    MEAN_SD,
    MEDIAN_IQR,
    REGULAR_STD,
    CoefficientVector,
    back_transform_hierarchical,
    back_transform_regular,
    fit_location_scale,
    standardize_hierarchical,
    standardize_regular,
)
from .terms import RawDesign, canonical_terms, expand, inter, main, quad

LASSO = "lasso"
STEPWISE = "stepwise"
METHODS = (LASSO, STEPWISE)

HIERARCHICAL = "hierarchical"
REGULAR = "regular"
SCHEMES = (HIERARCHICAL, REGULAR)

DEFAULT_CELLS = tuple((m, s) for m in METHODS for s in SCHEMES)


@dataclass(frozen=True)
class SettingConfig:
    """Full generative description of one simulation setting."""

    name: str = "custom"
    p: int = 10
    n_active_mains: int = 3
    n_active_inters: int = 3
    n_active_quads: int = 3
    extra_active_mains: int = 0  # active mains with no active children
    coef_main: float = 1.0
    coef_inter: float = 1.0
    coef_quad: float = 1.0
    sigma: float = 8.0
    x_distribution: str = STANDARD_NORMAL
    estimator: str = MEAN_SD
    n_train: int = 200
    n_valid: int = 200
    n_test: int = 10_000
    replicates: int = 50
    master_seed: int = 0
    reduced_truth: bool = False  # keep only 2 parent mains active (heredity-violating truth)
    printed_snr: float | None = None  # tabulated value to cross-check, when one exists

    def __post_init__(self):
        if self.p < 1:
            raise InvalidConfigError("p must be at least 1")
        counts = (self.n_active_mains, self.n_active_inters, self.n_active_quads,
                  self.extra_active_mains)
        if any(c < 0 for c in counts):
            raise InvalidConfigError("active counts must be nonnegative")
        if self.n_active_mains + self.extra_active_mains > self.p:
            raise InvalidConfigError("more active mains than main effects")
        max_pairs = self.n_active_mains * (self.n_active_mains - 1) // 2
        if self.n_active_inters > max_pairs:
            raise InvalidConfigError(
                f"{self.n_active_inters} interactions do not fit among "
                f"{self.n_active_mains} parent mains (max {max_pairs})"
            )
        if self.n_active_quads > self.n_active_mains:
            raise InvalidConfigError("more active quadratics than parent mains")
        if self.sigma <= 0:
            raise InvalidConfigError("sigma must be positive")
        for n_name in ("n_train", "n_valid", "n_test"):
            if getattr(self, n_name) < 1:
                raise InvalidConfigError(f"{n_name} must be at least 1")
        if self.replicates < 1:
            raise InvalidConfigError("replicates must be at least 1")
        if self.master_seed < 0:
            raise InvalidConfigError("master_seed must be nonnegative")
        if self.x_distribution not in (STANDARD_NORMAL, LOGNORMAL01):
            raise UnsupportedDistributionError(
                f"unknown distribution {self.x_distribution!r}"
            )
        if self.estimator not in (MEAN_SD, MEDIAN_IQR):
            raise InvalidConfigError(f"unknown estimator {self.estimator!r}")

    def to_json_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SettingConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


def _table1(name, a, coef2, sig, printed):
    inters = a * (a - 1) // 2
    return SettingConfig(
        name=name, n_active_mains=a, n_active_inters=inters, n_active_quads=a,
        coef_main=1.0, coef_inter=coef2, coef_quad=coef2, sigma=sig, printed_snr=printed,
    )


PRESETS: dict[str, SettingConfig] = {
    "setting1": _table1("setting1", 3, 1.0, 8.0, 0.19),
    "setting2": _table1("setting2", 3, 2.0, 16.0, 0.15),
    "setting3": _table1("setting3", 3, 3.0, 15.0, 0.37),
    "setting4": _table1("setting4", 4, 1.0, 8.0, 0.28),
    "setting5": _table1("setting5", 4, 2.0, 16.0, 0.23),
    "setting6": _table1("setting6", 4, 3.0, 15.0, 0.58),
    "setting7": _table1("setting7", 5, 1.0, 8.0, 0.39),
    "setting8": _table1("setting8", 5, 2.0, 16.0, 0.33),
    "setting9": _table1("setting9", 5, 3.0, 15.0, 0.83),
    # Robustness checks on the main-effect transform.
    "R1": replace(_table1("R1", 3, 1.0, 8.0, 364.018), x_distribution=LOGNORMAL01),
    "R2": replace(_table1("R2", 3, 1.0, 8.0, 0.188), estimator=MEDIAN_IQR),
    "R3": replace(_table1("R3", 3, 1.0, 8.0, 364.018), x_distribution=LOGNORMAL01,
                  estimator=MEDIAN_IQR),
    # Additional robustness checks: larger main coefficients, extra parent-free mains.
    "R4": SettingConfig(name="R4", n_active_mains=3, n_active_inters=3, n_active_quads=3,
                        coef_main=3.0, coef_inter=1.0, coef_quad=1.0, sigma=8.0,
                        printed_snr=0.564),
    "R5": SettingConfig(name="R5", n_active_mains=4, n_active_inters=6, n_active_quads=4,
                        coef_main=5.0, coef_inter=3.0, coef_quad=1.0, sigma=8.0,
                        printed_snr=2.541),
    "R6": SettingConfig(name="R6", n_active_mains=5, n_active_inters=10, n_active_quads=5,
                        coef_main=5.0, coef_inter=3.0, coef_quad=3.0, sigma=8.0,
                        printed_snr=4.8),
    "R7": SettingConfig(name="R7", n_active_mains=3, n_active_inters=3, n_active_quads=3,
                        extra_active_mains=1, coef_main=1.0, coef_inter=1.0, coef_quad=1.0,
                        sigma=8.0, printed_snr=0.204),
    "R8": SettingConfig(name="R8", n_active_mains=4, n_active_inters=6, n_active_quads=4,
                        extra_active_mains=2, coef_main=1.0, coef_inter=3.0, coef_quad=3.0,
                        sigma=15.0, printed_snr=0.587),
    "R9": SettingConfig(name="R9", n_active_mains=5, n_active_inters=10, n_active_quads=5,
                        extra_active_mains=3, coef_main=5.0, coef_inter=3.0, coef_quad=3.0,
                        sigma=8.0, printed_snr=5.979),
}


def preset(name: str) -> SettingConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidConfigError(
            f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}"
        ) from None


def build_truth(cfg: SettingConfig) -> TruthSpec:
    """Active terms per the setting: lowest-index mains carry the signal.

    Interactions are the first lexicographic pairs among the parent mains,
    quadratics belong to the first parent mains, and extra actives are
    appended mains without active children.  The reduced variant zeroes all
    but the first two parent mains, leaving the children active.
    """
    terms = canonical_terms(cfg.p)
    coefs = {}
    parent_mains = list(range(cfg.n_active_mains))
    kept_mains = parent_mains[:2] if cfg.reduced_truth else parent_mains
    for j in kept_mains:
        coefs[main(j)] = cfg.coef_main
    for e in range(cfg.extra_active_mains):
        coefs[main(cfg.n_active_mains + e)] = cfg.coef_main
    pairs = [(j, k) for j in parent_mains for k in parent_mains if j < k]
    for j, k in pairs[: cfg.n_active_inters]:
        coefs[inter(j, k)] = cfg.coef_inter
    for j in parent_mains[: cfg.n_active_quads]:
        coefs[quad(j)] = cfg.coef_quad
    return TruthSpec(terms, coefs, cfg.sigma)


class Split(NamedTuple):
    design: RawDesign
    y: np.ndarray


@dataclass(frozen=True)
class ReplicateData:
    train: Split
    valid: Split
    test: Split
    truth: TruthSpec
    replicate: int
    seed_entropy: tuple[int, int]  # (master_seed, replicate): the stream identity


def generate_replicate(cfg: SettingConfig, rep_index: int) -> ReplicateData:
    """Deterministic function of (master_seed, rep_index); splits drawn in order."""
    truth = build_truth(cfg)
    entropy = (cfg.master_seed, rep_index)
    rng = np.random.default_rng(np.random.SeedSequence(list(entropy)))
    splits = []
    for n in (cfg.n_train, cfg.n_valid, cfg.n_test):
        x = draw_mains(rng, n, cfg.p, cfg.x_distribution)
        y = truth.signal(x) + rng.normal(0.0, cfg.sigma, size=n)
        splits.append(Split(RawDesign(x), y))
    return ReplicateData(splits[0], splits[1], splits[2], truth, rep_index, entropy)


@dataclass(frozen=True)
class PipelineOutcome:
    method: str
    scheme: str
    raw_coefs: CoefficientVector
    selected: frozenset
    fit: FitResult
    metrics: ReplicateMetrics


def run_pipeline(data: ReplicateData, method: str, scheme: str,
                 estimator: str = MEAN_SD,
                 lasso_opts: LassoOptions | None = None,
                 stepwise_opts: StepwiseOptions | None = None) -> PipelineOutcome:
    """Standardize -> select -> back-transform -> score on the test split.

    The validation split tunes lambda for the lasso; stepwise does not use
    it.  Validation and test designs are always standardized with the
    train-fitted parameters.
    """
    if method not in METHODS:
        raise InvalidConfigError(f"unknown method {method!r}")
    if scheme not in SCHEMES:
        raise InvalidConfigError(f"unknown scheme {scheme!r}")
    terms = data.truth.terms
    y_tr = data.train.y

    if scheme == HIERARCHICAL:
        ls = fit_location_scale(data.train.design, estimator)
        z_tr = standardize_hierarchical(data.train.design, ls, terms)
        tag = HIER_STD
    else:
        z_tr, params = standardize_regular(data.train.design, terms)
        tag = REGULAR_STD

    if method == LASSO:
        if scheme == HIERARCHICAL:
            z_va = standardize_hierarchical(data.valid.design, ls, terms)
        else:
            z_va = params.apply(data.valid.design)
        tuned = tune_lasso((z_tr, y_tr), (z_va, data.valid.y), lasso_opts, terms, tag)
        fit = tuned.fit
    else:
        fit = stepwise_aic(z_tr, y_tr, stepwise_opts or StepwiseOptions(start=FULL_START),
                           terms, tag)

    if scheme == HIERARCHICAL:
        raw = back_transform_hierarchical(fit.coefs, ls, terms)
    else:
        raw = back_transform_regular(fit.coefs, params, terms)
    test_design = expand(data.test.design, terms)

    selected = raw.selected()
    test_mse = mse(raw.predict(test_design), data.test.y)
    return PipelineOutcome(method, scheme, raw, selected, fit,
                           score_selection(selected, data.truth, test_mse))


def _cell_name(method: str, scheme: str) -> str:
    return f"{method}/{scheme}"


@dataclass(frozen=True)
class CellReport:
    method: str
    scheme: str
    per_replicate: tuple[ReplicateMetrics, ...]
    aggregates: dict[str, AggregateStat | None]

    @property
    def name(self) -> str:
        return _cell_name(self.method, self.scheme)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "scheme": self.scheme,
            "aggregates": {
                k: (v.to_json_dict() if v is not None else None)
                for k, v in self.aggregates.items()
            },
            "per_replicate": [r.to_json_dict() for r in self.per_replicate],
        }


AGGREGATED_METRICS = ("msh", "sensitivity", "specificity", "mse")


def _aggregate_cell(method: str, scheme: str, rows: list[ReplicateMetrics]) -> CellReport:
    aggs: dict[str, AggregateStat | None] = {}
    for name in AGGREGATED_METRICS:
        aggs[name] = aggregate(getattr(r, name) for r in rows)
    for kind in ("main", "inter", "quad"):
        aggs[f"sensitivity_{kind}"] = aggregate(r.sensitivity_by_class[kind] for r in rows)
        aggs[f"specificity_{kind}"] = aggregate(r.specificity_by_class[kind] for r in rows)
    return CellReport(method, scheme, tuple(rows), aggs)


@dataclass(frozen=True)
class CampaignReport:
    config: SettingConfig
    cells: tuple[CellReport, ...]
    snr: SnrEstimate
    snr_flagged: bool  # analytic/tabulated disagreement beyond 0.01

    def cell(self, method: str, scheme: str) -> CellReport:
        for c in self.cells:
            if c.method == method and c.scheme == scheme:
                return c
        raise KeyError(_cell_name(method, scheme))

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "snr": {
                "value": self.snr.value,
                "se": self.snr.se,
                "method": self.snr.method,
                "printed": self.config.printed_snr,
                "flagged": self.snr_flagged,
            },
            "cells": [c.to_json_dict() for c in self.cells],
        }


def campaign_snr(cfg: SettingConfig, mc_draws: int = 1_000_000) -> tuple[SnrEstimate, bool]:
    est = snr(build_truth(cfg), cfg.x_distribution, mc_draws=mc_draws, seed=cfg.master_seed)
    flagged = (
        cfg.printed_snr is not None
        and est.method == "analytic"
        and abs(est.value - cfg.printed_snr) > 0.01
    )
    return est, flagged


def _replicate_worker(task) -> list[ReplicateMetrics]:
    cfg, cells, lasso_opts, stepwise_opts, rep = task
    data = generate_replicate(cfg, rep)
    return [
        run_pipeline(data, method, scheme, cfg.estimator, lasso_opts, stepwise_opts).metrics
        for method, scheme in cells
    ]


def run_campaign(cfg: SettingConfig, cells=DEFAULT_CELLS, threads: int = 1,
                 lasso_opts: LassoOptions | None = None,
                 stepwise_opts: StepwiseOptions | None = None,
                 snr_mc_draws: int = 1_000_000) -> CampaignReport:
    """Run every method-by-scheme cell on identical replicate data and aggregate.

    Replicates are independent work units, farmed out to worker processes
    when threads > 1; results are folded in replicate order, so the report
    is bit-identical regardless of worker count.
    """
    cells = tuple(cells)
    tasks = [(cfg, cells, lasso_opts, stepwise_opts, rep) for rep in range(cfg.replicates)]
    if threads > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=min(threads, cfg.replicates)) as pool:
            per_rep = list(pool.map(_replicate_worker, tasks))
    else:
        per_rep = [_replicate_worker(t) for t in tasks]

    reports = []
    for i, (method, scheme) in enumerate(cells):
        rows = [per_rep[rep][i] for rep in range(cfg.replicates)]
        reports.append(_aggregate_cell(method, scheme, rows))
    est, flagged = campaign_snr(cfg, mc_draws=snr_mc_draws)
    return CampaignReport(cfg, tuple(reports), est, flagged)
