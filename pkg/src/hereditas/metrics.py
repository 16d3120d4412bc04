"""Evaluation quantities for selected models against a known truth.

MSH (maintenance of strong heredity) is the fraction of parent main
effects required by the *selected* second-order terms that are themselves
selected; sensitivity/specificity count correctly classified important/
unimportant terms.  Metrics with an empty denominator are reported as
absent (None), never as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidConfigError, InvalidDimensionError, UnsupportedDistributionError
from .terms import INTER, MAIN, QUAD, TermId, TermSet, expand, main

STANDARD_NORMAL = "standard-normal"
LOGNORMAL01 = "lognormal-0-1"
DISTRIBUTIONS = (STANDARD_NORMAL, LOGNORMAL01)

TERM_CLASSES = (MAIN, INTER, QUAD)


@dataclass(frozen=True)
class TruthSpec:
    """The generative truth: ambient terms, active coefficients, noise SD."""

    terms: TermSet
    active_coefs: Mapping[TermId, float]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "active_coefs", dict(self.active_coefs))
        if self.sigma <= 0:
            raise InvalidConfigError(f"sigma must be positive, got {self.sigma}")
        for t, v in self.active_coefs.items():
            if t not in self.terms:
                raise InvalidConfigError(f"active term {t.label()} outside the ambient set")
            if v == 0.0:
                raise InvalidConfigError(f"active term {t.label()} has a zero coefficient")

    @property
    def active(self) -> frozenset[TermId]:
        return frozenset(self.active_coefs)

    def coefficient_array(self) -> np.ndarray:
        out = np.zeros(len(self.terms))
        for t, v in self.active_coefs.items():
            out[self.terms.index[t]] = v
        return out

    def signal(self, x_mains: np.ndarray) -> np.ndarray:
        """Noise-free responses for a matrix of raw main effects."""
        return expand(x_mains, self.terms) @ self.coefficient_array()


def msh_counts(selected: Iterable[TermId]) -> tuple[int, int]:
    """(parents selected, parents required) for the selected second-order terms.

    The denominator is what the *selected* model demands, not what the truth
    does; the raw counts are exposed so other ratios can be recomputed.
    """
    selected = frozenset(selected)
    required: set[int] = set()
    for t in selected:
        if t.is_second_order:
            required |= t.parents()
    present = sum(1 for j in required if main(j) in selected)
    return present, len(required)


def msh(selected: Iterable[TermId]) -> float:
    """Fraction of parents required by selected second-order terms that are selected.

    1.0 when no second-order term is selected: an empty constraint is satisfied.
    """
    present, required = msh_counts(selected)
    if required == 0:
        return 1.0
    return present / required


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def sensitivity(selected: Iterable[TermId], truth: TruthSpec) -> float | None:
    selected = frozenset(selected)
    active = truth.active
    return _ratio(len(selected & active), len(active))


def specificity(selected: Iterable[TermId], truth: TruthSpec) -> float | None:
    selected = frozenset(selected)
    inactive = frozenset(truth.terms) - truth.active
    return _ratio(len(inactive - selected), len(inactive))


def sensitivity_by_class(selected: Iterable[TermId], truth: TruthSpec) -> dict[str, float | None]:
    selected = frozenset(selected)
    out = {}
    for kind in TERM_CLASSES:
        active = {t for t in truth.active if t.kind == kind}
        out[kind] = _ratio(len(selected & active), len(active))
    return out


def specificity_by_class(selected: Iterable[TermId], truth: TruthSpec) -> dict[str, float | None]:
    selected = frozenset(selected)
    out = {}
    for kind in TERM_CLASSES:
        inactive = {t for t in truth.terms if t.kind == kind} - truth.active
        out[kind] = _ratio(len(inactive - selected), len(inactive))
    return out


def mse(predictions, y) -> float:
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if predictions.shape != y.shape or y.size == 0:
        raise InvalidDimensionError(
            f"length mismatch: {predictions.shape} predictions vs {y.shape} responses"
        )
    resid = predictions - y
    return float(resid @ resid) / y.size


@dataclass(frozen=True)
class SnrEstimate:
    value: float
    se: float | None  # None for the exact analytic route
    method: str

    def __float__(self) -> float:
        return self.value


def draw_mains(rng, n: int, p: int, distribution: str) -> np.ndarray:
    if distribution == STANDARD_NORMAL:
        return rng.standard_normal((n, p))
    if distribution == LOGNORMAL01:
        return rng.lognormal(0.0, 1.0, size=(n, p))
    raise UnsupportedDistributionError(
        f"no sampler for {distribution!r}; supported: {DISTRIBUTIONS}"
    )


def snr_monte_carlo(truth: TruthSpec, distribution: str, mc_draws: int = 1_000_000,
                    seed: int = 0) -> SnrEstimate:
    """Estimate Var(signal)/sigma^2 by simulation, with the standard error
    of the variance estimate propagated through."""
    if mc_draws < 1_000_000:
        raise ValueError("Monte Carlo SNR needs at least 1e6 draws")
    rng = np.random.default_rng(seed)
    signal = np.empty(mc_draws)
    chunk = 100_000
    for start in range(0, mc_draws, chunk):
        stop = min(start + chunk, mc_draws)
        signal[start:stop] = truth.signal(
            draw_mains(rng, stop - start, truth.terms.p, distribution)
        )
    var = float(np.var(signal, ddof=1))
    centered = signal - signal.mean()
    m4 = float(np.mean(centered**4))
    se_var = math.sqrt(max(m4 - var * var, 0.0) / mc_draws)
    s2 = truth.sigma**2
    return SnrEstimate(var / s2, se_var / s2, "monte-carlo")


def snr(truth: TruthSpec, distribution: str = STANDARD_NORMAL, mc_draws: int = 1_000_000,
        seed: int = 0) -> SnrEstimate:
    """Signal-to-noise ratio Var(signal)/sigma^2 for i.i.d. main effects.

    Standard-normal mains admit a closed form: squares contribute twice
    their squared coefficient (the variance of a chi-square_1), products of
    distinct mains contribute once, and every cross-covariance vanishes by
    odd-moment symmetry.  Other distributions fall back to Monte Carlo.
    """
    if distribution == STANDARD_NORMAL:
        var = 0.0
        for t, v in truth.active_coefs.items():
            var += 2.0 * v * v if t.kind == QUAD else v * v
        return SnrEstimate(var / truth.sigma**2, None, "analytic")
    if distribution == LOGNORMAL01:
        return snr_monte_carlo(truth, distribution, mc_draws, seed)
    raise UnsupportedDistributionError(
        f"no SNR route for {distribution!r}; supported: {DISTRIBUTIONS}"
    )


@dataclass(frozen=True)
class AggregateStat:
    """Mean, median, and standard error (SD/sqrt(R)) over replicates."""

    mean: float
    median: float
    se: float
    n: int

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "se": self.se, "n": self.n}


def aggregate(values: Iterable[float | None]) -> AggregateStat | None:
    """Aggregate per-replicate values, skipping absent entries."""
    xs = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if xs.size == 0:
        return None
    se = float(np.std(xs, ddof=1) / math.sqrt(xs.size)) if xs.size > 1 else 0.0
    return AggregateStat(float(xs.mean()), float(np.median(xs)), se, int(xs.size))


@dataclass(frozen=True)
class ReplicateMetrics:
    """One replicate's scores for one method-by-scheme cell."""

    msh: float
    sensitivity: float | None
    specificity: float | None
    sensitivity_by_class: dict[str, float | None]
    specificity_by_class: dict[str, float | None]
    mse: float
    n_selected: int

    def to_json_dict(self) -> dict:
        return {
            "msh": self.msh,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "sensitivity_by_class": dict(self.sensitivity_by_class),
            "specificity_by_class": dict(self.specificity_by_class),
            "mse": self.mse,
            "n_selected": self.n_selected,
        }


def score_selection(selected: frozenset[TermId], truth: TruthSpec,
                    test_mse: float) -> ReplicateMetrics:
    return ReplicateMetrics(
        msh=msh(selected),
        sensitivity=sensitivity(selected, truth),
        specificity=specificity(selected, truth),
        sensitivity_by_class=sensitivity_by_class(selected, truth),
        specificity_by_class=specificity_by_class(selected, truth),
        mse=test_mse,
        n_selected=len(selected),
    )
