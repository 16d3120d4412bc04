"""Regular and hierarchical standardization with their coefficient back-transforms.

Hierarchical standardization scales only the main effects and *generates*
second-order columns as products of the scaled mains.  Back-transforming
the fitted coefficients to the raw scale then mixes every second-order
coefficient into its parent main-effect coefficients, which forces the
selected model to satisfy strong heredity whenever the effective centers
are nonzero.  Regular standardization centers and scales every expanded
column independently, so its back-transform leaves selections uncoupled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnError, InconsistentParamsError, InvalidDimensionError
from .terms import MAIN, QUAD, TermId, TermSet, _main_values, expand, main

MEAN_SD = "mean-sd"
MEDIAN_IQR = "median-iqr"
ESTIMATORS = (MEAN_SD, MEDIAN_IQR)

RAW = "raw"
REGULAR_STD = "regular-std"
HIER_STD = "hier-std"
SCALE_TAGS = (RAW, REGULAR_STD, HIER_STD)

# |sample center| below this triggers the small-shift guard so the
# back-transform can force parent mains to nonzero coefficients.
ZERO_CENTER_TOL = 1e-12

# Default shift, as a fraction of the column scale (keeps it dimensionless).
DEFAULT_DELTA = 1e-3


@dataclass(frozen=True)
class LocationScale:
    """Per-main-effect location/scale estimates plus any recorded shifts.

    ``centers`` holds the raw sample estimates.  When a center falls within
    ZERO_CENTER_TOL of zero, ``delta_applied`` records the shift and the
    *effective* center used by the transform and the back-transform becomes
    ``center - delta`` (equivalently: the column is treated as shifted by
    +delta before standardizing, with the center estimate left as fitted).
    Because the transform and the back-transform share the effective center,
    back-transformed models always live on the original, unshifted variables.
    """

    estimator: str
    centers: np.ndarray
    scales: np.ndarray
    delta_applied: np.ndarray

    def __post_init__(self):
        for name in ("centers", "scales", "delta_applied"):
            v = np.atleast_1d(np.array(getattr(self, name), dtype=np.float64))
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        if not (self.centers.shape == self.scales.shape == self.delta_applied.shape):
            raise InconsistentParamsError("centers/scales/delta_applied length mismatch")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if np.any(self.scales <= 0) or not np.all(np.isfinite(self.scales)):
            raise ValueError("scales must be strictly positive and finite")

    @property
    def p(self) -> int:
        return self.centers.shape[0]

    @property
    def effective_centers(self) -> np.ndarray:
        return self.centers - self.delta_applied

    def to_json_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "centers": self.centers.tolist(),
            "scales": self.scales.tolist(),
            "delta_applied": self.delta_applied.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LocationScale":
        return cls(
            estimator=d["estimator"],
            centers=np.asarray(d["centers"], dtype=np.float64),
            scales=np.asarray(d["scales"], dtype=np.float64),
            delta_applied=np.asarray(d["delta_applied"], dtype=np.float64),
        )


@dataclass(frozen=True)
class RegularParams:
    """Per-column centers/scales for every expanded column (mains included)."""

    terms: TermSet
    centers: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        for name in ("centers", "scales"):
            v = np.atleast_1d(np.array(getattr(self, name), dtype=np.float64))
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        if len(self.centers) != len(self.terms) or len(self.scales) != len(self.terms):
            raise InconsistentParamsError("params length does not match the term set")
        if np.any(self.scales <= 0) or not np.all(np.isfinite(self.scales)):
            raise ValueError("scales must be strictly positive and finite")

    def apply(self, raw) -> np.ndarray:
        """Expand a raw design and standardize it with these (train-fitted) params."""
        return (expand(raw, self.terms) - self.centers) / self.scales

    def to_json_dict(self) -> dict:
        return {
            "estimator": MEAN_SD,
            "labels": self.terms.labels(),
            "centers": self.centers.tolist(),
            "scales": self.scales.tolist(),
            "delta_applied": [0.0] * len(self.terms),
        }


@dataclass(frozen=True)
class CoefficientVector:
    """Intercept plus one coefficient per term, tagged with the scale it lives on."""

    terms: TermSet
    intercept: float
    values: np.ndarray
    scale_tag: str

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (len(self.terms),):
            raise InvalidDimensionError(
                f"expected {len(self.terms)} coefficients, got shape {v.shape}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.scale_tag not in SCALE_TAGS:
            raise ValueError(f"unknown scale tag {self.scale_tag!r}")

    def value(self, t: TermId) -> float:
        return float(self.values[self.terms.index[t]])

    def nonzero_terms(self) -> tuple[TermId, ...]:
        """Terms with exactly nonzero coefficients (no epsilon: the lasso
        produces exact zeros and stepwise produces structural zeros)."""
        return tuple(t for t, v in zip(self.terms.terms, self.values) if v != 0.0)

    def selected(self) -> frozenset[TermId]:
        return frozenset(self.nonzero_terms())

    def predict(self, design: np.ndarray) -> np.ndarray:
        """Evaluate on a design matrix already on this vector's scale."""
        design = np.asarray(design, dtype=np.float64)
        if design.shape[1] != len(self.terms):
            raise InvalidDimensionError(
                f"design has {design.shape[1]} columns, expected {len(self.terms)}"
            )
        return self.intercept + design @ self.values

    def to_csv_rows(self) -> list[tuple[str, float, str]]:
        rows = [("(Intercept)", self.intercept, self.scale_tag)]
        rows += [
            (t.label(), float(v), self.scale_tag) for t, v in zip(self.terms.terms, self.values)
        ]
        return rows


def _column_location_scale(col: np.ndarray, estimator: str) -> tuple[float, float]:
    if estimator == MEAN_SD:
        center = float(np.mean(col))
        scale = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
    else:
        center = float(np.median(col))
        q1, q3 = np.quantile(col, [0.25, 0.75])  # type-7 linear interpolation
        scale = float(q3 - q1)
    return center, scale


def fit_location_scale(raw, estimator: str = MEAN_SD, delta: float = DEFAULT_DELTA) -> LocationScale:
    """Estimate per-main-effect centers and scales on the training mains.

    ``delta`` is the shift recorded for columns whose center is numerically
    zero, expressed as a fraction of the column scale.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")
    x = _main_values(raw)
    p = x.shape[1]
    centers = np.empty(p)
    scales = np.empty(p)
    shifts = np.zeros(p)
    for j in range(p):
        center, scale = _column_location_scale(x[:, j], estimator)
        if scale <= 0.0 or not np.isfinite(scale):
            raise DegenerateColumnError(main(j).label())
        centers[j] = center
        scales[j] = scale
        if abs(center) < ZERO_CENTER_TOL:
            shifts[j] = delta * scale
    return LocationScale(estimator, centers, scales, shifts)


def standardize_mains(raw, ls: LocationScale) -> np.ndarray:
    """(X_j - c_j)/s_j per column, using the effective (possibly shifted) centers."""
    x = _main_values(raw)
    if x.shape[1] != ls.p:
        raise InconsistentParamsError(
            f"design has {x.shape[1]} mains but the location-scale covers {ls.p}"
        )
    return (x - ls.effective_centers) / ls.scales


def standardize_hierarchical(raw, ls: LocationScale, terms: TermSet) -> np.ndarray:
    """Scale the mains, then generate second-order columns from the scaled mains.

    Quadratic and interaction columns are exact products of the standardized
    main columns; they are not re-centered.
    """
    if terms.p != ls.p:
        raise InconsistentParamsError(
            f"term set expects p={terms.p} but the location-scale covers {ls.p}"
        )
    return expand(standardize_mains(raw, ls), terms)


def standardize_regular(raw, terms: TermSet) -> tuple[np.ndarray, RegularParams]:
    """Expand first, then center/scale every column independently to mean 0, SD 1."""
    e = expand(raw, terms)
    centers = e.mean(axis=0)
    scales = e.std(axis=0, ddof=1) if e.shape[0] > 1 else np.zeros(len(terms))
    bad = np.flatnonzero((scales <= 0.0) | ~np.isfinite(scales))
    if bad.size:
        raise DegenerateColumnError(terms.terms[bad[0]].label())
    params = RegularParams(terms, centers, scales)
    return (e - centers) / scales, params


def back_transform_hierarchical(
    std_coefs: CoefficientVector, ls: LocationScale, terms: TermSet | None = None
) -> CoefficientVector:
    """Map coefficients fitted on hierarchically standardized columns to the raw scale.

    Slopes follow the substitution (X_j - c_j)/s_j expanded through every
    second-order product; the intercept collects all constant pieces so that
    predictions are preserved exactly.  The output term set is the heredity
    closure of the input (parent mains gain slots when absent).
    """
    if std_coefs.scale_tag != HIER_STD:
        raise InconsistentParamsError(
            f"expected coefficients tagged {HIER_STD!r}, got {std_coefs.scale_tag!r}"
        )
    in_terms = std_coefs.terms if terms is None else terms
    if terms is not None and terms is not std_coefs.terms and terms != std_coefs.terms:
        raise InconsistentParamsError("coefficient vector does not match the given term set")
    if ls.p < in_terms.p:
        raise InconsistentParamsError(
            f"location-scale covers {ls.p} mains but terms reference up to {in_terms.p}"
        )
    c = ls.effective_centers
    s = ls.scales

    out_terms = in_terms.heredity_closure()
    out = np.zeros(len(out_terms))
    alpha = {t.i: 0.0 for t in out_terms.terms if t.kind == MAIN}
    intercept = std_coefs.intercept

    for t, v in zip(in_terms.terms, std_coefs.values):
        if t.kind == MAIN:
            alpha[t.i] += v / s[t.i]
            intercept -= v * c[t.i] / s[t.i]
        elif t.kind == QUAD:
            out[out_terms.index[t]] = v / s[t.i] ** 2
            alpha[t.i] -= 2.0 * c[t.i] * v / s[t.i] ** 2
            intercept += v * c[t.i] ** 2 / s[t.i] ** 2
        else:
            denom = s[t.i] * s[t.j]
            out[out_terms.index[t]] = v / denom
            alpha[t.i] -= c[t.j] * v / denom
            alpha[t.j] -= c[t.i] * v / denom
            intercept += v * c[t.i] * c[t.j] / denom

    for j, a in alpha.items():
        out[out_terms.index[main(j)]] = a
    return CoefficientVector(out_terms, intercept, out, RAW)


def back_transform_regular(
    std_coefs: CoefficientVector, params: RegularParams, terms: TermSet | None = None
) -> CoefficientVector:
    """Undo per-column standardization: divide each slope by its column scale.

    The intercept is recovered so predictions are preserved.
    """
    if std_coefs.scale_tag != REGULAR_STD:
        raise InconsistentParamsError(
            f"expected coefficients tagged {REGULAR_STD!r}, got {std_coefs.scale_tag!r}"
        )
    in_terms = std_coefs.terms if terms is None else terms
    if params.terms != in_terms:
        raise InconsistentParamsError("params do not cover the coefficient vector's terms")
    slopes = std_coefs.values / params.scales
    intercept = std_coefs.intercept - float(np.dot(std_coefs.values, params.centers / params.scales))
    return CoefficientVector(in_terms, intercept, slopes, RAW)


def check_heredity(coefs: CoefficientVector) -> tuple[bool, list[TermId]]:
    """True iff every nonzero second-order term has all parent mains nonzero.

    Returns the verdict and the list of violating second-order terms.
    Expects raw-scale coefficients: that is the scale on which the paper-style
    selection is read off.
    """
    nonzero_mains = {t.i for t in coefs.terms.terms if t.kind == MAIN and coefs.value(t) != 0.0}
    violators = []
    for t, v in zip(coefs.terms.terms, coefs.values):
        if t.is_second_order and v != 0.0 and not t.parents() <= nonzero_mains:
            violators.append(t)
    return (not violators), violators
