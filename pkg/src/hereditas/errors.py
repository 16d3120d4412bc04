"""Exception types shared across the package."""


class HereditasError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(HereditasError, ValueError):
    """Inputs have missing, empty, or mismatched dimensions."""


class DegenerateColumnError(HereditasError, ValueError):
    """A design column has zero spread under the requested estimator."""

    def __init__(self, column_label, message=None):
        self.column_label = column_label
        super().__init__(message or f"column {column_label} has zero spread")


class InconsistentParamsError(HereditasError, ValueError):
    """Standardization parameters do not cover the requested terms."""


class SingularDesignError(HereditasError, ValueError):
    """Least-squares design is rank deficient."""


class InfeasibleStartError(HereditasError, ValueError):
    """Stepwise cannot start from the full model with this few rows."""


class InvalidConfigError(HereditasError, ValueError):
    """A simulation setting is internally inconsistent."""


class UnsupportedDistributionError(HereditasError, ValueError):
    """No analytic formula or Monte Carlo route for this distribution."""
