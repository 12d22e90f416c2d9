"""Post-study probability of findings being true, with reporting bias.

Expected 2x2 cell counts for ``c`` probed relationships given Type I rate
alpha, Type II rate beta, prevalence P and bias u. Bias moves a fraction u
of would-be negatives (both FN and TN) into reported positives.
"""

import csv
import io
import math
from dataclasses import dataclass

from pvaudit.errors import IndeterminateFormError, InvalidArgumentError


@dataclass(frozen=True)
class PredictiveParams:
    alpha: float
    beta: float
    prevalence: float
    bias: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "prevalence"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {v}")
        # beta = 0 (perfect power) is a legitimate limiting case
        if not 0.0 <= self.beta < 1.0:
            raise InvalidArgumentError(f"beta must lie in [0, 1), got {self.beta}")
        if not 0.0 <= self.bias <= 1.0:
            raise InvalidArgumentError(f"bias must lie in [0, 1], got {self.bias}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise InvalidArgumentError(f"c must be positive, got {self.c}")

    @classmethod
    def from_power(cls, alpha, power, prevalence, bias=0.0, c=1.0):
        return cls(alpha=alpha, beta=1.0 - power, prevalence=prevalence, bias=bias, c=c)


@dataclass(frozen=True)
class ContingencyCounts:
    tp: float
    fn: float
    tn: float
    fp: float


def contingency_with_bias(params):
    a, b, p, u, c = params.alpha, params.beta, params.prevalence, params.bias, params.c
    return ContingencyCounts(
        tp=c * (1 - b) * p + u * c * b * p,
        fn=c * b * p * (1 - u),
        tn=c * (1 - a) * (1 - p) * (1 - u),
        fp=c * a * (1 - p) + u * c * (1 - a) * (1 - p),
    )


def ppv(params):
    a, b, p, u = params.alpha, params.beta, params.prevalence, params.bias
    true_pos = (1 - b) * p + u * b * p
    return true_pos / (true_pos + a * (1 - p) + u * (1 - a) * (1 - p))


def npv(params):
    a, b, p, u = params.alpha, params.beta, params.prevalence, params.bias
    if u >= 1.0:
        raise IndeterminateFormError("NPV is 0/0 when bias u = 1")
    # the common (1 - u) factor cancels exactly
    true_neg = (1 - a) * (1 - p)
    return true_neg / (b * p + true_neg)


def log_grid(lo=1e-4, hi=1e-1, n_points=200):
    if not 0.0 < lo <= hi < 1.0:
        raise InvalidArgumentError(f"grid bounds must satisfy 0 < lo <= hi < 1, got {lo}, {hi}")
    if n_points < 1:
        raise InvalidArgumentError("n_points must be >= 1")
    if n_points == 1:
        return [lo]
    step = (math.log10(hi) - math.log10(lo)) / (n_points - 1)
    grid = [10 ** (math.log10(lo) + i * step) for i in range(n_points)]
    grid[-1] = hi
    return grid


def predictive_curve(alpha, beta, bias_levels, prevalence_grid=None, n_points=200):
    """Rows of (prevalence, bias, ppv, npv), ordered by bias then prevalence."""
    if prevalence_grid is None:
        prevalence_grid = log_grid(n_points=n_points)
    prevalence_grid = list(prevalence_grid)
    if not prevalence_grid:
        raise InvalidArgumentError("prevalence grid is empty")
    rows = []
    for u in bias_levels:
        for p in prevalence_grid:
            params = PredictiveParams(alpha, beta, p, u)
            rows.append((p, u, ppv(params), npv(params)))
    return rows


def curve_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["prevalence", "bias", "ppv", "npv"])
    for row in rows:
        w.writerow([repr(v) for v in row])
    return buf.getvalue()
