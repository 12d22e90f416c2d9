"""Analysis search-space counting and summary statistics."""

import math
from dataclasses import dataclass

from pvaudit.dataset import MAX_COVARIATES
from pvaudit.errors import EmptyInputError, InvalidArgumentError, SearchSpaceOverflowError

_INT64_MAX = 2**63 - 1

FIELDS = ("space1", "space2", "space3")


@dataclass(frozen=True)
class SearchSpaceResult:
    study_id: str
    space1: int
    space2: int
    space3: int


@dataclass(frozen=True)
class SearchSpaceSummary:
    minimum: int
    lower_quartile: float
    median: float
    upper_quartile: float
    maximum: int
    mean: float

    @property
    def mean_display(self):
        # round half up; Python's round() is banker's rounding
        return math.floor(self.mean + 0.5)

    def as_dict(self):
        return {
            "minimum": self.minimum,
            "lower_quartile": self.lower_quartile,
            "median": self.median,
            "upper_quartile": self.upper_quartile,
            "maximum": self.maximum,
            "mean": self.mean,
            "mean_display": self.mean_display,
        }


def compute_spaces(rec):
    """Space1 = outcomes*predictors*models*lags, Space2 = 2**covariates, Space3 = product."""
    if rec.covariates > MAX_COVARIATES:
        raise SearchSpaceOverflowError(f"{rec.study_id}: 2**{rec.covariates} overflows 64-bit counts")
    space1 = rec.outcomes * rec.predictors * rec.models * rec.lags
    space2 = 1 << rec.covariates
    space3 = space1 * space2
    if space3 > _INT64_MAX:
        raise SearchSpaceOverflowError(f"{rec.study_id}: search space {space3} overflows 64-bit counts")
    return SearchSpaceResult(rec.study_id, space1, space2, space3)


def _median_sorted(xs):
    n = len(xs)
    mid = n // 2
    if n % 2:
        return xs[mid]
    total = xs[mid - 1] + xs[mid]
    return total // 2 if total % 2 == 0 else total / 2


def tukey_hinges(values):
    """(lower hinge, median, upper hinge); for odd n both halves include the median."""
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise EmptyInputError("no values to summarise")
    half = (n + 1) // 2
    return _median_sorted(xs[:half]), _median_sorted(xs), _median_sorted(xs[n - half:])


def summarize_spaces(results, field="space3"):
    if field not in FIELDS:
        raise InvalidArgumentError(f"field must be one of {FIELDS}, got {field!r}")
    values = [getattr(r, field) for r in results]
    if not values:
        raise EmptyInputError("cannot summarise an empty list of search spaces")
    lo, med, hi = tukey_hinges(values)
    return SearchSpaceSummary(min(values), lo, med, hi, max(values), sum(values) / len(values))


def expected_false_positives(space3, rate=0.05):
    """Expected false positives across ``space3`` tests; a lower bound when tests correlate."""
    if space3 < 1:
        raise InvalidArgumentError(f"space3 must be >= 1, got {space3}")
    if not 0.0 < rate < 1.0:
        raise InvalidArgumentError(f"rate must lie in (0, 1), got {rate}")
    return space3 * rate


def format_fp_bound(value):
    return f"≥ {math.floor(value + 1e-9):,}"
