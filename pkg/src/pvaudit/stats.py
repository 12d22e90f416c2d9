"""Standard-normal functions and CI-to-p conversion for ratio measures."""

import math
from dataclasses import dataclass

from pvaudit import kernels
from pvaudit.errors import DegenerateIntervalError, InvalidArgumentError, RatioDomainError

P_FLOOR = 0.0001
Z_95 = 1.96

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PValue:
    raw: float
    clamped: float
    was_clamped: bool

    @classmethod
    def from_raw(cls, raw):
        return cls(raw=raw, clamped=max(raw, P_FLOOR), was_clamped=raw < P_FLOOR)


def _check_finite(**values):
    for name, v in values.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvalidArgumentError(f"{name} must be a finite number, got {v!r}")


def std_normal_cdf(z):
    """Standard normal CDF, via the complementary error function."""
    _check_finite(z=z)
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_quantile(p):
    """Inverse standard normal CDF (Wichura's AS241 rational approximation)."""
    _check_finite(p=p)
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError(f"p must lie in (0, 1), got {p!r}")
    return kernels.normal_quantile(float(p))


def critical_value(conf_level=0.95):
    """Two-sided critical z. Exactly 1.96 at the 95% level, as tabulated."""
    _check_finite(conf_level=conf_level)
    if not 0.0 < conf_level < 1.0:
        raise InvalidArgumentError(f"conf_level must lie in (0, 1), got {conf_level!r}")
    if conf_level == 0.95:
        return Z_95
    return std_normal_quantile(1.0 - (1.0 - conf_level) / 2.0)


def altman_bland_p(z):
    """Approximate two-sided p for a standard-normal test statistic ``z >= 0``."""
    return kernels.altman_bland_p(float(z))


def validate_ratio_ci(rr, lcl, ucl):
    _check_finite(rr=rr, lcl=lcl, ucl=ucl)
    if rr <= 0 or lcl <= 0 or ucl <= 0:
        raise RatioDomainError(f"ratio measures must be positive (rr={rr}, lcl={lcl}, ucl={ucl})")
    if lcl >= ucl:
        raise DegenerateIntervalError(f"lower limit {lcl} is not below upper limit {ucl}")


def ratio_se(lcl, ucl, conf_level=0.95):
    """Log-scale standard error recovered from a ratio confidence interval."""
    return (math.log(ucl) - math.log(lcl)) / (2.0 * critical_value(conf_level))


def p_from_ratio_ci(rr, lcl, ucl, conf_level=0.95):
    """Two-sided p-value for a ratio estimate given its confidence interval.

    z = |ln rr| / SE with SE = (ln ucl - ln lcl) / (2 z_c), then
    p = exp(-0.717 z - 0.416 z^2). The clamped value is floored at 0.0001.

    >>> p_from_ratio_ci(1.0, 0.909, 1.121).raw
    1.0
    """
    validate_ratio_ci(rr, lcl, ucl)
    zc = critical_value(conf_level)
    (raw,) = kernels.altman_bland_batch([float(rr)], [float(lcl)], [float(ucl)], zc)
    return PValue.from_raw(raw)


def p_from_ratio_ci_many(rr, lcl, ucl, conf_level=0.95):
    """Vectorised :func:`p_from_ratio_ci` over equal-length sequences."""
    rr, lcl, ucl = list(rr), list(lcl), list(ucl)
    if not len(rr) == len(lcl) == len(ucl):
        raise InvalidArgumentError("rr, lcl and ucl must have equal length")
    for r, lo, hi in zip(rr, lcl, ucl):
        validate_ratio_ci(r, lo, hi)
    zc = critical_value(conf_level)
    raws = kernels.altman_bland_batch(
        [float(x) for x in rr], [float(x) for x in lcl], [float(x) for x in ucl], zc
    )
    return [PValue.from_raw(r) for r in raws]
