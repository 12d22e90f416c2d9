"""Inverse-variance fixed-effect and DerSimonian-Laird random-effects pooling."""

import json
import math
from dataclasses import asdict, dataclass

from pvaudit.errors import InsufficientDataError, InvalidArgumentError
from pvaudit.stats import Z_95, ratio_se, validate_ratio_ci

FIXED = "FixedEffect"
DERSIMONIAN_LAIRD = "DerSimonianLaird"
_METHOD_ALIASES = {"fixed": FIXED, "fe": FIXED, FIXED: FIXED,
                   "dl": DERSIMONIAN_LAIRD, "random": DERSIMONIAN_LAIRD, DERSIMONIAN_LAIRD: DERSIMONIAN_LAIRD}


@dataclass(frozen=True)
class PoolResult:
    method: str
    n: int
    pooled_log_rr: float
    pooled_se: float
    pooled_rr: float
    ci95: tuple
    q_statistic: float
    tau_squared: float
    i_squared_pct: float

    def as_dict(self):
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d

    def to_json(self):
        return json.dumps(self.as_dict())


def i_squared(q, df):
    """Share of total variation due to between-study heterogeneity, in percent."""
    if df < 1:
        raise InvalidArgumentError(f"df must be >= 1, got {df}")
    if q < 0:
        raise InvalidArgumentError(f"q must be >= 0, got {q}")
    if q == 0:
        return 0.0
    return max(0.0, (q - df) / q) * 100.0


def pool_log_effects(effects, ses, method="dl"):
    """Pool log-scale effects with known standard errors."""
    method = _METHOD_ALIASES.get(method)
    if method is None:
        raise InvalidArgumentError("method must be 'fixed' or 'dl'")
    k = len(effects)
    if k != len(ses):
        raise InvalidArgumentError("effects and ses differ in length")
    if k < 2:
        raise InsufficientDataError(f"pooling needs at least 2 studies, got {k}")
    if any(not (s > 0 and math.isfinite(s)) for s in ses):
        raise InvalidArgumentError("standard errors must be positive and finite")

    w = [1.0 / (s * s) for s in ses]
    sw = math.fsum(w)
    fixed = math.fsum(wi * y for wi, y in zip(w, effects)) / sw
    q = math.fsum(wi * (y - fixed) ** 2 for wi, y in zip(w, effects))
    df = k - 1

    if method == FIXED:
        tau2 = 0.0
        est, se = fixed, math.sqrt(1.0 / sw)
    else:
        c = sw - math.fsum(wi * wi for wi in w) / sw
        tau2 = max(0.0, (q - df) / c)
        if tau2 == 0.0:
            est, se = fixed, math.sqrt(1.0 / sw)
        else:
            ws = [1.0 / (s * s + tau2) for s in ses]
            sws = math.fsum(ws)
            est = math.fsum(wi * y for wi, y in zip(ws, effects)) / sws
            se = math.sqrt(1.0 / sws)

    lo, hi = est - Z_95 * se, est + Z_95 * se
    return PoolResult(
        method=method, n=k, pooled_log_rr=est, pooled_se=se, pooled_rr=math.exp(est),
        ci95=(math.exp(lo), math.exp(hi)), q_statistic=q, tau_squared=tau2,
        i_squared_pct=i_squared(q, df),
    )


def pool(dataset, method="dl"):
    """Pool a dataset's ratio estimates; SEs come from each 95% CI on the log scale."""
    effects, ses = [], []
    for r in dataset:
        validate_ratio_ci(r.rr, r.lcl, r.ucl)
        effects.append(math.log(r.rr))
        ses.append(ratio_se(r.lcl, r.ucl, r.conf_level))
    return pool_log_effects(effects, ses, method)


def compare_to_reported(result, rr, lcl, ucl, i2_pct=None):
    """Gaps between our pooled result and a published pooled estimate."""
    out = {
        "ours": {"rr": result.pooled_rr, "ci95": list(result.ci95), "i_squared_pct": result.i_squared_pct},
        "reported": {"rr": rr, "ci95": [lcl, ucl], "i_squared_pct": i2_pct},
        "abs_gap_rr": abs(result.pooled_rr - rr),
        "abs_gap_lcl": abs(result.ci95[0] - lcl),
        "abs_gap_ucl": abs(result.ci95[1] - ucl),
    }
    if i2_pct is not None:
        out["abs_gap_i_squared_pct"] = abs(result.i_squared_pct - i2_pct)
    return out
