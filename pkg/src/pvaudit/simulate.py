"""Synthetic meta-analyses under null, alternative and p-hacked regimes.

Every study draws from its own counter-based random stream keyed by
(seed, study index), so output does not depend on generation order or on
how work is split across processes.
"""

import configparser
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from pvaudit import kernels
from pvaudit.dataset import EffectRecord, PollutantDataset
from pvaudit.errors import InvalidArgumentError
from pvaudit.pvplot import SIG_LEVEL, build_series, classify, series_from_pvalues
from pvaudit.stats import P_FLOOR, Z_95

ALL_NULL = "AllNull"
ALL_ALTERNATIVE = "AllAlternative"
PHACKED_MIXTURE = "PHackedMixture"
SCENARIOS = {
    "null": ALL_NULL, ALL_NULL: ALL_NULL,
    "alt": ALL_ALTERNATIVE, ALL_ALTERNATIVE: ALL_ALTERNATIVE,
    "phacked": PHACKED_MIXTURE, PHACKED_MIXTURE: PHACKED_MIXTURE,
}
_U64 = 2**64
# offsets replicate seeds away from the study-index range of the base stream
_REPLICATE_OFFSET = 1 << 40


@dataclass(frozen=True)
class SimConfig:
    scenario: str = ALL_NULL
    n_studies: int = 40
    tests_per_study: int = 1
    hacked_fraction: float = 0.0
    true_log_rr: float = 0.0
    se_range: tuple = (0.01, 0.15)
    seed: int = 0

    def __post_init__(self):
        scenario = SCENARIOS.get(self.scenario)
        if scenario is None:
            raise InvalidArgumentError(f"unknown scenario {self.scenario!r}")
        object.__setattr__(self, "scenario", scenario)
        if self.n_studies < 5:
            raise InvalidArgumentError(f"n_studies must be >= 5, got {self.n_studies}")
        if self.tests_per_study < 1:
            raise InvalidArgumentError(f"tests_per_study must be >= 1, got {self.tests_per_study}")
        if not 0.0 <= self.hacked_fraction <= 1.0:
            raise InvalidArgumentError(f"hacked_fraction must lie in [0, 1], got {self.hacked_fraction}")
        lo, hi = (float(x) for x in self.se_range)
        if not (0.0 < lo <= hi and math.isfinite(hi)):
            raise InvalidArgumentError(f"se_range must satisfy 0 < lo <= hi, got {self.se_range}")
        object.__setattr__(self, "se_range", (lo, hi))
        if not 0 <= self.seed < _U64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if not math.isfinite(self.true_log_rr):
            raise InvalidArgumentError("true_log_rr must be finite")
        if scenario == ALL_NULL:
            object.__setattr__(self, "true_log_rr", 0.0)

    @property
    def n_hacked(self):
        if self.scenario != PHACKED_MIXTURE:
            return 0
        return math.floor(self.hacked_fraction * self.n_studies + 0.5)

    @classmethod
    def from_file(cls, path, **overrides):
        """Read a ``key = value`` file. Keys match the field names; ``se_range`` is ``lo,hi``."""
        parser = configparser.ConfigParser()
        parser.read_string("[sim]\n" + Path(path).read_text(encoding="utf-8"))
        raw = dict(parser["sim"])
        kwargs = {}
        conv = {"scenario": str, "n_studies": int, "tests_per_study": int,
                "hacked_fraction": float, "true_log_rr": float, "seed": int}
        for key, value in raw.items():
            if key == "se_range":
                kwargs[key] = tuple(float(x) for x in value.split(","))
            elif key in conv:
                kwargs[key] = conv[key](value)
            else:
                raise InvalidArgumentError(f"unknown simulation key {key!r}")
        kwargs.update(overrides)
        return cls(**kwargs)


def replicate_seed(seed, replicate):
    return kernels.stream_key(seed, _REPLICATE_OFFSET + replicate)


def for_replicate(config, replicate):
    return replace(config, seed=replicate_seed(config.seed, replicate))


def simulate_estimates(config, start=0, count=None):
    """(log estimates, standard errors) for studies ``start .. start+count-1``."""
    if count is None:
        count = config.n_studies - start
    lo, hi = config.se_range
    m = config.tests_per_study if config.scenario == PHACKED_MIXTURE else 1
    return kernels.simulate_studies(
        config.seed, start, count, m, config.n_hacked, config.true_log_rr, lo, hi
    )


def simulate_dataset(config):
    ests, ses = simulate_estimates(config)
    width = len(str(config.n_studies))
    records = []
    for i, (est, se) in enumerate(zip(ests, ses)):
        records.append(EffectRecord(
            study_id=f"S{i + 1:0{width}d}",
            first_author="simulated",
            pub_year=None,
            subgroup="hacked" if i < config.n_hacked else None,
            rr=math.exp(est),
            lcl=math.exp(est - Z_95 * se),
            ucl=math.exp(est + Z_95 * se),
        ))
    return PollutantDataset(f"sim-{config.scenario}", records)


def simulate_pvalues(config):
    """Raw p-values of a simulated dataset, computed straight from (estimate, se).

    Agrees with converting :func:`simulate_dataset` records up to float rounding
    in the exp/log round trip; used where millions of studies are drawn.
    """
    ests, ses = simulate_estimates(config)
    return [kernels.altman_bland_p(abs(e) / s) for e, s in zip(ests, ses)]


def _classify_replicate(args):
    config, replicate, thresholds = args
    ds = simulate_dataset(for_replicate(config, replicate))
    return classify(build_series(ds), thresholds).verdict


def simulate_replicates(config, replicates, workers=1):
    """Datasets for replicates 0..replicates-1; identical for any ``workers``."""
    cfgs = [for_replicate(config, r) for r in range(replicates)]
    if workers <= 1:
        return [simulate_dataset(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate_dataset, cfgs, chunksize=max(1, replicates // (4 * workers))))


def calibrate(config, replicates, thresholds=None, workers=1):
    """Counter of classifier verdicts over seeded replicates."""
    jobs = [(config, r, thresholds) for r in range(replicates)]
    if workers <= 1:
        verdicts = [_classify_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(_classify_replicate, jobs, chunksize=max(1, replicates // (4 * workers))))
    return Counter(verdicts)


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    mc_se: float
    n: int


def false_positive_rate(config, replicates, level=SIG_LEVEL):
    """Share of emitted studies with clamped p <= ``level`` across replicates."""
    if config.scenario == ALL_ALTERNATIVE:
        raise InvalidArgumentError("false-positive rate is defined for null or p-hacked scenarios")
    if replicates < 1:
        raise InvalidArgumentError("replicates must be >= 1")
    hits = total = 0
    for r in range(replicates):
        for p in simulate_pvalues(for_replicate(config, r)):
            hits += max(p, P_FLOOR) <= level
            total += 1
    rate = hits / total
    return RateEstimate(rate, math.sqrt(rate * (1 - rate) / total), total)


def classify_pvalues(pvalues, label="sim", thresholds=None):
    return classify(series_from_pvalues(pvalues, label), thresholds)
