"""Rank-ordered p-value plots: series construction, counts, shape classification, rendering."""

import configparser
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from pvaudit import kernels
from pvaudit.errors import AuditError, InsufficientDataError, InvalidArgumentError
from pvaudit.stats import PValue, p_from_ratio_ci_many

SIG_LEVEL = 0.05
TINY_LEVEL = 0.001
MIN_CLASSIFY = 5

UNIFORM45 = "Uniform45"
MOSTLY_SIGNIFICANT = "MostlySignificant"
BILINEAR_MIXTURE = "BilinearMixture"
INDETERMINATE = "Indeterminate"
VERDICTS = (UNIFORM45, MOSTLY_SIGNIFICANT, BILINEAR_MIXTURE, INDETERMINATE)


@dataclass(frozen=True)
class SeriesEntry:
    rank: int
    p_raw: float
    p_clamped: float
    study_id: str


@dataclass(frozen=True)
class PValueSeries:
    entries: tuple
    source_label: str

    def __len__(self):
        return len(self.entries)

    @property
    def clamped(self):
        return [e.p_clamped for e in self.entries]

    @property
    def raw(self):
        return [e.p_raw for e in self.entries]


@dataclass(frozen=True)
class SignificanceCounts:
    n: int
    n_gt_05: int
    n_le_05: int
    n_le_001: int

    @property
    def pct_gt_05(self):
        return round(100.0 * self.n_gt_05 / self.n)


@dataclass(frozen=True)
class Thresholds:
    """Cut-offs for :func:`classify`. All fractions are of the series length."""

    mostly_significant: float = 0.8
    uniform_max_sig: float = 0.1
    # one-sided binomial tail: significant count this likely under the null reads as chance
    chance_level: float = 0.01
    blade_tiny: float = 0.05
    blade_sig: float = 0.25
    min_null: float = 0.3

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise InvalidArgumentError(f"unknown threshold key(s): {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in mapping.items()})

    @classmethod
    def from_file(cls, path):
        """Read ``key = value`` lines (``#`` comments allowed)."""
        parser = configparser.ConfigParser()
        parser.read_string("[thresholds]\n" + Path(path).read_text(encoding="utf-8"))
        return cls.from_mapping(dict(parser["thresholds"]))


@dataclass(frozen=True)
class PlotClassification:
    verdict: str
    frac_sig: float
    frac_tiny: float
    frac_null: float
    ks_statistic: float
    ks_pvalue: float

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=False)


@dataclass(frozen=True)
class PlotOptions:
    width: int = 640
    height: int = 480
    title: str | None = None
    point_radius: float = 3.0


def build_series(dataset):
    records = list(dataset)
    if not records:
        raise InsufficientDataError("cannot build a p-value series from an empty dataset")
    pvalues = []
    by_level = {}
    for i, r in enumerate(records):
        by_level.setdefault(r.conf_level, []).append(i)
    pvalues = [None] * len(records)
    for level, idxs in by_level.items():
        try:
            ps = p_from_ratio_ci_many(
                [records[i].rr for i in idxs], [records[i].lcl for i in idxs],
                [records[i].ucl for i in idxs], conf_level=level,
            )
        except AuditError:
            # redo one by one to name the offending record
            for i in idxs:
                try:
                    p_from_ratio_ci_many([records[i].rr], [records[i].lcl], [records[i].ucl], level)
                except AuditError as exc:
                    raise type(exc)(f"{records[i].study_id}: {exc}") from exc
            raise
        for i, p in zip(idxs, ps):
            pvalues[i] = p
    order = sorted(range(len(records)), key=lambda i: (pvalues[i].raw, records[i].study_id))
    entries = tuple(
        SeriesEntry(rank, pvalues[i].raw, pvalues[i].clamped, records[i].study_id)
        for rank, i in enumerate(order, start=1)
    )
    return PValueSeries(entries, dataset.label)


def series_from_pvalues(pvalues, label="series", ids=None):
    """Series from bare raw p-values (used for simulated or external data)."""
    pvs = [PValue.from_raw(float(p)) for p in pvalues]
    if ids is None:
        width = len(str(len(pvs)))
        ids = [f"{label}-{i + 1:0{width}d}" for i in range(len(pvs))]
    order = sorted(range(len(pvs)), key=lambda i: (pvs[i].raw, ids[i]))
    return PValueSeries(
        tuple(SeriesEntry(k, pvs[i].raw, pvs[i].clamped, ids[i]) for k, i in enumerate(order, start=1)),
        label,
    )


def significance_counts(series):
    ps = series.clamped
    if not ps:
        raise InsufficientDataError("empty series")
    n = len(ps)
    le05 = sum(p <= SIG_LEVEL for p in ps)
    le001 = sum(p <= TINY_LEVEL for p in ps)
    return SignificanceCounts(n=n, n_gt_05=n - le05, n_le_05=le05, n_le_001=le001)


def kolmogorov_sf(x):
    """Survival function of the limiting Kolmogorov distribution."""
    if x <= 0.0:
        return 1.0
    if x < 1.0:
        # theta-function form converges fast for small x
        k = 1
        total = 0.0
        c = math.pi**2 / (8.0 * x * x)
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            total += term
            if term < 1e-17 * total:
                break
            k += 1
        return 1.0 - math.sqrt(2.0 * math.pi) / x * total
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += sign * term
        if term < 1e-17:
            break
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_uniformity(series):
    """One-sample KS test of the raw p-values against Uniform(0, 1); asymptotic p."""
    values = sorted(series.raw)
    n = len(values)
    if n < MIN_CLASSIFY:
        raise InsufficientDataError(f"KS test needs at least {MIN_CLASSIFY} values, got {n}")
    d = kernels.ks_statistic(values)
    return d, kolmogorov_sf(math.sqrt(n) * d)


def binomial_upper_tail(k, n, p):
    """P(X >= k) for X ~ Binomial(n, p)."""
    if k <= 0:
        return 1.0
    return math.fsum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


def classify(series, thresholds=None):
    """Read the plot shape from its significance fractions.

    Rules, first match wins:

    * MostlySignificant -- at least ``mostly_significant`` of p <= .05;
    * Uniform45 -- at most ``uniform_max_sig`` significant, or a significant
      count the null binomial(n, .05) reaches with probability >= ``chance_level``;
    * BilinearMixture -- a null shaft (``frac_null >= min_null``) plus a blade of
      small p-values (``frac_tiny >= blade_tiny`` or ``frac_sig >= blade_sig``);
    * otherwise Indeterminate.

    The KS statistic is reported alongside but never decides the verdict.
    """
    t = thresholds or Thresholds()
    n = len(series)
    if n < MIN_CLASSIFY:
        raise InsufficientDataError(f"classification needs at least {MIN_CLASSIFY} p-values, got {n}")
    counts = significance_counts(series)
    frac_sig = counts.n_le_05 / n
    frac_tiny = counts.n_le_001 / n
    frac_null = counts.n_gt_05 / n
    ks_d, ks_p = ks_uniformity(series)

    if frac_sig >= t.mostly_significant:
        verdict = MOSTLY_SIGNIFICANT
    elif frac_sig <= t.uniform_max_sig or binomial_upper_tail(counts.n_le_05, n, SIG_LEVEL) >= t.chance_level:
        verdict = UNIFORM45
    elif frac_null >= t.min_null and (frac_tiny >= t.blade_tiny or frac_sig >= t.blade_sig):
        verdict = BILINEAR_MIXTURE
    else:
        verdict = INDETERMINATE
    return PlotClassification(verdict, frac_sig, frac_tiny, frac_null, ks_d, ks_p)


def series_csv(series):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "p_raw", "p_clamped", "study_id"])
    for e in series.entries:
        w.writerow([e.rank, repr(e.p_raw), repr(e.p_clamped), e.study_id])
    return buf.getvalue()


def _esc(text):
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def series_svg(series, options=None):
    """Self-contained SVG of p (clamped) against rank with the .05 and 45-degree guides."""
    o = options or PlotOptions()
    n = len(series)
    left, right, top, bottom = 60.0, 20.0, 40.0, 50.0
    pw = o.width - left - right
    ph = o.height - top - bottom

    def sx(rank):
        return left + pw * rank / n

    def sy(p):
        return top + ph * (1.0 - p)

    title = o.title if o.title is not None else f"p-value plot: {series.source_label} (n = {n})"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{o.width}" height="{o.height}" '
        f'viewBox="0 0 {o.width} {o.height}">',
        f'<rect x="0" y="0" width="{o.width}" height="{o.height}" fill="white"/>',
        f'<text x="{o.width / 2:.2f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{_esc(title)}</text>',
        f'<g id="axes" stroke="black" stroke-width="1">'
        f'<line x1="{left:.2f}" y1="{sy(0):.2f}" x2="{left + pw:.2f}" y2="{sy(0):.2f}"/>'
        f'<line x1="{left:.2f}" y1="{sy(0):.2f}" x2="{left:.2f}" y2="{sy(1):.2f}"/></g>',
    ]
    ticks = ['<g id="ticks" font-family="sans-serif" font-size="10">']
    for p in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        ticks.append(
            f'<line x1="{left - 4:.2f}" y1="{sy(p):.2f}" x2="{left:.2f}" y2="{sy(p):.2f}" stroke="black"/>'
            f'<text x="{left - 7:.2f}" y="{sy(p) + 3:.2f}" text-anchor="end">{p:.1f}</text>'
        )
    step = max(1, math.ceil(n / 10))
    for r in range(step, n + 1, step):
        ticks.append(
            f'<line x1="{sx(r):.2f}" y1="{sy(0):.2f}" x2="{sx(r):.2f}" y2="{sy(0) + 4:.2f}" stroke="black"/>'
            f'<text x="{sx(r):.2f}" y="{sy(0) + 16:.2f}" text-anchor="middle">{r}</text>'
        )
    ticks.append("</g>")
    out.extend(ticks)
    out.append(
        f'<text x="{left + pw / 2:.2f}" y="{o.height - 10:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">rank</text>'
        f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {top + ph / 2:.2f})">p-value</text>'
    )
    out.append(
        f'<line class="ref-alpha" x1="{left:.2f}" y1="{sy(SIG_LEVEL):.2f}" x2="{left + pw:.2f}" '
        f'y2="{sy(SIG_LEVEL):.2f}" stroke="red" stroke-dasharray="4 3"/>'
    )
    out.append(
        f'<line class="ref-diagonal" x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(n):.2f}" '
        f'y2="{sy(1):.2f}" stroke="gray" stroke-dasharray="2 2"/>'
    )
    out.append('<g id="points" fill="steelblue">')
    for e in series.entries:
        out.append(
            f'<circle cx="{sx(e.rank):.2f}" cy="{sy(e.p_clamped):.2f}" r="{o.point_radius:g}">'
            f"<title>{_esc(e.study_id)}: p = {e.p_clamped:.6g}</title></circle>"
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plot(series, path=None, fmt="svg", options=None):
    """Render ``series`` as SVG or plot-data CSV; write to ``path`` when given.

    Returns the rendered text.
    """
    if fmt == "svg":
        text = series_svg(series, options)
    elif fmt == "csv":
        text = series_csv(series)
    else:
        raise InvalidArgumentError(f"unknown plot format {fmt!r}; use 'svg' or 'csv'")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write plot: {exc.strerror}", str(path)) from exc
    return text
