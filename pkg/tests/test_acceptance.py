"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import filecmp
import math
import random
import time

import pytest

from pvaudit import dataset as dio
from pvaudit import published
from pvaudit.cli import _bundled_data_dir, build_report, main
from pvaudit.pooling import compare_to_reported, pool, pool_log_effects
from pvaudit.predictive import PredictiveParams, contingency_with_bias, npv, ppv
from pvaudit.pvplot import (
    BILINEAR_MIXTURE,
    MOSTLY_SIGNIFICANT,
    UNIFORM45,
    build_series,
    classify,
    significance_counts,
)
from pvaudit.searchspace import compute_spaces, expected_false_positives, format_fp_bound, summarize_spaces
from pvaudit.simulate import SimConfig, calibrate, false_positive_rate, simulate_replicates
from pvaudit.stats import p_from_ratio_ci

TABLE1_PREVALENCE = [0.079, 0.059, 0.056, 0.094, 0.037, 0.072, 0.0040, 0.0017]


@pytest.fixture
def verdict(capsys):
    def emit(number, name, failures, elapsed=None):
        status = "PASS" if not failures else "FAIL"
        timing = "" if elapsed is None else f" [{elapsed:.2f}s]"
        detail = "" if not failures else " :: " + "; ".join(failures)
        with capsys.disabled():
            print(f"\ncriterion {number} {name}: {status}{timing}{detail}")
        assert not failures, "; ".join(failures)
    return emit


def printed_mismatches(ds, tol=2e-3):
    bad, checked = [], 0
    for r in ds:
        if r.reported_p is None:
            continue
        checked += 1
        p = p_from_ratio_ci(r.rr, r.lcl, r.ucl).clamped
        if abs(p - r.reported_p) > tol:
            bad.append((r.study_id, p, r.reported_p))
    return checked, bad


def test_criterion_1_pm25_pvalues(verdict):
    t0 = time.perf_counter()
    ds = dio.load_fixture("PM2.5")
    checked, bad = printed_mismatches(ds)
    anchors = {"Sheppard L": 0.001249, "Li S": 0.010805, "Lavigne E": 1.0, "Lee SL": 0.0001}
    got = {r.first_author: p_from_ratio_ci(r.rr, r.lcl, r.ucl).clamped for r in ds if r.first_author in anchors}
    elapsed = time.perf_counter() - t0
    failures = [f"{sid}: {p:.6f} vs {q}" for sid, p, q in bad]
    if checked != 37:
        failures.append(f"checked {checked} rows, expected 37")
    failures += [f"anchor {a}: {got.get(a)} vs {v}" for a, v in anchors.items()
                 if a not in got or abs(got[a] - v) > 2e-3]
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s")
    verdict(1, "PM2.5 p-values", failures, elapsed)


def test_criterion_2_all_pollutant_pvalues(verdict):
    t0 = time.perf_counter()
    total = matched = 0
    mismatched = []
    for label in dio.POLLUTANTS:
        checked, bad = printed_mismatches(dio.load_fixture(label))
        total += checked
        matched += checked - len(bad)
        mismatched += [(label, *b) for b in bad]
    # every mismatch must surface in the discrepancy report
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        rep = build_report(_bundled_data_dir(), tmp)
    listed = {(label, m["study_id"]) for label, sec in rep["datasets"].items() for m in sec["printed_p_mismatches"]}
    elapsed = time.perf_counter() - t0
    failures = []
    if total < 300 or matched / total < 0.95:
        failures.append(f"{matched}/{total} matched")
    failures += [f"{lab} {sid} not reported" for lab, sid, *_ in mismatched if (lab, sid) not in listed]
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.2f}s")
    verdict(2, f"pollutant p-values ({matched}/{total} within 2e-3)", failures, elapsed)


def test_criterion_3_table6_counts(verdict, tmp_path):
    failures = []
    for label in dio.POLLUTANTS:
        c = significance_counts(build_series(dio.load_fixture(label)))
        ours = (c.n, c.n_gt_05, c.n_le_05, c.n_le_001)
        ref = published.SIGNIFICANCE_COUNTS[label]
        for name, a, b in zip(("n", ">.05", "<=.05", "<=.001"), ours, ref):
            if abs(a - b) > 1:
                failures.append(f"{label} {name}: computed {a}, published {b}")
        if label == "PM2.5" and c.n_le_001 != 8:
            failures.append(f"PM2.5 <=.001 is {c.n_le_001}, expected exactly 8")
    rep = build_report(_bundled_data_dir(), tmp_path)
    if not any(d.startswith("PM2.5: n_le_05 computed 15, published 14") for d in rep["discrepancies"]):
        failures.append("PM2.5 14 vs 15 off-by-one missing from discrepancy report")
    verdict(3, "significance counts", failures)


def test_criterion_4_search_space(verdict):
    failures = []
    records = dio.load_searchspace_fixture()
    results = [compute_spaces(r) for r in records]
    for rec, res in zip(records, results):
        if (res.space1, res.space2, res.space3) != rec.reported_spaces:
            failures.append(f"{rec.study_id}: computed {(res.space1, res.space2, res.space3)} "
                            f"vs printed {rec.reported_spaces}")
    s = summarize_spaces(results)
    ours = (s.minimum, s.lower_quartile, s.median, s.upper_quartile, s.maximum, s.mean_display)
    if ours != (96, 1536, 15360, 40960, 89600, 22866):
        failures.append(f"summary {ours}")
    examples = {(1, 6, 1, 1, 0): 6, (1, 6, 1, 3, 7): 2304, (5, 6, 1, 3, 7): 23040}
    for counts, want in examples.items():
        got = compute_spaces(dio.SearchSpaceRecord("ex", *counts)).space3
        if got != want:
            failures.append(f"example {counts}: {got} vs {want}")
    if format_fp_bound(expected_false_positives(2304)) != "≥ 115":
        failures.append("FP bound for 2304")
    if format_fp_bound(expected_false_positives(23040)) != "≥ 1,152":
        failures.append("FP bound for 23040")
    verdict(4, "search space tables", failures)


def test_criterion_5_predictive(verdict):
    failures = []
    for p in TABLE1_PREVALENCE:
        for u in (0.2, 0.8):
            params = PredictiveParams.from_power(0.05, 0.8, p, u)
            if not ppv(params) < 0.30:
                failures.append(f"PPV {ppv(params):.3f} at P={p}, u={u}")
            if not npv(params) > 0.95:
                failures.append(f"NPV {npv(params):.4f} at P={p}, u={u}")
    for u in (0.2, 0.8):
        if not ppv(PredictiveParams.from_power(0.05, 0.8, 0.079, u)) < 0.25:
            failures.append(f"asthma PPV at u={u}")
    gap = abs(npv(PredictiveParams.from_power(0.05, 0.8, 0.079, 0.2))
              - npv(PredictiveParams.from_power(0.05, 0.8, 0.079, 0.8)))
    if gap > 1e-12:
        failures.append(f"NPV bias gap {gap}")
    rng = random.Random(10_000)
    worst = 0.0
    for _ in range(10_000):
        pr = PredictiveParams(rng.uniform(1e-3, 0.5), rng.uniform(0, 0.99), rng.uniform(1e-4, 0.999),
                              rng.uniform(0, 1), rng.uniform(1, 1e5))
        c = contingency_with_bias(pr)
        for lhs, rhs in ((c.tp + c.fn, pr.c * pr.prevalence), (c.fp + c.tn, pr.c * (1 - pr.prevalence)),
                         (c.tp + c.fn + c.fp + c.tn, pr.c)):
            worst = max(worst, abs(lhs - rhs) / rhs)
    if worst > 1e-12:
        failures.append(f"conservation relative error {worst:.2e}")
    verdict(5, "PPV/NPV claims", failures)


def test_criterion_6_classifier_fixtures(verdict):
    expected = {label: BILINEAR_MIXTURE for label in dio.POLLUTANTS}
    expected.update(CML=UNIFORM45, Exercise=UNIFORM45, Mesothelioma=MOSTLY_SIGNIFICANT, Smoking=MOSTLY_SIGNIFICANT)
    failures = []
    for label, want in expected.items():
        got = classify(build_series(dio.load_fixture(label))).verdict
        if got != want:
            failures.append(f"{label}: {got}, expected {want}")
    verdict(6, "classifier fixtures", failures)


def test_criterion_7_simulator_calibration(verdict):
    t0 = time.perf_counter()
    failures = []
    null = calibrate(SimConfig("null", 40, seed=1), 500)
    hacked = calibrate(SimConfig("phacked", 40, 50, 0.5, seed=2), 500)
    alt = calibrate(SimConfig("alt", 40, true_log_rr=0.175, se_range=(0.01, 0.05), seed=3), 500)
    if null[UNIFORM45] < 475:
        failures.append(f"null Uniform45 {null[UNIFORM45]}/500")
    if alt[MOSTLY_SIGNIFICANT] < 450:
        failures.append(f"alternative MostlySignificant {alt[MOSTLY_SIGNIFICANT]}/500")
    if hacked[BILINEAR_MIXTURE] < 450:
        failures.append(f"p-hacked BilinearMixture {hacked[BILINEAR_MIXTURE]}/500")
    fp = false_positive_rate(SimConfig("null", 40, seed=4), 500)
    if abs(fp.rate - 0.05) > 3 * fp.mc_se:
        failures.append(f"null rate {fp.rate:.4f} +/- {fp.mc_se:.4f}")
    m20 = false_positive_rate(SimConfig("phacked", 40, 20, 1.0, seed=5), 500)
    target = 1 - 0.95**20
    if abs(m20.rate - target) > 3 * m20.mc_se:
        failures.append(f"min-of-20 rate {m20.rate:.4f} vs {target:.4f} (se {m20.mc_se:.4f})")
    elapsed = time.perf_counter() - t0
    if elapsed >= 60:
        failures.append(f"runtime {elapsed:.1f}s")
    summary = (f"null {null[UNIFORM45]}/500, alt {alt[MOSTLY_SIGNIFICANT]}/500, hacked {hacked[BILINEAR_MIXTURE]}/500, "
               f"rate {fp.rate:.4f}, min-of-20 {m20.rate:.4f}")
    verdict(7, f"simulator calibration ({summary})", failures, elapsed)


def test_criterion_8_pooling(verdict):
    failures = []
    for label, _ in dio.FIXTURES.items():
        ds = dio.load_fixture(label)
        f, d = pool(ds, "fixed"), pool(ds, "dl")
        if f.ci95[1] - f.ci95[0] > d.ci95[1] - d.ci95[0]:
            failures.append(f"{label}: fixed CI wider than DL")
        logs = [math.log(r.rr) for r in ds]
        for res in (f, d):
            if not min(logs) <= res.pooled_log_rr <= max(logs):
                failures.append(f"{label} {res.method}: estimate outside study range")
    cmp = compare_to_reported(pool(dio.load_fixture("PM2.5"), "dl"), *published.POOLED["PM2.5"])
    if not {"abs_gap_rr", "abs_gap_lcl", "abs_gap_ucl", "abs_gap_i_squared_pct"} <= set(cmp):
        failures.append("PM2.5 diagnostic comparison incomplete")
    # three-study oracle
    y, s = [0.10, 0.60, -0.30], [0.10, 0.20, 0.15]
    w = [1 / v**2 for v in s]
    fe = sum(a * b for a, b in zip(w, y)) / sum(w)
    q = sum(a * (b - fe) ** 2 for a, b in zip(w, y))
    tau2 = max(0.0, (q - 2) / (sum(w) - sum(a * a for a in w) / sum(w)))
    ws = [1 / (v**2 + tau2) for v in s]
    dl = sum(a * b for a, b in zip(ws, y)) / sum(ws)
    res = pool_log_effects(y, s, "dl")
    if abs(res.pooled_log_rr - dl) > 1e-10 or abs(res.pooled_se - sum(ws) ** -0.5) > 1e-10:
        failures.append("three-study oracle mismatch")
    ours = cmp["ours"]
    verdict(8, f"pooling (PM2.5 DL {ours['rr']:.4f}, I2 {ours['i_squared_pct']:.1f}% vs 1.023, 82.8%)", failures)


def test_criterion_9_determinism(verdict, tmp_path, capsys):
    failures = []
    for run in ("a", "b"):
        assert main(["report", "--out", str(tmp_path / run)]) == 0
    capsys.readouterr()
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")

    def diffs(c):
        out = list(c.diff_files) + c.left_only + c.right_only + c.funny_files
        for sub in c.subdirs.values():
            out += diffs(sub)
        return out

    # dircmp compares shallowly; confirm bytes explicitly
    for path in (tmp_path / "a").rglob("*"):
        if path.is_file() and path.read_bytes() != (tmp_path / "b" / path.relative_to(tmp_path / "a")).read_bytes():
            failures.append(f"report file differs: {path.name}")
    failures += [f"report file differs: {n}" for n in diffs(cmp)]
    cfg = SimConfig("phacked", 40, 50, 0.5, seed=42)
    serial = [dio.dumps_effect_csv(d) for d in simulate_replicates(cfg, 16, workers=1)]
    parallel = [dio.dumps_effect_csv(d) for d in simulate_replicates(cfg, 16, workers=4)]
    if serial != parallel:
        failures.append("simulator output depends on worker count")
    verdict(9, "determinism", failures)
