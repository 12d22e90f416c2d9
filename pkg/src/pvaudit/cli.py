"""``audit`` command-line front end."""

import argparse
import csv
import io
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from pvaudit import dataset as dio
from pvaudit import published
from pvaudit.errors import AuditError, SchemaError
from pvaudit.pooling import compare_to_reported, pool
from pvaudit.predictive import PredictiveParams, curve_to_csv, log_grid, npv, ppv, predictive_curve
from pvaudit.pvplot import (
    PlotOptions,
    Thresholds,
    build_series,
    classify,
    render_plot,
    significance_counts,
)
from pvaudit.searchspace import (
    FIELDS,
    compute_spaces,
    expected_false_positives,
    format_fp_bound,
    summarize_spaces,
)
from pvaudit.simulate import SimConfig, simulate_dataset
from pvaudit.stats import p_from_ratio_ci

log = logging.getLogger("pvaudit")


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AuditError(f"cannot read {path}: {exc.strerror}") from exc


def _load_effects(path, label=None, strict=False):
    label = label or dio.label_for_file(Path(path).stem)
    expected = dio.FIXTURES.get(label, (None, None))[1]
    ds = dio.parse_effect_csv(_read(path), label, strict=strict, expected_count=expected)
    for err in ds.row_errors:
        print(f"{path}: {err}", file=sys.stderr)
    return ds


def _emit(text, out=None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def counts_dict(counts):
    return {"n": counts.n, "n_gt_05": counts.n_gt_05, "pct_gt_05": counts.pct_gt_05,
            "n_le_05": counts.n_le_05, "n_le_001": counts.n_le_001}


def counts_vs_published(label, counts):
    ref = published.SIGNIFICANCE_COUNTS.get(label)
    if ref is None:
        return None
    ours = (counts.n, counts.n_gt_05, counts.n_le_05, counts.n_le_001)
    names = ("n", "n_gt_05", "n_le_05", "n_le_001")
    return {name: {"computed": a, "published": b, "delta": a - b} for name, a, b in zip(names, ours, ref)}


def pvalue_mismatches(ds, tol=published.P_TOLERANCE):
    out = []
    for r in ds:
        if r.reported_p is None:
            continue
        p = p_from_ratio_ci(r.rr, r.lcl, r.ucl, r.conf_level)
        if abs(p.clamped - r.reported_p) > tol:
            out.append({"study_id": r.study_id, "computed": p.clamped, "printed": r.reported_p})
    return out


# -- subcommands -------------------------------------------------------------

def cmd_convert(args):
    ds = _load_effects(args.input, args.label)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["study_id", "first_author", "pub_year", "subgroup", "rr", "lcl", "ucl",
                "p_raw", "p_clamped", "was_clamped", "flags", "reported_p"])
    for r in ds:
        p = p_from_ratio_ci(r.rr, r.lcl, r.ucl, r.conf_level)
        w.writerow([r.study_id, r.first_author, "" if r.pub_year is None else r.pub_year,
                    r.subgroup or "", repr(r.rr), repr(r.lcl), repr(r.ucl), repr(p.raw),
                    repr(p.clamped), int(p.was_clamped), ";".join(r.flags),
                    "" if r.reported_p is None else repr(r.reported_p)])
    _emit(buf.getvalue(), args.output)
    for note in ds.diagnostics:
        print(f"{ds.label}: {note}", file=sys.stderr)
    return 1 if ds.row_errors else 0


def cmd_plot(args):
    ds = _load_effects(args.input, args.label)
    opts = PlotOptions(width=args.width, height=args.height)
    text = render_plot(build_series(ds), args.out, fmt=args.format, options=opts)
    if not args.out:
        sys.stdout.write(text)
    return 1 if ds.row_errors else 0


def cmd_classify(args):
    ds = _load_effects(args.input, args.label)
    th = Thresholds.from_file(args.thresholds) if args.thresholds else None
    result = classify(build_series(ds), th)
    sys.stdout.write(result.to_json() + "\n")
    return 1 if ds.row_errors else 0


def cmd_counts(args):
    ds = _load_effects(args.input, args.label)
    counts = significance_counts(build_series(ds))
    out = {"label": ds.label, **counts_dict(counts)}
    cmp = counts_vs_published(ds.label, counts)
    if cmp is not None:
        out["published_comparison"] = cmp
    sys.stdout.write(_json(out))
    return 1 if ds.row_errors else 0


def space_report(records, fp_rate=0.05):
    results = [compute_spaces(r) for r in records]
    studies = []
    mismatches = []
    for rec, res in zip(records, results):
        fp = expected_false_positives(res.space3, fp_rate)
        studies.append({"study_id": res.study_id, "space1": res.space1, "space2": res.space2,
                        "space3": res.space3, "expected_false_positives": fp,
                        "expected_false_positives_display": format_fp_bound(fp)})
        if rec.reported_spaces is not None and rec.reported_spaces != (res.space1, res.space2, res.space3):
            mismatches.append({"study_id": rec.study_id, "computed": [res.space1, res.space2, res.space3],
                               "printed": list(rec.reported_spaces)})
    summary = {f: summarize_spaces(results, f).as_dict() for f in FIELDS}
    return results, {"studies": studies, "summary": summary, "printed_mismatches": mismatches}


def spaces_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["study_id", "space1", "space2", "space3"])
    for r in results:
        w.writerow([r.study_id, r.space1, r.space2, r.space3])
    return buf.getvalue()


def cmd_space(args):
    records = dio.parse_searchspace_csv(_read(args.input))
    results, rep = space_report(records, args.fp_rate)
    if args.out:
        Path(args.out).write_text(spaces_csv(results), encoding="utf-8")
    sys.stdout.write(_json(rep))
    return 0


def _parse_grid(text):
    try:
        lo, hi, n = text.split(":")
        return log_grid(float(lo), float(hi), int(n))
    except ValueError:
        raise AuditError(f"--grid expects lo:hi:n, got {text!r}") from None


def cmd_predict(args):
    biases = [float(x) for x in args.bias.split(",") if x.strip()]
    grid = _parse_grid(args.grid)
    rows = predictive_curve(args.alpha, 1.0 - args.power, biases, grid)
    _emit(curve_to_csv(rows), args.out)
    return 0


def cmd_pool(args):
    ds = _load_effects(args.input, args.label)
    result = pool(ds, args.method)
    out = {"label": ds.label, **result.as_dict()}
    ref = published.POOLED.get(ds.label)
    if ref is not None:
        out["published_comparison"] = compare_to_reported(result, *ref)
    sys.stdout.write(_json(out))
    return 1 if ds.row_errors else 0


def cmd_simulate(args):
    overrides = {k: v for k, v in {
        "scenario": args.scenario, "n_studies": args.n, "tests_per_study": args.tests,
        "hacked_fraction": args.hacked_frac, "seed": args.seed, "true_log_rr": args.delta,
    }.items() if v is not None}
    if args.se_range:
        overrides["se_range"] = tuple(float(x) for x in args.se_range.split(","))
    cfg = SimConfig.from_file(args.config, **overrides) if args.config else SimConfig(**overrides)
    _emit(dio.dumps_effect_csv(simulate_dataset(cfg)), args.out)
    return 0


def _bundled_data_dir():
    return Path(str(resources.files("pvaudit").joinpath("data")))


def _csv_kind(text):
    header = next(csv.reader(io.StringIO(text)), [])
    cols = {h.strip() for h in header}
    if set(dio.EFFECT_COLUMNS) <= cols:
        return "effect"
    if set(dio.SEARCHSPACE_COLUMNS) <= cols:
        return "searchspace"
    if set(dio.PREVALENCE_COLUMNS) <= cols:
        return "prevalence"
    return None


def _dataset_section(ds, out_dir, plot_dir):
    series = build_series(ds)
    counts = significance_counts(series)
    cls = classify(series)
    safe = ds.label.replace("/", "_")
    svg_rel = f"{plot_dir}/{safe}.svg"
    csv_rel = f"{plot_dir}/{safe}.csv"
    render_plot(series, out_dir / svg_rel, fmt="svg")
    render_plot(series, out_dir / csv_rel, fmt="csv")
    section = {
        "n": len(ds),
        "counts": counts_dict(counts),
        "classification": json.loads(cls.to_json()),
        "plots": {"svg": svg_rel, "csv": csv_rel},
    }
    notes = [f"{ds.label}: {d}" for d in ds.diagnostics]
    cmp = counts_vs_published(ds.label, counts)
    if cmp is not None:
        section["published_counts"] = cmp
        for name, cell in cmp.items():
            if cell["delta"]:
                notes.append(f"{ds.label}: {name} computed {cell['computed']}, published "
                             f"{cell['published']} (delta {cell['delta']:+d})")
    mism = pvalue_mismatches(ds)
    section["printed_p_mismatches"] = mism
    for m in mism:
        notes.append(f"{ds.label}: {m['study_id']} computed p {m['computed']:.6g} vs printed {m['printed']}")
    if len(ds) >= 2:
        section["pool"] = {m: pool(ds, m).as_dict() for m in ("fixed", "dl")}
        ref = published.POOLED.get(ds.label)
        if ref is not None:
            section["pool"]["published_comparison"] = compare_to_reported(pool(ds, "dl"), *ref)
    return section, notes


def build_report(data_dir, out_dir):
    """Run every analysis over the CSVs in ``data_dir``; returns (report dict, errors)."""
    data_dir, out_dir = Path(data_dir), Path(out_dir)
    (out_dir / "plots").mkdir(parents=True, exist_ok=True)
    report = {"datasets": {}, "search_space": None, "predictive": None,
              "discrepancies": [], "errors": []}
    effects, spaces, prevalence = [], [], []
    for path in sorted(data_dir.glob("*.csv")):
        text = path.read_text(encoding="utf-8")
        kind = _csv_kind(text)
        if kind is None:
            report["errors"].append(f"{path.name}: unrecognised CSV header")
        elif kind == "effect":
            effects.append((path, text))
        elif kind == "searchspace":
            spaces.append((path, text))
        else:
            prevalence.append((path, text))

    sections = {}
    for path, text in effects:
        label = dio.label_for_file(path.stem)
        try:
            ds = dio.parse_effect_csv(text, label, strict=True,
                                      expected_count=dio.FIXTURES.get(label, (None, None))[1])
            section, notes = _dataset_section(ds, out_dir, "plots")
        except (AuditError, OSError) as exc:
            report["errors"].append(f"{path.name}: {exc}")
            continue
        section["file"] = path.name
        sections[label] = (section, notes)
    for label in sorted(sections):
        section, notes = sections[label]
        report["datasets"][label] = section
        report["discrepancies"].extend(notes)

    for path, text in spaces:
        try:
            records = dio.parse_searchspace_csv(text)
            results, rep = space_report(records)
        except AuditError as exc:
            report["errors"].append(f"{path.name}: {exc}")
            continue
        (out_dir / "search_space.csv").write_text(spaces_csv(results), encoding="utf-8")
        rep["csv"] = "search_space.csv"
        rep["file"] = path.name
        for m in rep["printed_mismatches"]:
            report["discrepancies"].append(f"search space {m['study_id']}: computed {m['computed']} "
                                           f"vs printed {m['printed']}")
        for field, ref in published.SEARCHSPACE_SUMMARY.items():
            s = rep["summary"][field]
            ours = (s["minimum"], s["lower_quartile"], s["median"], s["upper_quartile"],
                    s["maximum"], s["mean_display"])
            if ours != ref:
                report["discrepancies"].append(f"search space summary {field}: computed {list(ours)} "
                                               f"vs published {list(ref)}")
        report["search_space"] = rep
        break

    rows = predictive_curve(0.05, 0.2, [0.2, 0.8], log_grid())
    (out_dir / "predictive_curve.csv").write_text(curve_to_csv(rows), encoding="utf-8")
    pred = {"alpha": 0.05, "power": 0.8, "bias_levels": [0.2, 0.8], "csv": "predictive_curve.csv",
            "diseases": []}
    for path, text in prevalence:
        try:
            for rec in dio.parse_prevalence_csv(text):
                for u in (0.2, 0.8):
                    params = PredictiveParams.from_power(0.05, 0.8, rec.prevalence, u)
                    pred["diseases"].append({"disease": rec.disease, "prevalence": rec.prevalence,
                                             "bias": u, "ppv": ppv(params), "npv": npv(params)})
        except AuditError as exc:
            report["errors"].append(f"{path.name}: {exc}")
    report["predictive"] = pred
    return report


def cmd_report(args):
    data_dir = Path(args.data) if args.data else _bundled_data_dir()
    out_dir = Path(args.out)
    report = build_report(data_dir, out_dir)
    if report["datasets"] or report["search_space"]:
        (out_dir / "report.json").write_text(_json(report), encoding="utf-8")
    for err in report["errors"]:
        print(f"error: {err}", file=sys.stderr)
    return 1 if report["errors"] else 0


# -- argument parsing --------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="audit", description="Meta-analysis reliability audit tools.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def effect_input(p):
        p.add_argument("--input", required=True, help="effect CSV")
        p.add_argument("--label", help="dataset label (defaults from the file name)")

    p = sub.add_parser("convert", help="CI to p-value conversion for each row")
    effect_input(p)
    p.add_argument("--output", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("plot", help="p-value plot as SVG or plot-data CSV")
    effect_input(p)
    p.add_argument("--format", choices=("svg", "csv"), default="svg")
    p.add_argument("--out")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("classify", help="classify the p-value plot shape")
    effect_input(p)
    p.add_argument("--thresholds", help="key = value threshold file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("counts", help="significance counts (>.05, <=.05, <=.001)")
    effect_input(p)
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("space", help="analysis search spaces and summary")
    p.add_argument("--input", required=True, help="search-space CSV")
    p.add_argument("--fp-rate", type=float, default=0.05)
    p.add_argument("--out", help="write study_id,space1,space2,space3 CSV here")
    p.set_defaults(func=cmd_space)

    p = sub.add_parser("predict", help="PPV/NPV curve over prevalence")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--power", type=float, default=0.8)
    p.add_argument("--bias", default="0.2,0.8", help="comma-separated bias levels")
    p.add_argument("--grid", default="1e-4:1e-1:200", help="lo:hi:n log-spaced prevalence grid")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("pool", help="fixed-effect or DerSimonian-Laird pooling")
    effect_input(p)
    p.add_argument("--method", choices=("dl", "fixed"), default="dl")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("simulate", help="synthetic meta-analysis effect CSV")
    p.add_argument("--config", help="key = value scenario file; flags override it")
    p.add_argument("--scenario", choices=("null", "alt", "phacked"))
    p.add_argument("--n", type=int)
    p.add_argument("--tests", type=int)
    p.add_argument("--hacked-frac", type=float)
    p.add_argument("--delta", type=float, help="true log risk ratio")
    p.add_argument("--se-range", help="lo,hi per-study standard error range")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="full audit over a data directory")
    p.add_argument("--data", help="directory of CSVs (default: bundled data)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (AuditError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
