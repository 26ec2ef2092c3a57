"""Canonical JSON and Markdown/CSV tables for scores, runs and comparisons.

Scores are fractions internally and rendered as percentages with two
decimals, rounded half away from zero. Delta columns name their sign
convention in the header: ``base - row`` for degradation tables (positive
means the candidate is worse) and ``reported - obtained`` for
reported-vs-reproduced tables.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from . import SCHEMA_VERSION
from .corpus import DEFAULT_GENRE_MAP, GenreMap
from .errors import ReportError
from .scorer import PRF, GroupScore, MatchCounts, ScoreReport, rank_types
from .splits import OverlapStats
from .stats import RunSummary, TTestResult, delta

LAYOUTS = ("overall", "by_type", "by_source", "by_genre", "adversarial", "runs", "compare")
NA = "n/a"


def round2(x: float | None) -> str:
    """Two decimals, half away from zero, computed on the shortest repr of ``x``."""
    if x is None:
        return NA
    s = str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
    return "0.00" if s == "-0.00" else s


def pct(x: float | None) -> str:
    return NA if x is None else round2(100.0 * x)


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    values: tuple[float | None, ...]
    baseline: tuple[float | None, ...]
    deltas: tuple[float | None, ...]


@dataclass(frozen=True)
class ComparisonTable:
    """Rows share one ordered column list; ``delta = baseline - value``.

    ``scale`` is the factor applied when rendering (100 for fractions, 1 for
    values that are already percentages).
    """

    kind: str
    columns: tuple[str, ...]
    rows: tuple[ComparisonRow, ...]
    scale: float = 100.0

    def row(self, label: str) -> ComparisonRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def _sub(a: float | None, b: float | None) -> float | None:
    return None if a is None or b is None else a - b


def _make_row(label, values, baseline) -> ComparisonRow:
    values, baseline = tuple(values), tuple(baseline)
    return ComparisonRow(label, values, baseline, tuple(_sub(b, v) for v, b in zip(values, baseline)))


def comparison_from_values(columns: Sequence[str], rows: Mapping[str, Sequence[float | None]],
                           baseline: str = "None", scale: float = 1.0,
                           kind: str = "adversarial") -> ComparisonTable:
    """Build a table from raw numbers (e.g. F scores produced elsewhere)."""
    if baseline not in rows:
        raise ReportError(f"baseline row {baseline!r} missing")
    for label, vals in rows.items():
        if len(vals) != len(columns):
            raise ReportError(f"row {label!r} has {len(vals)} values for {len(columns)} columns")
    base = rows[baseline]
    ordered = [baseline] + [k for k in rows if k != baseline]
    return ComparisonTable(kind, tuple(columns),
                           tuple(_make_row(k, rows[k], base) for k in ordered), scale)


def _f1(g: GroupScore | None) -> float | None:
    return None if g is None or g.prf is None else g.prf.f1


def adversarial_table(results: Mapping[str, Mapping[str, ScoreReport]], target_type: str,
                      baseline: str = "None") -> ComparisonTable:
    """Overall and target-type F1 per system and setting, baseline row first.

    ``results`` maps system name -> setting name -> report.
    """
    systems = list(results)
    if not systems:
        raise ReportError("no systems given")
    settings = list(results[systems[0]])
    if baseline not in settings:
        raise ReportError(f"baseline setting {baseline!r} missing")
    columns = []
    for s in systems:
        columns += [f"{s}-All", f"{s}-{target_type}"]
    rows = {}
    for setting in [baseline] + [x for x in settings if x != baseline]:
        vals = []
        for s in systems:
            if setting not in results[s]:
                raise ReportError(f"system {s!r} has no result for setting {setting!r}")
            r = results[s][setting]
            vals += [r.prf.f1, _f1(r.by_type.get(target_type))]
        rows[setting] = vals
    return comparison_from_values(columns, rows, baseline, scale=100.0)


def _group_labels(r: ScoreReport) -> dict[str, GroupScore | PRF]:
    out: dict = {"overall": r.prf}
    for t, g in r.by_type.items():
        if g.gold:
            out[f"type:{t}"] = g
    for s, g in r.by_source.items():
        out[f"source:{s}"] = g
    for s, g in r.by_genre.items():
        out[f"genre:{s}"] = g
    return out


def _prf_values(x) -> tuple[float | None, ...]:
    p = x if isinstance(x, PRF) else x.prf
    return (None, None, None) if p is None else tuple(p)


def compare(baseline: ScoreReport, candidate: ScoreReport) -> ComparisonTable:
    """Per-group P/R/F1 of both reports with ``baseline - candidate`` deltas."""
    a, b = _group_labels(baseline), _group_labels(candidate)
    missing = sorted((set(a) - set(b)) | (set(b) - set(a)))
    if missing:
        raise ReportError("reports differ in structure; unmatched groups: " + ", ".join(missing))
    rows = tuple(_make_row(k, _prf_values(b[k]), _prf_values(a[k])) for k in a)
    return ComparisonTable("compare", ("precision", "recall", "f1"), rows, 100.0)


# ---------------------------------------------------------------- JSON

def _counts_dict(c: MatchCounts, nested: bool) -> dict:
    d = {"tp": c.tp, "fp": c.fp, "fn": c.fn}
    if nested:
        d["by_type"] = {t: _counts_dict(x, False) for t, x in c.by_type.items()}
    return d


def _prf_dict(p: PRF | None) -> dict:
    if p is None:
        return {"precision": None, "recall": None, "f1": None}
    return p._asdict()


def _group_dict(g: GroupScore, nested: bool) -> dict:
    return {**_counts_dict(g.counts, nested), "gold": g.gold, **_prf_dict(g.prf)}


def _payload(obj) -> dict:
    if isinstance(obj, ScoreReport):
        return {
            "kind": "score_report",
            "overall": {**_counts_dict(obj.counts, False), "gold": obj.counts.gold,
                        **_prf_dict(obj.prf)},
            "macro_f1": obj.macro_f1,
            "by_type": {t: _group_dict(g, False) for t, g in obj.by_type.items()},
            "by_source": {s: _group_dict(g, True) for s, g in obj.by_source.items()},
            "by_genre": {s: _group_dict(g, True) for s, g in obj.by_genre.items()},
            "source_order": list(obj.by_source),
            "genre_order": list(obj.by_genre),
        }
    if isinstance(obj, RunSummary):
        return {"kind": "run_summary", "n": obj.n, "mean": obj.mean, "sample_sd": obj.sample_sd,
                "min": obj.min, "max": obj.max}
    if isinstance(obj, TTestResult):
        return {"kind": "ttest", "t_statistic": obj.t_statistic,
                "degrees_of_freedom": obj.degrees_of_freedom, "p_two_tailed": obj.p_two_tailed}
    if isinstance(obj, OverlapStats):
        return {"kind": "overlap", "entity_type": obj.entity_type,
                "test_token_overlap_pct": obj.test_token_overlap_pct,
                "train_unique_token_pct": obj.train_unique_token_pct,
                "test_tokens": obj.test_tokens, "train_tokens": obj.train_tokens,
                "train_distinct": obj.train_distinct}
    if isinstance(obj, ComparisonTable):
        return {"kind": "comparison", "table": obj.kind, "columns": list(obj.columns),
                "scale": obj.scale, "delta_convention": "baseline - value",
                "rows": [{"label": r.label, "values": list(r.values),
                          "baseline": list(r.baseline), "deltas": list(r.deltas)}
                         for r in obj.rows]}
    if isinstance(obj, Mapping):
        return {"kind": "collection", "order": list(obj),
                "items": {k: _payload(v) for k, v in obj.items()}}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj) -> str:
    doc = {"schema_version": SCHEMA_VERSION, **_payload(obj)}
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _group_from(d: dict, nested: bool) -> GroupScore:
    counts = MatchCounts(d["tp"], d["fp"], d["fn"],
                         {t: MatchCounts(x["tp"], x["fp"], x["fn"])
                          for t, x in d.get("by_type", {}).items()} if nested else {})
    p = None if d["f1"] is None else PRF(d["precision"], d["recall"], d["f1"])
    return GroupScore(counts, p)


def _from_payload(doc: dict):
    kind = doc.get("kind")
    if kind == "score_report":
        by_type = {t: _group_from(d, False) for t, d in sorted(doc["by_type"].items())}
        o = doc["overall"]
        counts = MatchCounts(o["tp"], o["fp"], o["fn"], {t: g.counts for t, g in by_type.items()})
        by_source = {s: _group_from(doc["by_source"][s], True)
                     for s in doc.get("source_order", sorted(doc["by_source"]))}
        by_genre = {s: _group_from(doc["by_genre"][s], True)
                    for s in doc.get("genre_order", sorted(doc["by_genre"]))}
        return ScoreReport(counts, PRF(o["precision"], o["recall"], o["f1"]),
                           by_type, by_source, by_genre)
    if kind == "run_summary":
        return RunSummary(doc["n"], doc["mean"], doc["sample_sd"], doc["min"], doc["max"])
    if kind == "ttest":
        return TTestResult(doc["t_statistic"], doc["degrees_of_freedom"], doc["p_two_tailed"])
    if kind == "overlap":
        return OverlapStats(doc["entity_type"], doc["test_token_overlap_pct"],
                            doc["train_unique_token_pct"], doc["test_tokens"],
                            doc["train_tokens"], doc["train_distinct"])
    if kind == "comparison":
        rows = tuple(ComparisonRow(r["label"], tuple(r["values"]), tuple(r["baseline"]),
                                   tuple(r["deltas"])) for r in doc["rows"])
        return ComparisonTable(doc["table"], tuple(doc["columns"]), rows, doc["scale"])
    if kind == "collection":
        return {k: _from_payload(doc["items"][k]) for k in doc["order"]}
    raise ReportError(f"unknown document kind {kind!r}")


def from_json(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ReportError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ReportError("expected a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ReportError(f"unsupported schema_version {doc.get('schema_version')!r}")
    try:
        return _from_payload(doc)
    except (KeyError, TypeError) as e:
        raise ReportError(f"malformed {doc.get('kind')} document: missing {e}") from None


# ---------------------------------------------------------------- tables

def _systems(obj) -> dict[str, ScoreReport]:
    if isinstance(obj, ScoreReport):
        return {"": obj}
    if isinstance(obj, Mapping) and obj and all(isinstance(v, ScoreReport) for v in obj.values()):
        return dict(obj)
    raise ReportError("expected a ScoreReport or a mapping of system name to ScoreReport")


def _group_rows(reports: dict[str, ScoreReport], labels: Sequence[str], getter) -> tuple[list, list]:
    if len(reports) == 1:
        (r,) = reports.values()
        header = ["Gold", "Precision", "Recall", "F1"]
        rows = []
        for lab in labels:
            g = getter(r, lab)
            p = g.prf if g is not None else None
            rows.append([lab, str(g.gold if g is not None else 0),
                         *(pct(x) for x in (p or (None, None, None)))])
        return header, rows
    header = list(reports)
    rows = [[lab, *(pct(_f1(getter(r, lab))) for r in reports.values())] for lab in labels]
    return header, rows


def table(obj, layout: str, *, k: int | None = None, gm: GenreMap = DEFAULT_GENRE_MAP,
          label: str | None = None) -> tuple[list[str], list[list[str]]]:
    """Header and rows (already formatted) for ``layout``."""
    if layout not in LAYOUTS:
        raise ReportError(f"unknown layout {layout!r}; expected one of {', '.join(LAYOUTS)}")

    if layout == "runs":
        runs = {label or "run": obj} if isinstance(obj, RunSummary) else dict(obj)
        if not all(isinstance(v, RunSummary) for v in runs.values()):
            raise ReportError("runs layout needs RunSummary values")
        return (["Avg. F", "S.Dev", "min", "max"],
                [[name, round2(r.mean), round2(r.sample_sd), round2(r.min), round2(r.max)]
                 for name, r in runs.items()])

    if layout in ("adversarial", "compare"):
        if not isinstance(obj, ComparisonTable):
            raise ReportError(f"{layout} layout needs a ComparisonTable")
        fmt = (lambda v: pct(v)) if obj.scale == 100.0 else (
            lambda v: NA if v is None else round2(v * obj.scale))
        if layout == "compare":
            i = obj.columns.index("f1") if "f1" in obj.columns else len(obj.columns) - 1
            col = obj.columns[i].upper() if obj.columns[i] == "f1" else obj.columns[i]
            return ([f"Baseline {col}", f"Candidate {col}", f"Delta {col} (baseline - candidate)"],
                    [[r.label, fmt(r.baseline[i]), fmt(r.values[i]), fmt(r.deltas[i])]
                     for r in obj.rows])
        base = obj.rows[0].label
        header = []
        for c in obj.columns:
            header += [c, f"{c} Delta ({base} - row)"]
        rows = []
        for r in obj.rows:
            cells = []
            for v, d in zip(r.values, r.deltas):
                cells += [fmt(v), fmt(d)]
            rows.append([r.label, *cells])
        return header, rows

    reports = _systems(obj)
    if layout == "overall":
        if len(reports) == 1:
            (r,) = reports.values()
            c = r.counts
            return (["Precision", "Recall", "F1", "TP", "FP", "FN"],
                    [[label or "overall", *(pct(x) for x in r.prf), str(c.tp), str(c.fp), str(c.fn)]])
        return (["Precision", "Recall", "F1"],
                [[name, *(pct(x) for x in r.prf)] for name, r in reports.items()])

    first = next(iter(reports.values()))
    if layout == "by_type":
        if k is None:
            types = [t for t, g in first.by_type.items() if g.gold]
            return _group_rows(reports, types, lambda r, t: r.by_type.get(t))
        most, least = rank_types(first, k)
        h, top = _group_rows(reports, [x.entity_type for x in most], lambda r, t: r.by_type.get(t))
        _, bottom = _group_rows(reports, [x.entity_type for x in least], lambda r, t: r.by_type.get(t))
        blank = [""] * len(h)
        return h, [["**Most-frequent entity types**", *blank], *top,
                   ["**Least-frequent entity types**", *blank], *bottom]

    attr = layout  # by_source / by_genre
    if not getattr(first, attr):
        raise ReportError(f"report has no {attr} grouping")
    keys = set().union(*(getattr(r, attr).keys() for r in reports.values()))
    preferred = [s for s, _ in gm.items()] if attr == "by_source" else list(gm.genres)
    labels = [x for x in preferred if x in keys] + sorted(keys - set(preferred))
    return _group_rows(reports, labels, lambda r, lab: getattr(r, attr).get(lab))


_FIRST_COLUMN = {"overall": "Setting", "by_type": "Category", "by_source": "Source",
                 "by_genre": "Genre", "adversarial": "Setting", "runs": "Model", "compare": "Group"}


def to_markdown(obj, layout: str = "overall", **kw) -> str:
    header, rows = table(obj, layout, **kw)
    head = [_FIRST_COLUMN[layout], *header]
    lines = ["| " + " | ".join(head) + " |",
             "|" + "|".join("---" if i == 0 else "---:" for i in range(len(head))) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def to_csv(obj, layout: str = "overall", **kw) -> str:
    header, rows = table(obj, layout, **kw)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([_FIRST_COLUMN[layout], *header])
    w.writerows([[c.strip("*") for c in r] for r in rows])
    return buf.getvalue()


def reported_table(rows: Sequence[tuple[str, float, float]]) -> str:
    """Reported vs. obtained scores (already in percent) with their difference."""
    lines = ["| Library | Reported | Obtained | Delta (reported - obtained) |",
             "|---|---:|---:|---:|"]
    for name, rep, obt in rows:
        lines.append(f"| {name} | {round2(rep)} | {round2(obt)} | {round2(delta(rep, obt))} |")
    return "\n".join(lines) + "\n"
