#!/usr/bin/env python
"""
Corpus statistics: CIA-combination incidence, sub-score histograms,
classic versus enhanced score comparison and temporal forecast exports.
"""
import itertools
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from fractions import Fraction

import pandas as pd

from .errors import EmptySubset, UnresolvedScope
from .ingest import Platform, months_between
from .scoring import EnhancedVector, ScoreBreakdown, VulnScope, round_half_up, score_classic, score_enhanced
from .temporal import DEFAULT_HORIZON_MONTHS, DEFAULT_LAMBDA_FLOOR, CriticalPointKind, ForecastPoint, TemporalParams, \
    Timeline, forecast_series, score_at
from .vector import CiaImpact

logger = logging.getLogger(__name__)

# Row order of incidence tables: Complete, Partial, None for each component
CIA_ORDER = (CiaImpact.COMPLETE, CiaImpact.PARTIAL, CiaImpact.NONE)
EXPLOITED_KINDS = {CriticalPointKind.PROOF_OF_CONCEPT, CriticalPointKind.EXPLOIT}
MOBILE_PLATFORMS = {Platform.ANDROID, Platform.IOS}

REPORT_FILES = {
    "incidence": "cia_incidence.csv",
    "comparison": "comparison.csv",
    "forecast": "forecast.csv",
    "snapshot": "snapshot.csv",
    "summary": "summary.json",
}


class ScoreKind(Enum):
    BASE = "base"
    IMPACT = "impact"
    EXPLOITABILITY = "exploitability"


@dataclass(frozen=True)
class IncidenceRow:
    key: tuple
    count: int
    total: int

    @property
    def share(self):
        return Fraction(self.count, self.total)

    @property
    def label(self):
        return "/".join(ci.value for ci in self.key)

    @property
    def incidence(self):
        return format_share(self.share)


@dataclass(frozen=True)
class CiaIncidenceTable:
    rows: tuple
    total: int
    condensed: bool

    def count(self, *key):
        return next(row.count for row in self.rows if row.key == tuple(key))


@dataclass(frozen=True)
class ScoreHistogram:
    which: ScoreKind
    bins: tuple  # (score, count) pairs at 0.1 granularity, ascending
    total: int

    def grouped(self):
        """Counts bucketed to the nearest whole score"""
        buckets = Counter()
        for score, count in self.bins:
            buckets[math.floor(score + 0.5)] += count
        return tuple(sorted(buckets.items()))


@dataclass(frozen=True)
class ComparisonRow:
    cve_id: str
    scope: VulnScope
    classic: ScoreBreakdown
    enhanced: ScoreBreakdown
    delta: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple
    before: ScoreHistogram
    after: ScoreHistogram

    @property
    def changed(self):
        return sum(1 for row in self.rows if row.delta != 0)


@dataclass(frozen=True)
class ForecastRow:
    cve_id: str
    critical_points: int
    point: ForecastPoint


@dataclass
class TemporalReport:
    """Forecast rows of every record and per-group monthly means"""
    horizon_months: int
    rows: list = field(default_factory=list)
    groups: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SnapshotRow:
    cve_id: str
    age_months: int
    critical_points: int
    point: ForecastPoint


@dataclass(frozen=True)
class Snapshot:
    """Every record scored at its age on one cutoff date"""
    as_of: date
    rows: tuple
    skipped: tuple  # CVE ids published after as_of

    @property
    def base(self):
        return _histogram(ScoreKind.BASE, [row.point.score for row in self.rows])


def format_share(share):
    """Whole percent from 1% up, three decimals below, as the incidence tables print"""
    percent = share * 100
    if percent == 0:
        return "0%"
    if percent < 1:
        return f"{float(percent):.3f}%"
    return f"{math.floor(percent + Fraction(1, 2))}%"


def _require(records):
    if not records:
        raise EmptySubset("no records in the selected subset")


def filter_platform(records, platform):
    """Records of one platform; 'all' is Android and iOS together, never Other"""
    wanted = MOBILE_PLATFORMS if platform == "all" else {Platform(platform)}
    return [r for r in records if r.platform in wanted]


def exploited_subset(records, timelines):
    """Records whose timelines carry a proof of concept or an exploit"""
    exploited = {t.cve_id for t in timelines if any(p.kind in EXPLOITED_KINDS for p in t.points)}
    return [r for r in records if r.cve_id in exploited]


def cia_incidence(records, condensed=False):
    """Count each C/I/A combination, or each C/I pair when condensed"""
    _require(records)
    width = 2 if condensed else 3
    counts = Counter(r.vector.impacts[:width] for r in records)
    rows = tuple(IncidenceRow(key, counts.get(key, 0), len(records))
                 for key in itertools.product(CIA_ORDER, repeat=width))
    return CiaIncidenceTable(rows=rows, total=len(records), condensed=condensed)


def _breakdown(record, enhanced):
    if enhanced:
        return score_enhanced(EnhancedVector(record.vector, record.scope))
    return score_classic(record.vector)


def _histogram(which, breakdowns):
    counts = Counter(getattr(b, which.value) for b in breakdowns)
    return ScoreHistogram(which=which, bins=tuple(sorted(counts.items())), total=len(breakdowns))


def score_histogram(records, which, enhanced=False):
    """Distribution of one score over the records at 0.1 granularity"""
    _require(records)
    which = ScoreKind(which)
    if enhanced:
        _check_scopes(records)
    return _histogram(which, [_breakdown(r, enhanced) for r in records])


def _check_scopes(records):
    unresolved = [r.cve_id for r in records if r.scope is None]
    if unresolved:
        raise UnresolvedScope(unresolved)


def compare_scoring(records):
    """Classic and enhanced breakdowns of every record, with before/after base histograms"""
    _require(records)
    _check_scopes(records)
    rows = []
    for record in records:
        classic = _breakdown(record, enhanced=False)
        enhanced = _breakdown(record, enhanced=True)
        delta = round_half_up(enhanced.base - classic.base)
        rows.append(ComparisonRow(record.cve_id, record.scope, classic, enhanced, delta))
    report = ComparisonReport(
        rows=tuple(rows),
        before=_histogram(ScoreKind.BASE, [row.classic for row in rows]),
        after=_histogram(ScoreKind.BASE, [row.enhanced for row in rows]),
    )
    logger.info("enhanced scoring changed %d of %d base scores", report.changed, len(rows))
    return report


def _group_label(count):
    return "3+" if count >= 3 else str(count)


def temporal_report(records, timelines, horizon=DEFAULT_HORIZON_MONTHS, lambda_floor=DEFAULT_LAMBDA_FLOOR):
    """Forecast every record and summarise by number of critical points.

    Records with a resolved scope are forecast with the enhanced impact;
    records without a timeline decay from their registration date.
    """
    by_cve = {t.cve_id: t for t in timelines}
    params = TemporalParams(lam=lambda_floor, lambda_floor=lambda_floor)
    report = TemporalReport(horizon_months=horizon)

    sums = {}
    for record in records:
        timeline = by_cve.get(record.cve_id) or Timeline(record.cve_id, record.published, ())
        vector = _record_vector(record)
        count = len(timeline.points)
        series = forecast_series(vector, timeline, horizon, params)
        report.rows.extend(ForecastRow(record.cve_id, count, point) for point in series)

        group = sums.setdefault(_group_label(count), {"cves": 0, "exploitability": [0.0] * horizon,
                                                     "base": [0.0] * horizon})
        group["cves"] += 1
        for point in series:
            group["exploitability"][point.month] += point.score.exploitability_raw
            group["base"][point.month] += point.score.base

    for label in sorted(sums):
        group = sums[label]
        n = group["cves"]
        report.groups[label] = {
            "cves": n,
            "mean_exploitability": [round(v / n, 4) for v in group["exploitability"]],
            "mean_base": [round(v / n, 4) for v in group["base"]],
        }
    return report


def _record_vector(record):
    return EnhancedVector(record.vector, record.scope) if record.scope else record.vector


def snapshot(records, timelines, as_of, lambda_floor=DEFAULT_LAMBDA_FLOOR):
    """Score every record at its age on as_of, in whole months since registration.

    Only critical points dated by as_of count. Records published after
    as_of are left out and listed in skipped.
    """
    by_cve = {t.cve_id: t for t in timelines}
    params = TemporalParams(lam=lambda_floor, lambda_floor=lambda_floor)
    rows, skipped = [], []
    for record in records:
        if record.published > as_of:
            skipped.append(record.cve_id)
            continue
        age = months_between(record.published, as_of)
        timeline = by_cve.get(record.cve_id) or Timeline(record.cve_id, record.published, ())
        point = score_at(_record_vector(record), timeline, age, params)
        rows.append(SnapshotRow(record.cve_id, age, len(timeline.known_at(age)), point))
    if skipped:
        logger.warning("%d record(s) published after %s left out of the snapshot", len(skipped), as_of)
    _require(rows)
    return Snapshot(as_of=as_of, rows=tuple(rows), skipped=tuple(skipped))


# -- Report emission ---------------------------------------------------------

def incidence_frame(table):
    """Incidence table as a frame, one row per combination"""
    columns = ["c", "i", "a"][:len(table.rows[0].key)] + ["count", "share", "incidence"]
    data = [[ci.value for ci in row.key] + [row.count, f"{row.count}/{row.total}", row.incidence]
            for row in table.rows]
    return pd.DataFrame(data, columns=columns)


def histogram_frame(histogram):
    """Histogram bins with their whole-score bucket"""
    data = [[f"{score:.1f}", count, math.floor(score + 0.5)] for score, count in histogram.bins]
    return pd.DataFrame(data, columns=["score", "count", "bucket"])


def comparison_frame(report):
    """Classic and enhanced scores side by side, one row per CVE"""
    data = []
    for row in report.rows:
        data.append([row.cve_id, row.scope.value,
                     f"{row.classic.impact:.1f}", f"{row.classic.exploitability:.1f}", f"{row.classic.base:.1f}",
                     f"{row.enhanced.impact:.1f}", f"{row.enhanced.exploitability:.1f}", f"{row.enhanced.base:.1f}",
                     f"{row.delta:.1f}"])
    return pd.DataFrame(data, columns=["cve_id", "scope", "classic_impact", "classic_exploitability", "classic_base",
                                       "enhanced_impact", "enhanced_exploitability", "enhanced_base", "delta"])


def forecast_frame(rows, with_cve=True):
    """Forecast rows as a frame; with_cve adds the CVE id and its critical point count"""
    data = []
    for row in rows:
        point = row.point
        values = [point.month, f"{point.lam:.6f}", f"{point.impact:.1f}", f"{point.exploitability:.1f}",
                  f"{point.score.exploitability_raw:.6f}", f"{point.base:.1f}"]
        data.append([row.cve_id, row.critical_points] + values if with_cve else values)
    columns = ["month", "lambda", "impact", "exploitability", "exploitability_raw", "base"]
    if with_cve:
        columns = ["cve_id", "critical_points"] + columns
    return pd.DataFrame(data, columns=columns)


def snapshot_frame(snap):
    """Snapshot rows as a frame, one row per CVE"""
    data = []
    for row in snap.rows:
        point = row.point
        data.append([row.cve_id, row.age_months, row.critical_points, f"{point.lam:.6f}", f"{point.impact:.1f}",
                     f"{point.exploitability:.1f}", f"{point.score.exploitability_raw:.6f}", f"{point.base:.1f}"])
    return pd.DataFrame(data, columns=["cve_id", "age_months", "critical_points", "lambda", "impact", "exploitability",
                                       "exploitability_raw", "base"])


def write_csv(frame, path_or_buffer):
    """Write a report frame with Unix line endings and no index"""
    frame.to_csv(path_or_buffer, index=False, lineterminator="\n")


@dataclass
class Analysis:
    """Every report of one platform subset"""
    platform: str
    records: list
    incidence: CiaIncidenceTable
    histograms: dict
    comparison: ComparisonReport
    forecast: TemporalReport
    exploited: list
    exploited_histograms: dict = field(default_factory=dict)
    snapshot: Snapshot = None


def analyze(records, timelines, platform="all", horizon=DEFAULT_HORIZON_MONTHS, lambda_floor=DEFAULT_LAMBDA_FLOOR,
            as_of=None):
    """Run every analysis over the records of one platform.

    Histograms are computed for the whole subset and again for its exploited
    part. With as_of, every record is also scored at its age on that date.
    """
    subset = filter_platform(records, platform)
    _require(subset)
    exploited = exploited_subset(subset, timelines)
    return Analysis(
        platform=platform,
        records=subset,
        incidence=cia_incidence(subset),
        histograms={kind: score_histogram(subset, kind) for kind in ScoreKind},
        comparison=compare_scoring(subset),
        forecast=temporal_report(subset, timelines, horizon, lambda_floor),
        exploited=exploited,
        exploited_histograms={kind: score_histogram(exploited, kind) for kind in ScoreKind} if exploited else {},
        snapshot=snapshot(subset, timelines, as_of, lambda_floor) if as_of else None,
    )


def _condensed_summary(records):
    if not records:
        return None
    table = cia_incidence(records, condensed=True)
    return {row.label: {"count": row.count, "incidence": row.incidence} for row in table.rows}


def _grouped(histogram):
    return {str(bucket): count for bucket, count in histogram.grouped()}


def build_summary(analysis):
    """JSON-ready summary of an analysis"""
    records = analysis.records
    summary = {
        "corpus": {
            "platform": analysis.platform,
            "records": len(records),
            "by_platform": dict(sorted(Counter(r.platform.value for r in records).items())),
            "by_scope": dict(sorted(Counter(r.scope.value for r in records).items())),
            "exploited": len(analysis.exploited),
        },
        "condensed_incidence": {
            "nvd": _condensed_summary(records),
            "exploited": _condensed_summary(analysis.exploited),
        },
        "histograms": {kind.value: _grouped(histogram) for kind, histogram in analysis.histograms.items()},
        "exploited_histograms": {
            kind.value: _grouped(histogram) for kind, histogram in analysis.exploited_histograms.items()
        } or None,
        "comparison": {
            "records": len(analysis.comparison.rows),
            "changed": analysis.comparison.changed,
            "after": _grouped(analysis.comparison.after),
        },
        "forecast": {
            "horizon_months": analysis.forecast.horizon_months,
            "groups": analysis.forecast.groups,
        },
    }
    if analysis.snapshot is not None:
        summary["snapshot"] = {
            "as_of": analysis.snapshot.as_of.isoformat(),
            "records": len(analysis.snapshot.rows),
            "skipped": len(analysis.snapshot.skipped),
            "base": _grouped(analysis.snapshot.base),
        }
    return summary


def write_reports(analysis, out_dir):
    """Write the CSV tables and the JSON summary; returns the written paths"""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def target(name):
        path = os.path.join(out_dir, name)
        written.append(path)
        return path

    write_csv(incidence_frame(analysis.incidence), target(REPORT_FILES["incidence"]))
    for kind, histogram in analysis.histograms.items():
        write_csv(histogram_frame(histogram), target(f"hist_{kind.value}.csv"))
    write_csv(comparison_frame(analysis.comparison), target(REPORT_FILES["comparison"]))
    write_csv(forecast_frame(analysis.forecast.rows), target(REPORT_FILES["forecast"]))
    if analysis.snapshot is not None:
        write_csv(snapshot_frame(analysis.snapshot), target(REPORT_FILES["snapshot"]))
    with open(target(REPORT_FILES["summary"]), "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(build_summary(analysis), indent=2, sort_keys=True) + "\n")
    logger.info("wrote %d report files to %s", len(written), out_dir)
    return written
