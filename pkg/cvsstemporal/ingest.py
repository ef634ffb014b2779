#!/usr/bin/env python
"""
Offline ingestion of NVD JSON 1.1 feeds, Exploit-DB CSV exports and patch
event lists into normalized records, critical-point timelines and the
line-oriented corpus file.
"""
import gzip
import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

import pandas as pd
from dateutil import parser as dateparser
from dateutil.relativedelta import relativedelta

from .errors import (CorpusIoError, CorpusVersionMismatch, CvssTemporalError, MalformedCsv, MalformedFeed,
                     UnclassifiableScope)
from .scoring import VulnScope
from .temporal import CriticalPoint, CriticalPointKind, Timeline
from .vector import CvssVector, format_vector, parse_vector

logger = logging.getLogger(__name__)

CVE_PATTERN = re.compile(r"CVE-\d{4}-\d{4,}")
CORPUS_HEADER = "cvss-temporal-corpus v1"
DROPPED_REASONS = ("skipped", "no CVSS v2", "duplicate CVE")

EDB_REQUIRED_COLUMNS = ("id", "date", "platform", "type")
PATCH_REQUIRED_COLUMNS = ("cve_id", "date", "kind")
OVERRIDE_REQUIRED_COLUMNS = ("cve_id", "scope")

# (vendor, product) pairs and target_sw values that mark a mobile platform
ANDROID_PRODUCTS = {("google", "android")}
IOS_PRODUCTS = {("apple", "iphone_os")}
ANDROID_TARGETS = {"android"}
IOS_TARGETS = {"iphone_os"}


class Platform(Enum):
    ANDROID = "android"
    IOS = "ios"
    OTHER = "other"


@dataclass(frozen=True)
class VulnRecord:
    """One normalized NVD entry"""
    cve_id: str
    platform: Platform
    published: date
    vector: CvssVector
    nvd_base_score: float
    scope: Optional[VulnScope]
    cpe_uris: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class ExploitRecord:
    """One Exploit-DB entry, fanned out per linked CVE"""
    edb_id: str
    cve_id: Optional[str]
    date: date
    kind_hint: CriticalPointKind

    @property
    def linked(self):
        return self.cve_id is not None


@dataclass(frozen=True)
class PatchRecord:
    cve_id: str
    date: date
    kind: CriticalPointKind


@dataclass(frozen=True)
class Diagnostic:
    """A per-item ingestion problem that did not abort the file"""
    source: str
    subject: str
    reason: str

    def __str__(self):
        return f"{self.source}: {self.subject}: {self.reason}"

    @property
    def dropped(self):
        """True when the item was left out of the output"""
        return self.reason.startswith(DROPPED_REASONS)


def _diagnose(diagnostics, source, subject, reason):
    diagnostic = Diagnostic(str(source), str(subject), reason)
    logger.warning("%s", diagnostic)
    diagnostics.append(diagnostic)


# -- CPE handling ------------------------------------------------------------

def _cpe_fields(uri):
    """Split a CPE 2.3 formatted string; None when it is not one"""
    if not isinstance(uri, str):
        return None
    fields = re.split(r"(?<!\\):", uri)
    if len(fields) < 5 or fields[0] != "cpe" or fields[1] != "2.3" or fields[2] not in ("a", "o", "h"):
        return None
    return fields


def classify_scope(cpe_uris):
    """OperatingSystem if any CPE names an OS part, else Application"""
    parts = [fields[2] for fields in map(_cpe_fields, cpe_uris) if fields is not None]
    if not parts:
        raise UnclassifiableScope(f"no well-formed CPE among {len(cpe_uris)} entries")
    if "o" in parts:
        return VulnScope.OPERATING_SYSTEM
    return VulnScope.APPLICATION


def _platforms(cpe_uris):
    found = set()
    for fields in filter(None, map(_cpe_fields, cpe_uris)):
        product = (fields[3], fields[4])
        target_sw = fields[10] if len(fields) > 10 else ""
        if product in ANDROID_PRODUCTS or target_sw in ANDROID_TARGETS:
            found.add(Platform.ANDROID)
        if product in IOS_PRODUCTS or target_sw in IOS_TARGETS:
            found.add(Platform.IOS)
    return found


def classify_platform(cpe_uris):
    """Android, iOS or Other from the vendor/product or target software of each CPE"""
    found = _platforms(cpe_uris)
    if len(found) == 1:
        return found.pop()
    return Platform.OTHER


# -- NVD feeds ---------------------------------------------------------------

def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _walk_cpe_matches(nodes):
    for node in nodes or []:
        for match in node.get("cpe_match", []) or []:
            yield match
        yield from _walk_cpe_matches(node.get("children"))


def _item_cpes(item):
    """All CPE URIs of an item in document order, plus the vulnerable ones"""
    all_uris, vulnerable = [], []
    nodes = (item.get("configurations") or {}).get("nodes", [])
    for match in _walk_cpe_matches(nodes):
        uri = match.get("cpe23Uri")
        if not uri:
            continue
        if uri not in all_uris:
            all_uris.append(uri)
        if match.get("vulnerable", True) and uri not in vulnerable:
            vulnerable.append(uri)
    return all_uris, vulnerable


def _record_from_item(item, scope_overrides):
    cve_id = item["cve"]["CVE_data_meta"]["ID"]
    if not CVE_PATTERN.fullmatch(cve_id or ""):
        raise ValueError(f"not a CVE id: {cve_id!r}")

    metrics = (item.get("impact") or {}).get("baseMetricV2")
    if not metrics or "cvssV2" not in metrics:
        return cve_id, None, "no CVSS v2 metrics"
    cvss = metrics["cvssV2"]
    vector = parse_vector(cvss["vectorString"])
    published = dateparser.isoparse(item["publishedDate"]).date()

    all_uris, vulnerable = _item_cpes(item)
    notes = []
    platform = classify_platform(all_uris)
    if len(_platforms(all_uris)) > 1:
        notes.append("ambiguous platform")

    scope = scope_overrides.get(cve_id)
    if scope is None:
        try:
            scope = classify_scope(vulnerable or all_uris)
        except UnclassifiableScope:
            notes.append("unclassifiable scope, supply an override")

    record = VulnRecord(
        cve_id=cve_id,
        platform=platform,
        published=published,
        vector=vector,
        nvd_base_score=float(cvss["baseScore"]),
        scope=scope,
        cpe_uris=tuple(all_uris),
    )
    return cve_id, record, "; ".join(notes)


def _cve_id_of(item):
    try:
        return item["cve"]["CVE_data_meta"]["ID"]
    except (KeyError, TypeError):
        return None


def parse_nvd_feed(path, scope_overrides=None):
    """Read one NVD JSON 1.1 feed file (plain or gzip).

    Returns (records, diagnostics). Items without CVSS v2 data or with
    unusable fields are skipped with a diagnostic; records kept with an
    unresolved scope or an ambiguous platform also get one.
    """
    scope_overrides = scope_overrides or {}
    source = os.path.basename(str(path))
    try:
        with _open_text(path) as f:
            document = json.load(f)
    except (ValueError, EOFError, gzip.BadGzipFile) as e:
        raise MalformedFeed(f"{path}: not a JSON feed: {e}") from e

    if not isinstance(document, dict) or not isinstance(document.get("CVE_Items"), list):
        raise MalformedFeed(f"{path}: missing top-level CVE_Items array")

    records, diagnostics = [], []
    for index, item in enumerate(document["CVE_Items"]):
        subject = _cve_id_of(item) or f"item {index}"
        try:
            subject, record, note = _record_from_item(item, scope_overrides)
        except (KeyError, TypeError, ValueError, CvssTemporalError) as e:
            _diagnose(diagnostics, source, subject, f"skipped: {e}")
            continue
        if record is None:
            _diagnose(diagnostics, source, subject, note)
            continue
        if note:
            _diagnose(diagnostics, source, subject, note)
        records.append(record)

    logger.info("%s: %d records, %d diagnostics", source, len(records), len(diagnostics))
    return records, diagnostics


def merge_records(record_lists):
    """Concatenate records from several feeds, keeping the first of each CVE"""
    merged, seen, diagnostics = [], set(), []
    for records in record_lists:
        for record in records:
            if record.cve_id in seen:
                _diagnose(diagnostics, "merge", record.cve_id, "duplicate CVE, first occurrence kept")
                continue
            seen.add(record.cve_id)
            merged.append(record)
    return merged, diagnostics


# -- CSV exports -------------------------------------------------------------

def _read_csv(path, required):
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise MalformedCsv(f"{path}: {e}") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MalformedCsv(f"{path}: missing required column(s) {', '.join(missing)}")
    dates = pd.to_datetime(frame["date"].str.strip(), format="%Y-%m-%d", errors="coerce")
    return frame, dates


def parse_edb_csv(path):
    """Read an Exploit-DB export; returns (exploit records, diagnostics)"""
    source = os.path.basename(str(path))
    frame, dates = _read_csv(path, EDB_REQUIRED_COLUMNS)

    records, diagnostics = [], []
    for (_, row), when in zip(frame.iterrows(), dates):
        edb_id = row["id"].strip()
        if pd.isna(when):
            _diagnose(diagnostics, source, f"EDB-{edb_id}", f"unparseable date {row['date']!r}")
            continue
        description = row.get("description", "") or ""
        if row["type"].strip().lower() == "dos" or "poc" in description.lower():
            kind = CriticalPointKind.PROOF_OF_CONCEPT
        else:
            kind = CriticalPointKind.EXPLOIT

        cve_ids = list(dict.fromkeys(CVE_PATTERN.findall(row.get("codes", "") or "")))
        if not cve_ids:
            _diagnose(diagnostics, source, f"EDB-{edb_id}", "unlinked: no CVE in codes")
            records.append(ExploitRecord(edb_id, None, when.date(), kind))
            continue
        for cve_id in cve_ids:
            records.append(ExploitRecord(edb_id, cve_id, when.date(), kind))
    return records, diagnostics


def parse_patch_csv(path):
    """Read patch/update events (cve_id,date,kind); returns (patch records, diagnostics)"""
    source = os.path.basename(str(path))
    frame, dates = _read_csv(path, PATCH_REQUIRED_COLUMNS)

    kinds = {"patch": CriticalPointKind.PATCH, "update": CriticalPointKind.UPDATE}
    records, diagnostics = [], []
    for (_, row), when in zip(frame.iterrows(), dates):
        cve_id = row["cve_id"].strip()
        kind = kinds.get(row["kind"].strip().lower())
        if not CVE_PATTERN.fullmatch(cve_id):
            _diagnose(diagnostics, source, cve_id or "(blank)", "not a CVE id")
        elif kind is None:
            _diagnose(diagnostics, source, cve_id, f"unknown kind {row['kind']!r}")
        elif pd.isna(when):
            _diagnose(diagnostics, source, cve_id, f"unparseable date {row['date']!r}")
        else:
            records.append(PatchRecord(cve_id, when.date(), kind))
    return records, diagnostics


def load_scope_overrides(path):
    """Manual scope decisions: CSV cve_id,scope with scope app|os"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise MalformedCsv(f"{path}: {e}") from e
    missing = [c for c in OVERRIDE_REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedCsv(f"{path}: missing required column(s) {', '.join(missing)}")
    try:
        return {row["cve_id"].strip(): VulnScope(row["scope"].strip().lower()) for _, row in frame.iterrows()}
    except ValueError as e:
        raise MalformedCsv(f"{path}: {e}") from e


# -- Timelines ---------------------------------------------------------------

def months_between(start, end):
    """Whole calendar months from start to end, floored (45 days is one month)"""
    delta = relativedelta(end, start)
    return delta.years * 12 + delta.months


def build_timelines(vulns, exploits, patches):
    """Join exploit and patch events onto each CVE as critical points.

    Every linked exploit row is its own point; patch events keep the
    earliest date per (CVE, kind). Events dated before publication are
    clamped to month 0.
    """
    published = {v.cve_id: v.published for v in vulns}
    events = {cve_id: [] for cve_id in published}

    seen_exploits = set()
    for exploit in exploits:
        if not exploit.linked or exploit.cve_id not in events:
            continue
        key = (exploit.edb_id, exploit.cve_id)
        if key in seen_exploits:
            continue
        seen_exploits.add(key)
        events[exploit.cve_id].append((exploit.kind_hint, exploit.date, f"EDB-{exploit.edb_id}"))

    earliest_patch = {}
    for patch in patches:
        if patch.cve_id not in events:
            logger.debug("patch for unknown %s ignored", patch.cve_id)
            continue
        key = (patch.cve_id, patch.kind)
        if key not in earliest_patch or patch.date < earliest_patch[key].date:
            earliest_patch[key] = patch
    for (cve_id, kind), patch in sorted(earliest_patch.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        if patch.date < published[cve_id]:
            logger.warning("%s: %s dated %s precedes publication %s", cve_id, kind.value, patch.date,
                           published[cve_id])
        events[cve_id].append((kind, patch.date, kind.value))

    timelines = []
    for vuln in vulns:
        points = []
        for kind, when, label in events[vuln.cve_id]:
            month = months_between(vuln.published, when)
            if month < 0:
                logger.warning("%s: %s dated %s before publication, clamped to month 0", vuln.cve_id, label, when)
                month = 0
            points.append(CriticalPoint(kind, month))
        timelines.append(Timeline(vuln.cve_id, vuln.published, tuple(points)))
    return timelines


# -- Corpus file -------------------------------------------------------------

def _record_line(r):
    scope = r.scope.value if r.scope else "-"
    return "|".join(["R", r.cve_id, r.platform.value, r.published.isoformat(), format_vector(r.vector),
                     f"{r.nvd_base_score:.1f}", scope, ";".join(r.cpe_uris)])


def _timeline_line(t):
    points = ";".join(f"{p.kind.value}:{p.month}" for p in t.points)
    return "|".join(["T", t.cve_id, t.registered.isoformat(), points])


def save_corpus(records, timelines, path):
    """Write records then timelines, one per line, under the version header"""
    lines = [CORPUS_HEADER]
    lines.extend(_record_line(r) for r in records)
    lines.extend(_timeline_line(t) for t in timelines)
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        raise CorpusIoError(f"cannot write corpus {path}: {e}") from e
    logger.info("saved %d records and %d timelines to %s", len(records), len(timelines), path)


def _parse_record(fields):
    _, cve_id, platform, published, vector, base, scope, cpes = fields
    return VulnRecord(
        cve_id=cve_id,
        platform=Platform(platform),
        published=date.fromisoformat(published),
        vector=parse_vector(vector),
        nvd_base_score=float(base),
        scope=None if scope == "-" else VulnScope(scope),
        cpe_uris=tuple(cpes.split(";")) if cpes else (),
    )


def _parse_timeline(fields):
    _, cve_id, registered, points = fields
    parsed = []
    for token in filter(None, points.split(";")):
        kind, month = token.split(":")
        parsed.append(CriticalPoint(CriticalPointKind(kind), int(month)))
    return Timeline(cve_id, date.fromisoformat(registered), tuple(parsed))


def load_corpus(path):
    """Read a corpus file; returns (records, timelines)"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusIoError(f"cannot read corpus {path}: {e}") from e

    if not lines or lines[0] != CORPUS_HEADER:
        found = lines[0] if lines else "(empty file)"
        raise CorpusVersionMismatch(f"{path}: expected header {CORPUS_HEADER!r}, found {found!r}")

    records, timelines = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("|")
        try:
            if fields[0] == "R" and len(fields) == 8:
                records.append(_parse_record(fields))
            elif fields[0] == "T" and len(fields) == 4:
                timelines.append(_parse_timeline(fields))
            else:
                raise ValueError("unknown line type or field count")
        except (ValueError, CvssTemporalError) as e:
            raise CorpusIoError(f"{path}:{lineno}: {e}") from e
    return records, timelines
