"""Shared builders for the cvsstemporal test suite."""
import os
from datetime import date

import pytest

from cvsstemporal.ingest import Platform, VulnRecord
from cvsstemporal.scoring import VulnScope, score_classic
from cvsstemporal.temporal import CriticalPoint, CriticalPointKind, Timeline
from cvsstemporal.vector import parse_vector

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

# C/I/A combination counts per platform, keyed "CIA"
ANDROID_COUNTS = {
    "CCC": 442, "CCN": 1, "CNC": 3, "CNN": 9, "PPP": 62, "PPN": 58, "PNC": 4, "PNP": 1, "PNN": 134,
    "NCC": 6, "NPP": 17, "NPN": 54, "NNC": 7, "NNP": 28,
}
IOS_COUNTS = {
    "CCC": 187, "CNN": 3, "PPP": 293, "PPN": 33, "PNC": 1, "PNP": 1, "PNN": 173, "NCC": 3, "NCN": 2,
    "NPP": 4, "NPN": 102, "NNC": 18, "NNP": 25,
}


def data_path(*parts):
    return os.path.join(DATA_DIR, *parts)


def make_record(cve_id, vector="AV:N/AC:M/Au:N/C:P/I:P/A:P", platform=Platform.ANDROID,
                scope=VulnScope.OPERATING_SYSTEM, published=date(2016, 1, 15), nvd_base_score=None):
    v = parse_vector(vector)
    if nvd_base_score is None:
        nvd_base_score = score_classic(v).base
    return VulnRecord(cve_id, platform, published, v, nvd_base_score, scope, ())


def make_timeline(cve_id="CVE-2016-0001", months=(), kind=CriticalPointKind.EXPLOIT, registered=date(2016, 1, 15)):
    return Timeline(cve_id, registered, tuple(CriticalPoint(kind, m) for m in months))


def records_from_counts(counts, platform, prefix):
    """One record per unit of each C/I/A count, with a fixed network vector"""
    records = []
    n = 0
    for cia, count in counts.items():
        c, i, a = cia
        for _ in range(count):
            n += 1
            records.append(make_record(f"CVE-{prefix}-{n:05d}", f"AV:N/AC:L/Au:N/C:{c}/I:{i}/A:{a}",
                                       platform=platform))
    return records


@pytest.fixture
def android_corpus():
    return records_from_counts(ANDROID_COUNTS, Platform.ANDROID, "2015")


@pytest.fixture
def ios_corpus():
    return records_from_counts(IOS_COUNTS, Platform.IOS, "2014")
