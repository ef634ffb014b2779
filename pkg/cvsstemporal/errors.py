#!/usr/bin/env python
"""
Exceptions raised by cvsstemporal
"""


class CvssTemporalError(Exception):
    """Base exception for cvsstemporal errors"""
    pass


class MalformedVector(CvssTemporalError, ValueError):
    """Raised when a vector string has the wrong delimiter, order or count"""

    def __init__(self, token, position, reason):
        self.token = token
        self.position = position
        self.reason = reason
        super().__init__(f"malformed vector token {token!r} at position {position}: {reason}")


class UnknownMetricValue(CvssTemporalError, ValueError):
    """Raised when a metric letter is outside its allowed set"""

    def __init__(self, token, position, allowed):
        self.token = token
        self.position = position
        self.allowed = allowed
        super().__init__(
            f"unknown metric value {token!r} at position {position}, expected one of {', '.join(allowed)}"
        )


class InvalidLambda(CvssTemporalError, ValueError):
    """Raised when a Poisson rate is not a positive finite number"""
    pass


class InvalidTimeline(CvssTemporalError, ValueError):
    """Raised when a critical point or timeline violates its invariants"""
    pass


class MalformedFeed(CvssTemporalError):
    """Raised when an NVD feed document cannot be read as the JSON 1.1 schema"""
    pass


class MalformedCsv(CvssTemporalError):
    """Raised when a CSV export lacks its required header columns"""
    pass


class UnclassifiableScope(CvssTemporalError):
    """Raised when no CPE of a record yields an application/OS decision"""
    pass


class CorpusIoError(CvssTemporalError):
    """Raised when a corpus file cannot be read or written"""
    pass


class CorpusVersionMismatch(CorpusIoError):
    """Raised when a corpus file carries an unknown version header"""
    pass


class EmptySubset(CvssTemporalError):
    """Raised when an analysis is asked to run over no records"""
    pass


class UnresolvedScope(CvssTemporalError):
    """Raised when records without a resolved scope reach enhanced scoring"""

    def __init__(self, cve_ids):
        self.cve_ids = list(cve_ids)
        super().__init__(f"unresolved scope for {len(self.cve_ids)} record(s): {', '.join(self.cve_ids)}")


class UnknownCve(CvssTemporalError):
    """Raised when a CVE id is not present in the corpus"""
    pass


class PublishedAfterCutoff(CvssTemporalError):
    """Raised when a CVE is scored at a date before its publication"""
    pass


class ConfigError(CvssTemporalError):
    """Raised when a configuration value cannot be parsed"""
    pass
