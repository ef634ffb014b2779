#!/usr/bin/env python
"""
Time-dependent exploitability: critical-point timelines, the Poisson
aggregate S over those points and month-by-month score forecasts.

Each critical point i contributes X_i = e^-lambda * lambda^k_i / k_i! where
k_i is the number of whole months elapsed since the point. S is the sum of
the contributions of every point known at the evaluated month. Lambda is the
mean number of critical points per month.
"""
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import date
from enum import Enum

from scipy.special import gammaln

from .errors import InvalidLambda, InvalidTimeline
from .scoring import EnhancedVector, ScoreBreakdown, exploitability_subscore, rescore

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_FLOOR = 1 / 24
DEFAULT_HORIZON_MONTHS = 24
KAPPA_CAP = 500
# Smallest weight reported once lambda^k / k! underflows
MIN_DECAY_WEIGHT = sys.float_info.min


class CriticalPointKind(Enum):
    """Lifecycle events of a vulnerability"""
    DISCOVERY = "discovery"
    PROOF_OF_CONCEPT = "poc"
    EXPLOIT = "exploit"
    PATCH = "patch"
    UPDATE = "update"


@dataclass(frozen=True)
class CriticalPoint:
    """A lifecycle event, months after registration"""
    kind: CriticalPointKind
    month: int

    def __post_init__(self):
        if not isinstance(self.month, int) or self.month < 0:
            raise InvalidTimeline(f"critical point month must be a non-negative integer, got {self.month!r}")


@dataclass(frozen=True)
class Timeline:
    """Critical points of one CVE, months counted from its registration date"""
    cve_id: str
    registered: date
    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.month)))

    def known_at(self, month):
        """Points that have occurred by the given month"""
        return [p for p in self.points if p.month <= month]


@dataclass(frozen=True)
class TemporalParams:
    """Poisson rate and the floor it may not go below"""
    lam: float
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR

    def __post_init__(self):
        _check_lambda(self.lambda_floor)
        _check_lambda(self.lam)
        if self.lam < self.lambda_floor:
            raise InvalidLambda(f"lambda {self.lam} is below the floor {self.lambda_floor}")


@dataclass(frozen=True)
class ForecastPoint:
    """Scores of one forecast month"""
    month: int
    lam: float
    score: ScoreBreakdown

    @property
    def impact(self):
        return self.score.impact

    @property
    def exploitability(self):
        return self.score.exploitability

    @property
    def base(self):
        return self.score.base


def _check_lambda(lam):
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not math.isfinite(lam) or lam <= 0:
        raise InvalidLambda(f"lambda must be a positive finite number, got {lam!r}")


def poisson_pmf(lam, kappa):
    """P(k = kappa) for a Poisson variable with mean lam, evaluated in log-space"""
    _check_lambda(lam)
    if kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    if kappa > KAPPA_CAP:
        return 0.0
    return math.exp(-lam + kappa * math.log(lam) - float(gammaln(kappa + 1)))


def estimate_lambda(t, as_of_month, floor=DEFAULT_LAMBDA_FLOOR):
    """Mean critical points per month over the months observed so far"""
    n = len(t.known_at(as_of_month))
    lam = max(floor, n / max(1, as_of_month))
    return TemporalParams(lam=lam, lambda_floor=floor)


def _elapsed(t, as_of_month):
    """Whole months since each contributing point, or since registration if none"""
    known = t.known_at(as_of_month)
    if not known:
        return [as_of_month]
    return [as_of_month - p.month for p in known]


def aggregate_s(t, as_of_month, params):
    """Sum of the Poisson terms of every point known at as_of_month"""
    return math.fsum(poisson_pmf(params.lam, kappa) for kappa in _elapsed(t, as_of_month))


def decay_weight(t, as_of_month, params):
    """S normalised by its value had every contributing point just occurred.

    Each term is capped at 1 so a rate above one event per month cannot push
    the weight past the instant value. Far past every point the terms underflow
    to zero; the weight is then held at MIN_DECAY_WEIGHT so it stays in (0, 1].
    """
    at_zero = poisson_pmf(params.lam, 0)
    ratios = [min(1.0, poisson_pmf(params.lam, kappa) / at_zero) for kappa in _elapsed(t, as_of_month)]
    return max(MIN_DECAY_WEIGHT, math.fsum(ratios) / len(ratios))


def temporal_exploitability(base_exploitability_raw, t, as_of_month, params):
    """Exploitability sub-score scaled by the decay weight at as_of_month"""
    return base_exploitability_raw * decay_weight(t, as_of_month, params)


def score_at(vector, t, month, params=None, fixed_lambda=False):
    """Scores of a vector at one month after registration.

    Lambda is estimated from the points known by that month unless
    fixed_lambda is set, in which case params.lam is used.
    """
    if month < 0:
        raise InvalidTimeline(f"month must be non-negative, got {month}")
    if params is None:
        if fixed_lambda:
            raise InvalidLambda("fixed_lambda needs explicit params")
        params = TemporalParams(lam=DEFAULT_LAMBDA_FLOOR)
    base = vector.base if isinstance(vector, EnhancedVector) else vector
    exploitability_raw, _ = exploitability_subscore(base.av, base.ac, base.au)
    month_params = params if fixed_lambda else estimate_lambda(t, month, params.lambda_floor)
    decayed = temporal_exploitability(exploitability_raw, t, month, month_params)
    return ForecastPoint(month=month, lam=month_params.lam, score=rescore(vector, decayed))


def forecast_series(vector, t, horizon_months=DEFAULT_HORIZON_MONTHS, params=None, fixed_lambda=False):
    """Month-by-month scores for months 0 .. horizon_months-1.

    Lambda is re-estimated every month from the points known by then, using
    params.lambda_floor; with fixed_lambda the given params.lam is used as is.
    """
    if horizon_months < 1:
        raise ValueError(f"horizon must be at least one month, got {horizon_months}")
    if params is None:
        if fixed_lambda:
            raise InvalidLambda("fixed_lambda needs explicit params")
        params = TemporalParams(lam=DEFAULT_LAMBDA_FLOOR)

    series = [score_at(vector, t, month, params, fixed_lambda) for month in range(horizon_months)]
    logger.debug("forecast for %s over %d months", t.cve_id, horizon_months)
    return series
