#!/usr/bin/env python
"""
Classic CVSS v2 base scoring and the scope-aware enhanced impact weights
"""
import decimal
from dataclasses import dataclass
from enum import Enum

from .vector import AccessComplexity, AccessVector, Authentication, CiaImpact, CvssVector

ACCESS_VECTOR_WEIGHTS = {
    AccessVector.LOCAL: 0.395,
    AccessVector.ADJACENT_NETWORK: 0.646,
    AccessVector.NETWORK: 1.0,
}

ACCESS_COMPLEXITY_WEIGHTS = {
    AccessComplexity.HIGH: 0.35,
    AccessComplexity.MEDIUM: 0.61,
    AccessComplexity.LOW: 0.71,
}

AUTHENTICATION_WEIGHTS = {
    Authentication.MULTIPLE: 0.45,
    Authentication.SINGLE: 0.56,
    Authentication.NONE: 0.704,
}

IMPACT_WEIGHTS = {
    CiaImpact.NONE: 0.0,
    CiaImpact.PARTIAL: 0.275,
    CiaImpact.COMPLETE: 0.660,
}

IMPACT_SCALE = 10.41
IMPACT_CAP = 10.0
EXPLOITABILITY_SCALE = 20.0
F_IMPACT = 1.176

_ROUNDING = decimal.Context(rounding=decimal.ROUND_HALF_UP)


class VulnScope(Enum):
    """Whether a vulnerability lives in an application or the operating system"""
    APPLICATION = "app"
    OPERATING_SYSTEM = "os"


# Partial weight split by scope; None and Complete keep the classic weights
PARTIAL_SCOPE_WEIGHTS = {
    VulnScope.APPLICATION: 0.461,
    VulnScope.OPERATING_SYSTEM: 0.515,
}


@dataclass(frozen=True)
class EnhancedVector:
    """A base vector whose Partial components resolve to a scope"""
    base: CvssVector
    scope: VulnScope


@dataclass(frozen=True)
class ScoreBreakdown:
    """Rounded sub-scores and base score, with the unrounded values they came from"""
    impact: float
    exploitability: float
    base: float
    impact_raw: float
    exploitability_raw: float
    base_raw: float

    def line(self):
        """One-line form printed by the score command"""
        return f"impact={self.impact:.1f} exploitability={self.exploitability:.1f} base={self.base:.1f}"


def round_half_up(x):
    """Round to one decimal, halves away from zero, as NVD publishes scores"""
    return float(decimal.Decimal(str(x)).quantize(decimal.Decimal("0.1"), context=_ROUNDING))


def impact_weight(ci):
    """Classic weight of one C/I/A value"""
    return IMPACT_WEIGHTS[ci]


def enhanced_impact_weight(ci, scope):
    """Scope-dependent weight: Partial splits by scope, None and Complete stay classic"""
    if ci is CiaImpact.PARTIAL:
        return PARTIAL_SCOPE_WEIGHTS[scope]
    return IMPACT_WEIGHTS[ci]


def _impact_uncapped(c, i, a):
    return IMPACT_SCALE * (1 - (1 - c) * (1 - i) * (1 - a))


def impact_subscore(c, i, a):
    """Impact sub-score from three CIA weights; returns (raw, rounded)"""
    raw = min(IMPACT_CAP, _impact_uncapped(c, i, a))
    return raw, round_half_up(raw)


def exploitability_subscore(av, ac, au):
    """Exploitability sub-score from the three access metrics; returns (raw, rounded)"""
    raw = (EXPLOITABILITY_SCALE
           * ACCESS_COMPLEXITY_WEIGHTS[ac]
           * AUTHENTICATION_WEIGHTS[au]
           * ACCESS_VECTOR_WEIGHTS[av])
    return raw, round_half_up(raw)


def _base_raw(impact_raw, exploitability_raw):
    f_impact = 0.0 if impact_raw == 0 else F_IMPACT
    value = (0.6 * impact_raw + 0.4 * exploitability_raw - 1.5) * f_impact
    return min(10.0, max(0.0, value))


def base_score(impact_raw, exploitability_raw):
    """Combine unrounded sub-scores into the published one-decimal base score.

    impact_raw may be the uncapped impact (up to 10.0008); NVD scores are
    computed from it.
    """
    return round_half_up(_base_raw(impact_raw, exploitability_raw))


def _weights(vector):
    if isinstance(vector, EnhancedVector):
        return tuple(enhanced_impact_weight(ci, vector.scope) for ci in vector.base.impacts)
    return tuple(impact_weight(ci) for ci in vector.impacts)


def _base_vector(vector):
    return vector.base if isinstance(vector, EnhancedVector) else vector


def rescore(vector, exploitability_raw):
    """Score a classic or enhanced vector against a given exploitability sub-score"""
    uncapped = _impact_uncapped(*_weights(vector))
    impact_raw = min(IMPACT_CAP, uncapped)
    base_raw = _base_raw(uncapped, exploitability_raw)
    return ScoreBreakdown(
        impact=round_half_up(impact_raw),
        exploitability=round_half_up(exploitability_raw),
        base=round_half_up(base_raw),
        impact_raw=impact_raw,
        exploitability_raw=exploitability_raw,
        base_raw=base_raw,
    )


def score(vector):
    """Score a CvssVector classically or an EnhancedVector with scope weights"""
    base = _base_vector(vector)
    exploitability_raw, _ = exploitability_subscore(base.av, base.ac, base.au)
    return rescore(vector, exploitability_raw)


def score_classic(v):
    """Classic score of a vector, ignoring any scope"""
    return score(_base_vector(v))


def score_enhanced(ev):
    """Score of an EnhancedVector with the scope-split Partial weights"""
    return score(ev)


def severity(base):
    """NVD CVSS v2 qualitative band for a base score"""
    if base < 4.0:
        return "LOW"
    elif base < 7.0:
        return "MEDIUM"
    return "HIGH"
