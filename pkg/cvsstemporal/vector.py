#!/usr/bin/env python
"""
CVSS v2 base metric types and the NVD vector-string syntax
"""
import itertools
from dataclasses import dataclass
from enum import Enum

from .errors import MalformedVector, UnknownMetricValue


class AccessVector(Enum):
    """Access Vector (AV)"""
    NETWORK = "N"
    ADJACENT_NETWORK = "A"
    LOCAL = "L"


class AccessComplexity(Enum):
    """Access Complexity (AC)"""
    HIGH = "H"
    MEDIUM = "M"
    LOW = "L"


class Authentication(Enum):
    """Authentication (Au)"""
    NONE = "N"
    SINGLE = "S"
    MULTIPLE = "M"


class CiaImpact(Enum):
    """Confidentiality, Integrity or Availability impact"""
    NONE = "N"
    PARTIAL = "P"
    COMPLETE = "C"


@dataclass(frozen=True)
class CvssVector:
    """The six CVSS v2 base metrics of one vulnerability"""
    av: AccessVector
    ac: AccessComplexity
    au: Authentication
    c: CiaImpact
    i: CiaImpact
    a: CiaImpact

    @property
    def impacts(self):
        return (self.c, self.i, self.a)

    def has_partial(self):
        """True when at least one CIA component is Partial"""
        return CiaImpact.PARTIAL in self.impacts

    def __str__(self):
        return format_vector(self)


# Fixed metric order of a base vector: (key, enum type, dataclass field)
METRICS = (
    ("AV", AccessVector, "av"),
    ("AC", AccessComplexity, "ac"),
    ("Au", Authentication, "au"),
    ("C", CiaImpact, "c"),
    ("I", CiaImpact, "i"),
    ("A", CiaImpact, "a"),
)


def parse_vector(text):
    """Parse a CVSS v2 base vector such as AV:N/AC:L/Au:N/C:C/I:C/A:C.

    One pair of surrounding parentheses is accepted (older NVD records use
    them). Keys and letters are case-sensitive and must appear in the order
    AV, AC, Au, C, I, A.
    """
    if not isinstance(text, str):
        raise MalformedVector(repr(text), 0, "vector must be a string")

    body = text.strip()
    if body.startswith("(") or body.endswith(")"):
        if not (body.startswith("(") and body.endswith(")")):
            raise MalformedVector(body, 0, "unbalanced parentheses")
        body = body[1:-1]

    tokens = body.split("/")
    values = {}
    for position, (key, metric_type, field_name) in enumerate(METRICS, start=1):
        if position > len(tokens):
            raise MalformedVector("", position, f"missing {key}")
        token = tokens[position - 1]
        parts = token.split(":")
        if len(parts) != 2:
            raise MalformedVector(token, position, "expected KEY:VALUE")
        token_key, letter = parts
        if token_key != key:
            raise MalformedVector(token, position, f"expected {key}")
        try:
            values[field_name] = metric_type(letter)
        except ValueError:
            raise UnknownMetricValue(token, position, [m.value for m in metric_type]) from None

    if len(tokens) > len(METRICS):
        position = len(METRICS) + 1
        raise MalformedVector(tokens[position - 1], position, "unexpected trailing metric")

    return CvssVector(**values)


def format_vector(v):
    """Render a vector in canonical form, without parentheses"""
    return "/".join(f"{key}:{getattr(v, field_name).value}" for key, _, field_name in METRICS)


def all_vectors():
    """Yield all 729 base vectors in canonical metric order"""
    for combo in itertools.product(*(list(metric_type) for _, metric_type, _ in METRICS)):
        yield CvssVector(*combo)
