import pytest

from cvsstemporal.errors import MalformedVector, UnknownMetricValue
from cvsstemporal.vector import (AccessComplexity, AccessVector, Authentication, CiaImpact, CvssVector, all_vectors,
                                 format_vector, parse_vector)


def test_parse_plain_vector():
    v = parse_vector("AV:N/AC:L/Au:N/C:C/I:C/A:C")
    assert v == CvssVector(AccessVector.NETWORK, AccessComplexity.LOW, Authentication.NONE,
                           CiaImpact.COMPLETE, CiaImpact.COMPLETE, CiaImpact.COMPLETE)


def test_parse_parenthesised_vector():
    v = parse_vector("(AV:N/AC:M/Au:N/C:P/I:P/A:P)")
    assert v.ac is AccessComplexity.MEDIUM
    assert v.impacts == (CiaImpact.PARTIAL,) * 3


def test_format_is_canonical():
    v = CvssVector(AccessVector.LOCAL, AccessComplexity.HIGH, Authentication.MULTIPLE,
                   CiaImpact.NONE, CiaImpact.NONE, CiaImpact.NONE)
    assert format_vector(v) == "AV:L/AC:H/Au:M/C:N/I:N/A:N"
    assert str(v) == "AV:L/AC:H/Au:M/C:N/I:N/A:N"


def test_all_vectors_round_trip():
    vectors = list(all_vectors())
    assert len(vectors) == 729
    assert len(set(vectors)) == 729
    for v in vectors:
        assert parse_vector(format_vector(v)) == v


def test_missing_metric_is_malformed():
    with pytest.raises(MalformedVector) as excinfo:
        parse_vector("AV:N/AC:L/C:C/I:C/A:C")
    assert excinfo.value.position == 3
    assert excinfo.value.token == "C:C"


def test_unknown_letter_names_token():
    with pytest.raises(UnknownMetricValue) as excinfo:
        parse_vector("AV:X/AC:L/Au:N/C:C/I:C/A:C")
    assert excinfo.value.token == "AV:X"
    assert excinfo.value.position == 1
    assert "AV:X" in str(excinfo.value)


@pytest.mark.parametrize("text, position", [
    ("AV:N/AC:L/Au:N/C:C/I:C", 6),
    ("AC:L/AV:N/Au:N/C:C/I:C/A:C", 1),
    ("AV:N,AC:L,Au:N,C:C,I:C,A:C", 1),
    ("AV:N/AC:L/Au:N/C:C/I:C/A:C/E:POC", 7),
    ("AV:N/AC:L/Au:N/C:C/I:C/A", 6),
    ("(AV:N/AC:L/Au:N/C:C/I:C/A:C", 0),
])
def test_malformed_vectors(text, position):
    with pytest.raises(MalformedVector) as excinfo:
        parse_vector(text)
    assert excinfo.value.position == position


def test_lowercase_letters_rejected():
    with pytest.raises(UnknownMetricValue):
        parse_vector("AV:n/AC:L/Au:N/C:C/I:C/A:C")


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        parse_vector("garbage")


def test_single_corrupted_token_always_rejected():
    canonical = "AV:N/AC:M/Au:S/C:P/I:N/A:C"
    tokens = canonical.split("/")
    for position in range(len(tokens)):
        key, _ = tokens[position].split(":")
        corrupted = list(tokens)
        corrupted[position] = f"{key}:Z"
        with pytest.raises(UnknownMetricValue) as excinfo:
            parse_vector("/".join(corrupted))
        assert excinfo.value.position == position + 1


def test_has_partial():
    assert parse_vector("AV:N/AC:L/Au:N/C:N/I:P/A:N").has_partial()
    assert not parse_vector("AV:N/AC:L/Au:N/C:C/I:N/A:C").has_partial()
