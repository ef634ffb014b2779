"""Ingest the bundled NVD/EDB/patch fixture, analyze it and compare every
report with its golden file byte for byte."""
import json
import os

import pytest

from cvsstemporal import cli

from conftest import data_path

REPORTS = ["cia_incidence.csv", "hist_base.csv", "hist_impact.csv", "hist_exploitability.csv", "comparison.csv",
           "forecast.csv", "summary.json"]


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


@pytest.fixture
def corpus(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    path = str(tmp_path / "corpus.txt")
    code = cli.main(["ingest",
                     "--nvd", data_path("e2e", "nvd.json"),
                     "--edb", data_path("e2e", "edb.csv"),
                     "--patches", data_path("e2e", "patches.csv"),
                     "--out", path])
    assert code == 0
    assert capsys.readouterr().out == "kept=5 skipped=1 unlinked=1\n"
    return path


def test_ingest_matches_golden_corpus(corpus):
    assert read_bytes(corpus) == read_bytes(data_path("e2e", "golden", "corpus.txt"))


def test_analyze_matches_golden_reports(corpus, tmp_path, capsys):
    out = tmp_path / "reports"
    assert cli.main(["analyze", "--corpus", corpus, "--platform", "all", "--out", str(out), "--horizon", "3"]) == 0
    written = capsys.readouterr().out.splitlines()
    assert sorted(os.path.basename(p) for p in written) == sorted(REPORTS)
    for name in REPORTS:
        assert read_bytes(out / name) == read_bytes(data_path("e2e", "golden", name)), name


def test_analyze_twice_is_byte_identical(corpus, tmp_path):
    for run in ("first", "second"):
        assert cli.main(["analyze", "--corpus", corpus, "--out", str(tmp_path / run), "--horizon", "6"]) == 0
    for name in REPORTS:
        assert read_bytes(tmp_path / "first" / name) == read_bytes(tmp_path / "second" / name), name


def test_analyze_single_platform(corpus, tmp_path):
    out = tmp_path / "android"
    assert cli.main(["analyze", "--corpus", corpus, "--platform", "android", "--out", str(out)]) == 0
    lines = (out / "comparison.csv").read_text(encoding="utf-8").splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["CVE-2015-6602", "CVE-2015-6603", "CVE-2016-0801"]


def test_forecast_one_cve(corpus, capsys):
    assert cli.main(["forecast", "--corpus", corpus, "--cve", "CVE-2016-0801", "--horizon", "3"]) == 0
    assert capsys.readouterr().out == ("month,lambda,impact,exploitability,exploitability_raw,base\n"
                                       "0,0.041667,5.4,10.0,9.996800,6.7\n"
                                       "1,1.000000,5.4,10.0,9.996800,6.7\n"
                                       "2,0.500000,5.4,5.0,4.998400,4.4\n")


def test_forecast_decays_after_exploit(corpus, capsys):
    assert cli.main(["forecast", "--corpus", corpus, "--cve", "CVE-2016-0801"]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert len(rows) == 24
    raw = [float(row[4]) for row in rows]
    assert all(a > b for a, b in zip(raw[1:7], raw[2:7]))
    assert all(a >= b for a, b in zip(raw[1:], raw[2:]))


def test_analyze_as_of_matches_golden_snapshot(corpus, tmp_path, capsys):
    out = tmp_path / "june"
    assert cli.main(["analyze", "--corpus", corpus, "--out", str(out), "--horizon", "3", "--as-of", "2016-06-30"]) == 0
    written = sorted(os.path.basename(p) for p in capsys.readouterr().out.splitlines())
    assert written == sorted(REPORTS + ["snapshot.csv"])
    assert read_bytes(out / "snapshot.csv") == read_bytes(data_path("e2e", "golden", "snapshot.csv"))
    for name in REPORTS[:-1]:
        assert read_bytes(out / name) == read_bytes(data_path("e2e", "golden", name)), name

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["snapshot"] == {"as_of": "2016-06-30", "records": 5, "skipped": 0,
                                   "base": {"2": 2, "4": 1, "5": 1, "7": 1}}


def test_as_of_before_publication(corpus, tmp_path, capsys):
    out = tmp_path / "early"
    assert cli.main(["analyze", "--corpus", corpus, "--out", str(out), "--as-of", "2016-02-29"]) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["snapshot"]["records"] == 3
    assert summary["snapshot"]["skipped"] == 2
    assert cli.main(["forecast", "--corpus", corpus, "--cve", "CVE-2016-1001", "--as-of", "2016-02-29"]) == 2
    assert "CVE-2016-1001" in capsys.readouterr().err


def test_forecast_as_of(corpus, capsys):
    assert cli.main(["forecast", "--corpus", corpus, "--cve", "CVE-2016-0801", "--as-of", "2016-06-30"]) == 0
    assert capsys.readouterr().out == ("month,lambda,impact,exploitability,exploitability_raw,base\n"
                                       "0,0.041667,5.4,10.0,9.996800,6.7\n"
                                       "1,1.000000,5.4,10.0,9.996800,6.7\n"
                                       "2,0.500000,5.4,5.0,4.998400,4.4\n"
                                       "3,0.333333,5.4,0.6,0.555378,2.3\n"
                                       "4,0.250000,5.4,0.0,0.026033,2.0\n")


def test_bad_as_of_date_exits_two(corpus):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["analyze", "--corpus", corpus, "--as-of", "June 2016"])
    assert excinfo.value.code == 2
