#!/usr/bin/env python
"""
cvsstemporal - CVSS v2 scoring, enhanced impact weights and time-decaying
exploitability over local NVD / Exploit-DB files
"""
import argparse
import configparser
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction

from dateutil import parser as dateparser

from . import analytics, ingest
from .errors import ConfigError, CvssTemporalError, PublishedAfterCutoff, UnknownCve
from .scoring import EnhancedVector, VulnScope, score_classic, score_enhanced, severity
from .temporal import DEFAULT_HORIZON_MONTHS, DEFAULT_LAMBDA_FLOOR, TemporalParams, Timeline, forecast_series
from .vector import parse_vector

# Constants
CONFIG_FILE = "cvss-temporal.conf"
CONFIG_SECTION = "cvss-temporal"

EXIT_OK = 0
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


@dataclass
class CliConfig:
    """Settings read from cvss-temporal.conf, overridden by flags"""
    corpus_path: str = "corpus.txt"
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR
    horizon_months: int = DEFAULT_HORIZON_MONTHS
    output_dir: str = "reports"


def _parse_lambda_floor(value):
    floor = float(Fraction(value.strip()))
    if floor <= 0:
        raise ValueError("must be positive")
    return floor


def _parse_horizon(value):
    horizon = int(value)
    if horizon < 1:
        raise ValueError("must be at least 1")
    return horizon


def _parse_date(value):
    """YYYY-MM-DD cutoff date"""
    return dateparser.isoparse(value.strip()).date()


_CONFIG_PARSERS = {
    "corpus_path": str.strip,
    "lambda_floor": _parse_lambda_floor,
    "horizon_months": _parse_horizon,
    "output_dir": str.strip,
}


def load_config(path=CONFIG_FILE):
    """Load configuration from a flat key=value file; defaults when it is absent"""
    config = CliConfig()
    if not os.path.exists(path):
        logger.info("no config file at %s, using defaults", path)
        return config

    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_string(f"[{CONFIG_SECTION}]\n" + f.read(), source=path)
    except (OSError, UnicodeDecodeError, configparser.Error) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    for key, value in parser.items(CONFIG_SECTION):
        convert = _CONFIG_PARSERS.get(key)
        if convert is None:
            logger.warning("%s: unknown config key %r ignored", path, key)
            continue
        try:
            setattr(config, key, convert(value))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{path}: bad value for {key}: {value!r} ({e})") from e
    return config


def write_default_config(path=CONFIG_FILE):
    """Write the default configuration as key=value lines"""
    defaults = CliConfig()
    lines = [
        f"corpus_path={defaults.corpus_path}",
        "lambda_floor=1/24",
        f"horizon_months={defaults.horizon_months}",
        f"output_dir={defaults.output_dir}",
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return path


def apply_overrides(config, args):
    """Flags given on the command line win over the config file"""
    for f in fields(CliConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    return config


def cmd_score(args, config):
    """Print impact, exploitability and base score for one vector"""
    vector = parse_vector(args.vector)
    if args.enhanced:
        if args.scope is None:
            logger.error("--enhanced needs --scope app|os")
            return EXIT_USAGE
        breakdown = score_enhanced(EnhancedVector(vector, VulnScope(args.scope)))
    else:
        breakdown = score_classic(vector)
    line = breakdown.line()
    if args.severity:
        line += f" severity={severity(breakdown.base)}"
    print(line)
    return EXIT_OK


def cmd_ingest(args, config):
    """Parse feeds and exports into a corpus file"""
    overrides = ingest.load_scope_overrides(args.scope_overrides) if args.scope_overrides else {}

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda path: ingest.parse_nvd_feed(path, overrides), args.nvd))
    records, merge_diagnostics = ingest.merge_records(feed_records for feed_records, _ in results)
    diagnostics = [d for _, feed_diagnostics in results for d in feed_diagnostics] + merge_diagnostics

    exploits, patches = [], []
    if args.edb:
        exploits, edb_diagnostics = ingest.parse_edb_csv(args.edb)
        diagnostics.extend(edb_diagnostics)
    if args.patches:
        patches, patch_diagnostics = ingest.parse_patch_csv(args.patches)
        diagnostics.extend(patch_diagnostics)

    timelines = ingest.build_timelines(records, exploits, patches)
    ingest.save_corpus(records, timelines, config.corpus_path)

    skipped = sum(1 for d in diagnostics if d.dropped)
    unlinked = len({e.edb_id for e in exploits if not e.linked})
    print(f"kept={len(records)} skipped={skipped} unlinked={unlinked}")
    return EXIT_OK


def cmd_analyze(args, config):
    """Write the incidence, histogram, comparison, forecast and summary reports"""
    records, timelines = ingest.load_corpus(config.corpus_path)
    analysis = analytics.analyze(records, timelines, args.platform, config.horizon_months, config.lambda_floor,
                                 args.as_of)
    for path in analytics.write_reports(analysis, config.output_dir):
        print(path)
    return EXIT_OK


def cmd_forecast(args, config):
    """Print one CVE's month-by-month forecast as CSV.

    With --as-of the series runs from registration up to the cutoff month.
    """
    records, timelines = ingest.load_corpus(config.corpus_path)
    record = next((r for r in records if r.cve_id == args.cve), None)
    if record is None:
        raise UnknownCve(f"{args.cve} is not in {config.corpus_path}")
    timeline = next((t for t in timelines if t.cve_id == args.cve), None) \
        or Timeline(record.cve_id, record.published, ())

    if args.classic or record.scope is None:
        vector = record.vector
    else:
        vector = EnhancedVector(record.vector, record.scope)
    horizon = config.horizon_months
    if args.as_of:
        if record.published > args.as_of:
            raise PublishedAfterCutoff(f"{record.cve_id} was published {record.published}, after {args.as_of}")
        horizon = ingest.months_between(record.published, args.as_of) + 1
    params = TemporalParams(lam=config.lambda_floor, lambda_floor=config.lambda_floor)
    series = forecast_series(vector, timeline, horizon, params)
    rows = [analytics.ForecastRow(record.cve_id, len(timeline.points), point) for point in series]
    analytics.write_csv(analytics.forecast_frame(rows, with_cve=False), sys.stdout)
    return EXIT_OK


def cmd_config(args, config):
    """Write a default config file"""
    path = args.config or CONFIG_FILE
    if os.path.exists(path) and not args.force:
        logger.error("%s already exists (use --force to overwrite)", path)
        return EXIT_USAGE
    print(write_default_config(path))
    return EXIT_OK


def build_parser():
    """Argument parser with the score, ingest, analyze, forecast and config subcommands"""
    parser = argparse.ArgumentParser(
        prog="cvsstemporal",
        description="cvsstemporal - CVSS v2 scoring with enhanced impact weights and time-decaying exploitability")
    parser.add_argument("--config", help=f"Config file (default: ./{CONFIG_FILE})")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log progress to standard error")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Only log errors")
    subparsers = parser.add_subparsers(dest="command", required=True)

    score = subparsers.add_parser("score", help="Score one CVSS v2 base vector")
    score.add_argument("vector", help="Vector such as AV:N/AC:M/Au:N/C:P/I:P/A:P")
    score.add_argument("--scope", choices=[s.value for s in VulnScope], help="Vulnerability scope")
    score.add_argument("--enhanced", action="store_true", help="Use the scope-split Partial weights")
    score.add_argument("--severity", action="store_true", help="Append the NVD severity band")
    score.set_defaults(handler=cmd_score)

    ingest_cmd = subparsers.add_parser("ingest", help="Build a corpus from NVD, EDB and patch files")
    ingest_cmd.add_argument("--nvd", nargs="+", required=True, help="NVD JSON 1.1 feed file(s), optionally .gz")
    ingest_cmd.add_argument("--edb", help="Exploit-DB CSV export")
    ingest_cmd.add_argument("--patches", help="Patch events CSV (cve_id,date,kind)")
    ingest_cmd.add_argument("--scope-overrides", help="Manual scopes CSV (cve_id,scope)")
    ingest_cmd.add_argument("--out", dest="corpus_path", help="Corpus file to write")
    ingest_cmd.set_defaults(handler=cmd_ingest)

    analyze = subparsers.add_parser("analyze", help="Write report files for a corpus")
    analyze.add_argument("--corpus", dest="corpus_path", help="Corpus file")
    analyze.add_argument("--platform", choices=["android", "ios", "all"], default="all")
    analyze.add_argument("--out", dest="output_dir", help="Report directory")
    analyze.add_argument("--horizon", dest="horizon_months", type=_parse_horizon, help="Forecast months")
    analyze.add_argument("--lambda-floor", dest="lambda_floor", type=_parse_lambda_floor,
                         help="Lower bound for lambda, e.g. 1/24")
    analyze.add_argument("--as-of", type=_parse_date, help="Also score every CVE at its age on this date (YYYY-MM-DD)")
    analyze.set_defaults(handler=cmd_analyze)

    forecast = subparsers.add_parser("forecast", help="Forecast one CVE month by month")
    forecast.add_argument("--corpus", dest="corpus_path", help="Corpus file")
    forecast.add_argument("--cve", required=True, help="CVE id")
    forecast.add_argument("--horizon", dest="horizon_months", type=_parse_horizon, help="Forecast months")
    forecast.add_argument("--lambda-floor", dest="lambda_floor", type=_parse_lambda_floor,
                          help="Lower bound for lambda, e.g. 1/24")
    forecast.add_argument("--classic", action="store_true", help="Use classic impact weights")
    forecast.add_argument("--as-of", type=_parse_date, help="Forecast up to this date (YYYY-MM-DD), not --horizon")
    forecast.set_defaults(handler=cmd_forecast)

    config_cmd = subparsers.add_parser("config", help="Write a default config file")
    config_cmd.add_argument("--init", action="store_true", required=True, help="Create the file")
    config_cmd.add_argument("--force", action="store_true", help="Overwrite an existing file")
    config_cmd.set_defaults(handler=cmd_config)
    return parser


def setup_logging(verbose=False, quiet=False):
    """Configure root logging to standard error"""
    level = logging.INFO if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr,
                        force=True)


def main(argv=None):
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.quiet)

    try:
        config = load_config(args.config or CONFIG_FILE) if args.command != "config" else CliConfig()
        config = apply_overrides(config, args)
        return args.handler(args, config)
    except (CvssTemporalError, OSError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
