"""Pipeline commands: scan, summary, fit, plot and fetch.

Every text output renders floats with six significant digits so repeated
runs produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import distfit
from .corpus import CorpusError, FetchError, fetch_contracts, load_corpus, write_directory
from .distfit import FitError, LogNormalFit, PowerLawFit
from .metrics import METRIC_NAMES, TABLE_ORDER, extract_metrics
from .stats import SummaryStatistics, summarize
from .svg import loglog_svg

logger = logging.getLogger(__name__)

__all__ = [
    "DataError",
    "FitReport",
    "fmt",
    "verdict",
    "read_metrics_table",
    "cmd_scan",
    "cmd_summary",
    "cmd_fit",
    "cmd_plot",
    "cmd_fetch",
    "main",
]

D_THRESHOLD = 0.05
R2_THRESHOLD = 0.95

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NETWORK = 0, 1, 2, 3


class DataError(Exception):
    """Input data cannot support the requested command."""


def fmt(value) -> str:
    """Text rendering shared by all outputs; ``None`` becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".6g")


def _round6(obj):
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return float(format(float(obj), ".6g"))
    return obj


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(_round6(obj), indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _mirror(path: Path, suffix: str) -> Path:
    other = path.with_suffix(suffix)
    return other if other != path else path.with_name(path.name + suffix)


# ---------------------------------------------------------------------------
# scan

def cmd_scan(corpus_path, out_path, dedup: bool = False) -> int:
    """Write the per-record metrics table (CSV plus a JSON mirror).

    Returns the number of data rows written.
    """
    corpus = load_corpus(corpus_path, dedup=dedup)
    if corpus.dedup_applied:
        logger.info("dedup: %d duplicate record(s) removed", corpus.duplicates_removed)
    rows = []
    for rec in corpus:
        rows.append((rec.address, extract_metrics(rec).as_dict()))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("address",) + METRIC_NAMES)
    for address, m in rows:
        writer.writerow([address] + [fmt(m[name]) for name in METRIC_NAMES])
    out_path = Path(out_path)
    _write(out_path, buf.getvalue())
    mirror = [{"address": address, **m} for address, m in rows]
    try:
        _dump_json({"dedup_applied": corpus.dedup_applied,
                    "duplicates_removed": corpus.duplicates_removed,
                    "records": mirror}, _mirror(out_path, ".json"))
    except OSError as exc:
        raise DataError(f"cannot write JSON mirror: {exc}") from exc
    logger.info("scan: %d record(s) written to %s", len(rows), out_path)
    return len(rows)


def read_metrics_table(path) -> dict[str, list[Optional[float]]]:
    """Columns of a metrics CSV keyed by metric name; empty cells are ``None``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "address":
        raise DataError(f"{path}: not a metrics table (missing header)")
    columns: dict[str, list[Optional[float]]] = {name: [] for name in header[1:]}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        for name, cell in zip(header[1:], row[1:]):
            try:
                columns[name].append(float(cell) if cell.strip() else None)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad value {cell!r} for {name}") from exc
    return columns


def _present(column: Sequence[Optional[float]]) -> tuple[np.ndarray, int]:
    values = [v for v in column if v is not None]
    return np.asarray(values, dtype=float), len(column) - len(values)


# ---------------------------------------------------------------------------
# summary

_SUMMARY_FIELDS = ("mean", "median", "std", "max", "min", "iqr", "p10", "p90")


def summary_table(columns: dict[str, list[Optional[float]]]) -> tuple[str, dict]:
    """Aligned text table and JSON object, rows in the published order."""
    names = [n for n in TABLE_ORDER if n in columns] + \
        [n for n in columns if n not in TABLE_ORDER]
    as_json: dict = {}
    rows = [("metric", "n", "excluded") + _SUMMARY_FIELDS]
    for name in names:
        values, excluded = _present(columns[name])
        if values.size >= 2:
            s = summarize(values)
            entry = {**s.as_dict(), "excluded": excluded}
            rows.append((name, fmt(s.n), fmt(excluded)) +
                        tuple(fmt(getattr(s, f)) for f in _SUMMARY_FIELDS))
        else:
            entry = None
            rows.append((name, fmt(int(values.size)), fmt(excluded)) +
                        ("-",) * len(_SUMMARY_FIELDS))
        as_json[name] = entry
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n", as_json


def cmd_summary(metrics_path, out_path) -> dict:
    """Summary statistics per metric, written as text and JSON."""
    columns = read_metrics_table(metrics_path)
    n_rows = len(next(iter(columns.values()), []))
    if n_rows < 2:
        raise DataError(f"summary needs at least 2 rows, {metrics_path} has {n_rows}")
    text, as_json = summary_table(columns)
    out_path = Path(out_path)
    if out_path.suffix == ".json":
        _write(_mirror(out_path, ".txt"), text)
        try:
            _dump_json(as_json, out_path)
        except OSError as exc:
            raise DataError(f"cannot write {out_path}: {exc}") from exc
    else:
        _write(out_path, text)
        try:
            _dump_json(as_json, _mirror(out_path, ".json"))
        except OSError as exc:
            raise DataError(f"cannot write JSON summary: {exc}") from exc
    return as_json


# ---------------------------------------------------------------------------
# fit

def verdict(powerlaw: Optional[PowerLawFit], lognormal: Optional[LogNormalFit],
            d_threshold: float = D_THRESHOLD, r2_threshold: float = R2_THRESHOLD) -> str:
    pl = powerlaw is not None and powerlaw.ks_d <= d_threshold
    ln = lognormal is not None and lognormal.r2_loglog >= r2_threshold
    if pl and ln:
        return "both"
    if pl:
        return "powerlaw-plausible"
    if ln:
        return "lognormal-plausible"
    return "neither"


@dataclass
class FitReport:
    metric_name: str
    n: int
    summary: Optional[SummaryStatistics]
    powerlaw: Optional[PowerLawFit] = None
    lognormal: Optional[LogNormalFit] = None
    verdict: str = "neither"
    excluded_absent: int = 0
    d_threshold: float = D_THRESHOLD
    r2_threshold: float = R2_THRESHOLD
    diagnostics: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "metric": self.metric_name,
            "n": self.n,
            "excluded_absent": self.excluded_absent,
            "summary": self.summary.as_dict() if self.summary else None,
            "powerlaw": self.powerlaw.as_dict() if self.powerlaw else None,
            "lognormal": self.lognormal.as_dict() if self.lognormal else None,
            "verdict": self.verdict,
            "thresholds": {"ks_d": self.d_threshold, "r2_loglog": self.r2_threshold},
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        pl = d.get("powerlaw")
        ln = d.get("lognormal")
        if ln is not None and ln.get("r2_loglog") is None:
            ln = {**ln, "r2_loglog": float("nan")}
        th = d.get("thresholds") or {}
        return cls(
            metric_name=d["metric"],
            n=d["n"],
            summary=SummaryStatistics(**d["summary"]) if d.get("summary") else None,
            powerlaw=PowerLawFit(**pl) if pl else None,
            lognormal=LogNormalFit(**ln) if ln else None,
            verdict=d.get("verdict", "neither"),
            excluded_absent=d.get("excluded_absent", 0),
            d_threshold=th.get("ks_d", D_THRESHOLD),
            r2_threshold=th.get("r2_loglog", R2_THRESHOLD),
            diagnostics=list(d.get("diagnostics", [])),
        )


def ccdf_tsv(ccdf: distfit.EmpiricalCCDF) -> str:
    lines = ["x\tg"]
    lines += [f"{fmt(x)}\t{fmt(g)}" for x, g in zip(ccdf.x, ccdf.g)]
    return "\n".join(lines) + "\n"


def read_ccdf_tsv(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    xs, gs = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            continue
        try:
            xs.append(float(parts[0]))
            gs.append(float(parts[1]))
        except ValueError:
            if lineno != 1:
                raise DataError(f"{path}:{lineno}: malformed CCDF row") from None
    if not xs:
        raise DataError(f"{path}: empty CCDF")
    return np.asarray(xs), np.asarray(gs)


def fit_column(values: Sequence[float], metric_name: str = "metric", models: str = "both",
               n_min: int = 10, d_threshold: float = D_THRESHOLD,
               r2_threshold: float = R2_THRESHOLD, excluded_absent: int = 0) -> FitReport:
    """Fit the requested models to one metric column and classify the result."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise DataError(f"{metric_name}: need at least 2 values, got {x.size}")
    report = FitReport(metric_name, int(x.size), summarize(x), excluded_absent=excluded_absent,
                       d_threshold=d_threshold, r2_threshold=r2_threshold)
    if models in ("powerlaw", "both"):
        try:
            report.powerlaw = distfit.fit_powerlaw(x, n_min=n_min)
        except FitError as exc:
            report.diagnostics.append(f"powerlaw: {exc}")
    if models in ("lognormal", "both"):
        try:
            report.lognormal = distfit.fit_lognormal(x)
        except FitError as exc:
            report.diagnostics.append(f"lognormal: {exc}")
    for msg in report.diagnostics:
        logger.warning("%s: %s", metric_name, msg)
    report.verdict = verdict(report.powerlaw, report.lognormal, d_threshold, r2_threshold)
    return report


def cmd_fit(metrics_path, metric_name: str, models: str, out_json, out_ccdf, n_min: int = 10,
            d_threshold: float = D_THRESHOLD, r2_threshold: float = R2_THRESHOLD) -> FitReport:
    """Fit one metric column; writes the JSON report and the CCDF table."""
    if models not in ("powerlaw", "lognormal", "both"):
        raise ValueError(f"unknown model selection {models!r}")
    columns = read_metrics_table(metrics_path)
    if metric_name not in columns:
        raise DataError(f"no metric column {metric_name!r} in {metrics_path}")
    values, excluded = _present(columns[metric_name])
    if excluded:
        logger.info("%s: %d absent value(s) excluded", metric_name, excluded)
    report = fit_column(values, metric_name, models, n_min, d_threshold, r2_threshold, excluded)
    _write(Path(out_ccdf), ccdf_tsv(distfit.empirical_ccdf(values)))
    try:
        _dump_json(report.as_dict(), Path(out_json))
    except OSError as exc:
        raise DataError(f"cannot write {out_json}: {exc}") from exc
    return report


# ---------------------------------------------------------------------------
# plot

def _curves(report: FitReport):
    curves = []
    if report.powerlaw is not None:
        pl = report.powerlaw
        frac = pl.n_tail / report.n
        curves.append((
            f"power law α={fmt(pl.alpha)} x0={fmt(pl.x0)} D={fmt(pl.ks_d)}",
            lambda v, pl=pl, frac=frac: distfit.powerlaw_ccdf(v, pl.alpha, pl.x0, frac),
            pl.x0, math.inf,
        ))
    if report.lognormal is not None:
        ln = report.lognormal
        frac = ln.n_used / report.n
        curves.append((
            f"lognormal μ={fmt(ln.mu)} σ={fmt(ln.sigma)} R²={fmt(ln.r2_loglog)}",
            lambda v, ln=ln, frac=frac: frac * distfit.lognormal_ccdf(v, ln.mu, ln.sigma),
            0.0, math.inf,
        ))
    return curves


def cmd_plot(ccdf_path, fit_json=None, out_svg="ccdf.svg") -> str:
    """Log-log SVG of an exported CCDF, with fitted curves when a report is given."""
    x, g = read_ccdf_tsv(ccdf_path)
    keep = (x > 0) & (g > 0)
    skipped = int((~keep).sum())
    if skipped:
        logger.warning("plot: %d point(s) with non-positive x or g omitted", skipped)
    if not keep.any():
        raise DataError(f"{ccdf_path}: no positive points to plot")
    curves = []
    title = None
    if fit_json is not None:
        try:
            report = FitReport.from_dict(json.loads(Path(fit_json).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise DataError(f"cannot read fit report {fit_json}: {exc}") from exc
        curves = _curves(report)
        title = f"{report.metric_name} (verdict: {report.verdict})"
    svg = loglog_svg(x[keep], g[keep], curves, title=title)
    _write(Path(out_svg), svg)
    return svg


# ---------------------------------------------------------------------------
# fetch

def cmd_fetch(addresses_path, out_dir, api_key: str, rate: float = 4.0,
              with_bytecode: bool = False, **client_kw) -> int:
    """Download verified sources listed in a file into the directory layout."""
    try:
        lines = Path(addresses_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {addresses_path}: {exc}") from exc
    addresses = [ln.split("#", 1)[0].strip() for ln in lines]
    addresses = [a for a in addresses if a]
    records = fetch_contracts(addresses, api_key, rate, with_bytecode=with_bytecode, **client_kw)
    written = write_directory(records, out_dir)
    logger.info("fetch: %d of %d address(es) written to %s", written, len(addresses), out_dir)
    return written


# ---------------------------------------------------------------------------
# command line

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scmetrics", description="Smart contract metrics and tail fits.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scan", help="extract per-contract metrics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dedup", action="store_true")

    p = sub.add_parser("summary", help="descriptive statistics per metric")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit power-law / lognormal models to one metric")
    p.add_argument("--metrics", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--model", choices=("powerlaw", "lognormal", "both"), default="both")
    p.add_argument("--out", required=True)
    p.add_argument("--ccdf", required=True)
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--d-threshold", type=float, default=D_THRESHOLD)
    p.add_argument("--r2-threshold", type=float, default=R2_THRESHOLD)

    p = sub.add_parser("plot", help="log-log CCDF plot as SVG")
    p.add_argument("--ccdf", required=True)
    p.add_argument("--fit")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fetch", help="download verified sources from an explorer API")
    p.add_argument("--addresses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=float, default=4.0)
    p.add_argument("--api-key", default=None, help="defaults to $ETHERSCAN_API_KEY")
    p.add_argument("--base-url", default=None)
    p.add_argument("--bytecode", action="store_true", help="also fetch deployed bytecode")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "scan":
            cmd_scan(args.corpus, args.out, args.dedup)
        elif args.command == "summary":
            cmd_summary(args.metrics, args.out)
        elif args.command == "fit":
            if args.n_min < 1:
                parser.error("--n-min must be positive")
            report = cmd_fit(args.metrics, args.metric, args.model, args.out, args.ccdf,
                             args.n_min, args.d_threshold, args.r2_threshold)
            logger.info("fit %s: verdict %s", report.metric_name, report.verdict)
        elif args.command == "plot":
            cmd_plot(args.ccdf, args.fit, args.out)
        elif args.command == "fetch":
            api_key = args.api_key or os.environ.get("ETHERSCAN_API_KEY")
            if not api_key:
                parser.error("an API key is required (--api-key or ETHERSCAN_API_KEY)")
            if args.rate <= 0:
                parser.error("--rate must be positive")
            kw = {"base_url": args.base_url} if args.base_url else {}
            cmd_fetch(args.addresses, args.out, api_key, args.rate, args.bytecode, **kw)
    except (FetchError, ConnectionError) as exc:
        logger.error("%s", exc)
        return EXIT_NETWORK
    except (CorpusError, DataError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
