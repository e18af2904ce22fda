"""Field-measurement log ingestion, per-height summaries, and requirement
gating.

Logs use one canonical CSV schema (header below); blank cells are absent
optionals. Summaries bucket records into caller-supplied height bins
(half-open [low, high)), report nearest-rank percentiles, and the fraction
of values inside a configurable band per metric. Records matching no bin
land in an explicit unbinned bucket, never dropped silently.

A synthetic-log generator is bundled for end-to-end checks: it produces the
characteristic low-altitude LTE bands (latency 200-300 ms up to 100 m and
400-500 ms at 300 m, uplink mostly between 4 and 10 Mbps). Synthetic means
synthetic -- it is a stand-in for unpublished drive data, not a measurement.
"""

import csv
import math
from dataclasses import dataclass

from droneradio import _rng
from droneradio.requirements import (ComplianceReport, KpiReport, KpiValue,
                                     RequirementProfile, gate)

TRIAL_CSV_HEADER = ["height_m", "rsrp_dbm", "sinr_db", "ul_rate_bps", "latency_ms"]
METRICS = ("rsrp_dbm", "sinr_db", "ul_rate_bps", "latency_ms")


class TrialFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrialRecord:
    height_m: float
    rsrp_dbm: float | None = None
    sinr_db: float | None = None
    ul_rate_bps: float | None = None
    latency_ms: float | None = None
    line_no: int | None = None  # source line for error reporting

    def __post_init__(self):
        if not (math.isfinite(self.height_m) and self.height_m > 0):
            raise ValueError(f"height_m must be finite and > 0, got {self.height_m}")
        for name in METRICS:
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class MetricSummary:
    count: int
    p25: float | None
    median: float | None
    p75: float | None
    band: tuple | None = None
    band_fraction: float | None = None


@dataclass(frozen=True)
class BinSummary:
    bin_low_m: float
    bin_high_m: float
    count: int
    metrics: dict


@dataclass(frozen=True)
class TrialSummary:
    bins: tuple
    unbinned_count: int
    total_count: int

    def find_bin(self, low: float, high: float) -> BinSummary:
        for b in self.bins:
            if b.bin_low_m == low and b.bin_high_m == high:
                return b
        known = ", ".join(f"[{b.bin_low_m}, {b.bin_high_m})" for b in self.bins)
        raise ValueError(f"no bin [{low}, {high}) in summary; bins: {known}")

    def to_json(self) -> dict:
        return {
            "total_count": self.total_count,
            "unbinned_count": self.unbinned_count,
            "bins": [
                {"bin_low_m": b.bin_low_m, "bin_high_m": b.bin_high_m,
                 "count": b.count,
                 "metrics": {name: {"count": m.count, "p25": m.p25,
                                    "median": m.median, "p75": m.p75,
                                    "band": list(m.band) if m.band else None,
                                    "band_fraction": m.band_fraction}
                             for name, m in b.metrics.items()}}
                for b in self.bins],
        }


def ingest_csv(path):
    """Parse a trial log; raises TrialFormatError with line and column on any
    malformed content."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TrialFormatError(
                f"{path}: empty file, expected header "
                f"{','.join(TRIAL_CSV_HEADER)}") from None
        if header != TRIAL_CSV_HEADER:
            unknown = [c for c in header if c not in TRIAL_CSV_HEADER]
            if unknown:
                raise TrialFormatError(
                    f"{path}: unknown column(s) {unknown}; expected header "
                    f"{','.join(TRIAL_CSV_HEADER)}")
            raise TrialFormatError(
                f"{path}: bad header {','.join(header)}; expected "
                f"{','.join(TRIAL_CSV_HEADER)}")
        records = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(TRIAL_CSV_HEADER):
                raise TrialFormatError(
                    f"{path}: line {line_no}: expected {len(TRIAL_CSV_HEADER)} "
                    f"fields, got {len(row)}")
            values = {}
            for col, cell in zip(TRIAL_CSV_HEADER, row):
                cell = cell.strip()
                if cell == "":
                    values[col] = None
                    continue
                try:
                    values[col] = float(cell)
                except ValueError:
                    raise TrialFormatError(
                        f"{path}: line {line_no}, column {col}: "
                        f"cannot parse {cell!r} as a number") from None
            if values["height_m"] is None:
                raise TrialFormatError(
                    f"{path}: line {line_no}, column height_m: value required")
            try:
                records.append(TrialRecord(line_no=line_no, **values))
            except ValueError as exc:
                raise TrialFormatError(f"{path}: line {line_no}: {exc}") from None
    return records


def nearest_rank_percentile(sorted_values, q: float) -> float:
    """Nearest-rank percentile over an ascending list (q in (0, 100])."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("no values")
    rank = math.ceil(q / 100.0 * n)
    if rank < 1:
        rank = 1
    return sorted_values[rank - 1]


def summarize(records, bins, bands: dict | None = None) -> TrialSummary:
    """Per-bin nearest-rank percentiles and optional band fractions.

    bins: [(low, high), ...] half-open and non-overlapping.
    bands: {metric: (low, high)} inclusive value band per metric.
    """
    records = list(records)
    bins = [(float(lo), float(hi)) for lo, hi in bins]
    for lo, hi in bins:
        if not lo < hi:
            raise ValueError(f"bad bin [{lo}, {hi}): low must be < high")
    for (lo1, hi1) in bins:
        for (lo2, hi2) in bins:
            if (lo1, hi1) < (lo2, hi2) and lo2 < hi1 and lo1 < hi2:
                raise ValueError(f"bins [{lo1}, {hi1}) and [{lo2}, {hi2}) overlap")
    bands = bands or {}
    for name in bands:
        if name not in METRICS:
            raise ValueError(f"unknown band metric {name!r}; expected one of {METRICS}")

    grouped = {b: [] for b in bins}
    unbinned = 0
    for rec in records:
        for lo, hi in bins:
            if lo <= rec.height_m < hi:
                grouped[(lo, hi)].append(rec)
                break
        else:
            unbinned += 1

    summaries = []
    for lo, hi in bins:
        members = grouped[(lo, hi)]
        metrics = {}
        for name in METRICS:
            values = sorted(getattr(r, name) for r in members
                            if getattr(r, name) is not None)
            band = bands.get(name)
            if not values:
                metrics[name] = MetricSummary(count=0, p25=None, median=None,
                                              p75=None, band=band, band_fraction=None)
                continue
            fraction = None
            if band is not None:
                b_lo, b_hi = band
                inside = sum(1 for v in values if b_lo <= v <= b_hi)
                fraction = inside / len(values)
            metrics[name] = MetricSummary(
                count=len(values),
                p25=nearest_rank_percentile(values, 25.0),
                median=nearest_rank_percentile(values, 50.0),
                p75=nearest_rank_percentile(values, 75.0),
                band=band, band_fraction=fraction)
        summaries.append(BinSummary(bin_low_m=lo, bin_high_m=hi,
                                    count=len(members), metrics=metrics))
    return TrialSummary(bins=tuple(summaries), unbinned_count=unbinned,
                        total_count=len(records))


def trial_gate(summary: TrialSummary, profile: RequirementProfile,
               height_bin) -> ComplianceReport:
    """Gate one height bin's median uplink rate and latency against a
    profile. The logged latency is round-trip and gates the end-to-end
    requirement; network latency stays unknown without its own column."""
    lo, hi = height_bin
    b = summary.find_bin(float(lo), float(hi))
    kpis = {}
    ul = b.metrics["ul_rate_bps"]
    if ul.median is not None:
        kpis["uplink_rate_bps"] = KpiValue(value=ul.median, source="field_log")
    lat = b.metrics["latency_ms"]
    if lat.median is not None:
        kpis["e2e_latency_ms"] = KpiValue(value=lat.median, source="field_log")
    return gate(KpiReport(**kpis), profile)


SUMMARY_CSV_HEADER = ["bin_low_m", "bin_high_m", "metric", "count",
                      "p25", "median", "p75", "band_low", "band_high",
                      "band_fraction"]


def summary_csv_rows(summary: TrialSummary):
    rows = []
    for b in summary.bins:
        for name in METRICS:
            m = b.metrics[name]
            band_lo, band_hi = (m.band if m.band is not None else (None, None))
            rows.append([b.bin_low_m, b.bin_high_m, name, m.count,
                         m.p25, m.median, m.p75, band_lo, band_hi,
                         m.band_fraction])
    return rows


# Synthetic-log shape: per height, the latency band, the share of latency
# draws pushed above the band, and the uplink-rate mixture
# (below 4 Mbps / 4-9.5 Mbps / 10-12 Mbps).
_SYNTH_HEIGHTS = (50.0, 100.0, 300.0)
_LATENCY_OUTLIER_SHARE = 0.02
_UL_MIX = ((0.08, (1.0e6, 4.0e6)), (0.87, (4.0e6, 9.5e6)), (0.05, (10.0e6, 12.0e6)))


def synthesize_trial(seed: int, samples_per_height: int = 200,
                     heights=_SYNTH_HEIGHTS):
    """Deterministic synthetic drive log reproducing the expected low-altitude
    LTE bands; clearly a stand-in, not field data."""
    if samples_per_height < 1:
        raise ValueError("samples_per_height must be >= 1")
    records = []
    for h_ix, height in enumerate(heights):
        lat_band = (400.0, 500.0) if height > 100.0 else (200.0, 300.0)
        rsrp_band = (-105.0, -88.0) if height > 100.0 else (-90.0, -75.0)
        sinr_band = (-12.0, 0.0) if height > 100.0 else (-10.0, 5.0)
        for i in range(samples_per_height):
            stream = _rng.Stream(_rng.stream_key(seed, "fieldtrial.synth", h_ix, i))
            if stream.uniform() < _LATENCY_OUTLIER_SHARE:
                latency = lat_band[1] + 80.0 * stream.uniform()
            else:
                latency = lat_band[0] + (lat_band[1] - lat_band[0]) * stream.uniform()
            u = stream.uniform()
            acc = 0.0
            lo, hi = _UL_MIX[-1][1]
            for share, (band_lo, band_hi) in _UL_MIX:
                acc += share
                if u < acc:
                    lo, hi = band_lo, band_hi
                    break
            ul_rate = lo + (hi - lo) * stream.uniform()
            rsrp = rsrp_band[0] + (rsrp_band[1] - rsrp_band[0]) * stream.uniform()
            sinr = sinr_band[0] + (sinr_band[1] - sinr_band[0]) * stream.uniform()
            records.append(TrialRecord(height_m=height, rsrp_dbm=rsrp, sinr_db=sinr,
                                       ul_rate_bps=ul_rate, latency_ms=latency))
    return records


def trial_csv_rows(records):
    return [[r.height_m, r.rsrp_dbm, r.sinr_db, r.ul_rate_bps, r.latency_ms]
            for r in records]
