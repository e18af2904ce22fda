"""Connectivity-requirement levels for drone applications and compliance
gating of observed KPIs.

The shipped registry file holds the requirement levels (coverage bands with
scenarios, uplink rate levels, end-to-end/network latency levels,
positioning accuracy levels) plus the expected single-user 5G rate table;
each level value lives in exactly one level entry and named applications
compose levels by reference. Gating is boundary-inclusive: rates pass at
observed >= required, latency and positioning at observed <= required.
"""

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources

REGISTRY_SCHEMA_VERSION = 1

VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_PASS_WITH_GAPS = "pass-with-gaps"

KPI_SOURCES = ("simulated", "field_log")

# KPI dimension -> (profile attribute, comparison); "ge" passes when the
# observed value is at least the requirement, "le" when at most.
_DIMENSIONS = (
    ("uplink_rate_bps", "uplink_rate_bps", "ge"),
    ("downlink_rate_bps", "downlink_rate_bps", "ge"),
    ("e2e_latency_ms", "e2e_latency_ms", "le"),
    ("network_latency_ms", "network_latency_ms", "le"),
    ("positioning_accuracy_m", "positioning_accuracy_m", "le"),
    ("max_reliable_height_m", "altitude_max_m", "ge"),
)


class CoverageScenario(enum.Enum):
    HOTSPOT = "hotspot"
    ALONG_LINE = "along_line"
    URBAN_MACRO = "urban_macro"
    WIDE_AREA = "wide_area"


class UnknownApplicationError(ValueError):
    pass


@dataclass(frozen=True)
class RequirementProfile:
    application: str
    altitude_min_m: float
    altitude_max_m: float
    coverage_scenario: CoverageScenario
    uplink_rate_bps: float
    e2e_latency_ms: float
    network_latency_ms: float
    positioning_accuracy_m: float
    downlink_rate_bps: float | None = None

    def __post_init__(self):
        if self.network_latency_ms > self.e2e_latency_ms:
            raise ValueError("network latency requirement exceeds end-to-end")
        for name in ("altitude_max_m", "uplink_rate_bps", "e2e_latency_ms",
                     "network_latency_ms", "positioning_accuracy_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.downlink_rate_bps is not None and self.downlink_rate_bps <= 0:
            raise ValueError("downlink_rate_bps must be > 0 when present")


@dataclass(frozen=True)
class Rate5gEntry:
    fc_ghz: float
    bw_hz: float
    cell_radius_m: float
    antenna_config: str
    dl_peak_bps: float
    ul_peak_bps: float | None
    dl_edge_bps: float
    ul_edge_bps: float | None

    def __post_init__(self):
        if self.dl_edge_bps > self.dl_peak_bps:
            raise ValueError("DL edge rate exceeds DL peak rate")
        if (self.ul_peak_bps is not None and self.ul_edge_bps is not None
                and self.ul_edge_bps > self.ul_peak_bps):
            raise ValueError("UL edge rate exceeds UL peak rate")


@dataclass(frozen=True)
class KpiValue:
    value: float
    source: str  # "simulated" | "field_log"

    def __post_init__(self):
        if self.source not in KPI_SOURCES:
            raise ValueError(f"source must be one of {KPI_SOURCES}, got {self.source!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"KPI value must be finite and >= 0, got {self.value}")


@dataclass(frozen=True)
class KpiReport:
    uplink_rate_bps: KpiValue | None = None
    downlink_rate_bps: KpiValue | None = None
    e2e_latency_ms: KpiValue | None = None
    network_latency_ms: KpiValue | None = None
    positioning_accuracy_m: KpiValue | None = None
    max_reliable_height_m: KpiValue | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "KpiReport":
        known = {name for name, _, _ in _DIMENSIONS}
        fields = {}
        for key, raw in obj.items():
            if key not in known:
                raise ValueError(f"unknown KPI field {key!r}; expected one of "
                                 f"{sorted(known)}")
            fields[key] = KpiValue(value=float(raw["value"]), source=raw["source"])
        return cls(**fields)


@dataclass(frozen=True)
class DimensionResult:
    required: float
    observed: float | None
    status: str  # "pass" | "fail" | "unknown"


@dataclass(frozen=True)
class ComplianceReport:
    application: str
    dimensions: dict
    verdict: str

    def to_json(self) -> dict:
        return {"application": self.application,
                "verdict": self.verdict,
                "dimensions": {name: {"required": r.required,
                                      "observed": r.observed,
                                      "status": r.status}
                               for name, r in self.dimensions.items()}}

    def to_text(self) -> str:
        lines = [f"application: {self.application}"]
        for name, r in self.dimensions.items():
            observed = "-" if r.observed is None else repr(r.observed)
            lines.append(f"  {name:<24} required {r.required!r:<14} "
                         f"observed {observed:<14} {r.status.upper()}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def _load_registry_file() -> dict:
    path = resources.files("droneradio").joinpath("data/requirements_registry.json")
    with path.open() as fh:
        registry = json.load(fh)
    if registry.get("schema_version") != REGISTRY_SCHEMA_VERSION:
        raise ValueError(f"registry schema_version {registry.get('schema_version')!r} "
                         f"not supported; expected {REGISTRY_SCHEMA_VERSION}")
    return registry


_registry_cache = None


def load_registry() -> dict:
    global _registry_cache
    if _registry_cache is None:
        _registry_cache = _load_registry_file()
    return _registry_cache


def known_applications(registry: dict | None = None):
    registry = registry or load_registry()
    return sorted(registry["applications"])


def lookup_requirements(application: str,
                        registry: dict | None = None) -> RequirementProfile:
    """Resolve an application name into its composed requirement profile."""
    registry = registry or load_registry()
    apps = registry["applications"]
    if application not in apps:
        raise UnknownApplicationError(
            f"unknown application {application!r}; known applications: "
            f"{', '.join(sorted(apps))}")
    binding = apps[application]
    coverage = _level(registry["coverage_levels"], binding["coverage"])
    rate = _level(registry["data_rate_levels"], binding["data_rate"])
    latency = _level(registry["latency_levels"], binding["latency"])
    positioning = _level(registry["positioning_levels"], binding["positioning"])
    downlink = None
    if binding.get("downlink_control"):
        downlink = float(registry["control_downlink_bps"]["max"])
    return RequirementProfile(
        application=application,
        altitude_min_m=float(coverage["altitude_min_m"]),
        altitude_max_m=float(coverage["altitude_max_m"]),
        coverage_scenario=CoverageScenario(coverage["scenario"]),
        uplink_rate_bps=float(rate["uplink_bps"]),
        e2e_latency_ms=float(latency["e2e_ms"]),
        network_latency_ms=float(latency["network_ms"]),
        positioning_accuracy_m=float(positioning["accuracy_m"]),
        downlink_rate_bps=downlink)


def _level(levels, number):
    for entry in levels:
        if entry["level"] == number:
            return entry
    raise ValueError(f"registry references missing level {number}")


def expected_5g_rates(fc_ghz: float, cell_radius_m: float,
                      registry: dict | None = None):
    """All rate-table entries matching (frequency, cell radius); dual
    antenna configurations yield one entry each."""
    registry = registry or load_registry()
    matches = []
    available = []
    for row in registry["rate_5g_rows"]:
        available.append((row["fc_ghz"], row["cell_radius_m"]))
        if row["fc_ghz"] == fc_ghz and row["cell_radius_m"] == cell_radius_m:
            matches.append(Rate5gEntry(
                fc_ghz=float(row["fc_ghz"]), bw_hz=float(row["bw_hz"]),
                cell_radius_m=float(row["cell_radius_m"]),
                antenna_config=row["antenna_config"],
                dl_peak_bps=float(row["dl_peak_bps"]),
                ul_peak_bps=None if row["ul_peak_bps"] is None
                else float(row["ul_peak_bps"]),
                dl_edge_bps=float(row["dl_edge_bps"]),
                ul_edge_bps=None if row["ul_edge_bps"] is None
                else float(row["ul_edge_bps"])))
    if not matches:
        rows = ", ".join(f"({fc} GHz, {r} m)" for fc, r in sorted(set(available)))
        raise ValueError(f"no rate entry for ({fc_ghz} GHz, {cell_radius_m} m); "
                         f"available rows: {rows}")
    return tuple(matches)


def gate(kpis: KpiReport, profile: RequirementProfile) -> ComplianceReport:
    """Compare observed KPIs against a profile, dimension by dimension.

    Dimensions the profile does not require are omitted; required dimensions
    without an observation are 'unknown'. Any failing dimension fails the
    verdict; otherwise any unknown dimension demotes it to pass-with-gaps.
    """
    dimensions = {}
    for kpi_name, profile_attr, direction in _DIMENSIONS:
        required = getattr(profile, profile_attr)
        if required is None:
            continue
        observed = getattr(kpis, kpi_name)
        if observed is None:
            dimensions[kpi_name] = DimensionResult(required=required, observed=None,
                                                   status="unknown")
            continue
        value = observed.value
        ok = value >= required if direction == "ge" else value <= required
        dimensions[kpi_name] = DimensionResult(required=required, observed=value,
                                               status="pass" if ok else "fail")
    if any(r.status == "fail" for r in dimensions.values()):
        verdict = VERDICT_FAIL
    elif any(r.status == "unknown" for r in dimensions.values()):
        verdict = VERDICT_PASS_WITH_GAPS
    else:
        verdict = VERDICT_PASS
    return ComplianceReport(application=profile.application,
                            dimensions=dimensions, verdict=verdict)
