"""Experiment configuration: a versioned JSON schema with strict validation.

Unknown keys are rejected with their full path, missing keys fall back to
the defaults below, and every field is type- and range-checked before any
work starts. One master seed drives all stages.
"""

import copy
import hashlib
import json
from dataclasses import dataclass

from droneradio._io import canonical_json
from droneradio.deployment import CellTemplate, PlacementSpec
from droneradio.ml import GridBounds, LogisticConfig, TreeConfig
from droneradio.radio import ChannelParams

CONFIG_SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "schema_version": 1,
    "seed": 0,
    "layout": {
        "rings": 1,
        "isd_m": 500.0,
        "bs_height_m": 25.0,
        "tx_power_dbm": 46.0,
        "fc_ghz": 2.0,
        "bw_hz": 20e6,
        "downtilt_deg": 6.0,
    },
    "channel": {
        "shadow_sigma_los_db": 4.0,
        "shadow_sigma_nlos_db": 6.0,
        "indoor_penetration_db": 20.0,
        "ue_noise_figure_db": 9.0,
        "n_subcarriers": 1200,
    },
    "placement": {
        "indoor": 100,
        "outdoor": 500,
        "aerial_per_height": 100,
        "aerial_heights_m": [15.0, 30.0, 60.0, 100.0, 200.0, 300.0],
        "min_bs_dist_m": 35.0,
    },
    "ml": {
        "learning_rate": 0.1,
        "max_iters": 5000,
        "tolerance": 1e-6,
        "l2": 0.0,
        "max_depth": 6,
        "min_leaf": 5,
        "threshold": 0.5,
        "test_fraction": 0.3,
    },
    "grid": {
        "rssi_min": -110.0,
        "rssi_max": -30.0,
        "rsrp_std_min": 0.0,
        "rsrp_std_max": 16.0,
        "steps_rssi": 60,
        "steps_rsrp_std": 60,
    },
}


class ConfigError(ValueError):
    pass


def _check_number(value, path, minimum=None, strict=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None:
        if strict and not value > minimum:
            raise ConfigError(f"{path}: must be > {minimum}, got {value!r}")
        if not strict and not value >= minimum:
            raise ConfigError(f"{path}: must be >= {minimum}, got {value!r}")
    return value


def _merge_section(raw, defaults, path):
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object, got {raw!r}")
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown key {path}.{sorted(unknown)[0]}")
    merged = copy.deepcopy(defaults)
    merged.update(raw)
    return merged


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    rings: int
    isd_m: float
    bs_height_m: float
    template: CellTemplate
    channel: ChannelParams
    placement: PlacementSpec
    logistic: LogisticConfig
    tree: TreeConfig
    threshold: float
    test_fraction: float
    grid_bounds: GridBounds
    grid_steps_rssi: int
    grid_steps_rsrp_std: int


def validate_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"config root: expected an object, got {raw!r}")
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]}")
    version = raw.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {CONFIG_SCHEMA_VERSION}, "
                          f"got {version!r}")
    seed = _check_number(raw.get("seed", DEFAULT_CONFIG["seed"]), "seed",
                         minimum=0, integer=True)

    lay = _merge_section(raw.get("layout", {}), DEFAULT_CONFIG["layout"], "layout")
    rings = _check_number(lay["rings"], "layout.rings", minimum=0, integer=True)
    isd = _check_number(lay["isd_m"], "layout.isd_m", minimum=0, strict=True)
    bs_h = _check_number(lay["bs_height_m"], "layout.bs_height_m", minimum=0,
                         strict=True)
    template = CellTemplate(
        tx_power_dbm=_check_number(lay["tx_power_dbm"], "layout.tx_power_dbm",
                                   minimum=0, strict=True),
        fc_ghz=_check_number(lay["fc_ghz"], "layout.fc_ghz", minimum=0, strict=True),
        bw_hz=_check_number(lay["bw_hz"], "layout.bw_hz", minimum=0, strict=True),
        downtilt_deg=_check_number(lay["downtilt_deg"], "layout.downtilt_deg"))

    ch = _merge_section(raw.get("channel", {}), DEFAULT_CONFIG["channel"], "channel")
    channel = ChannelParams(
        shadow_sigma_los_db=_check_number(ch["shadow_sigma_los_db"],
                                          "channel.shadow_sigma_los_db", minimum=0),
        shadow_sigma_nlos_db=_check_number(ch["shadow_sigma_nlos_db"],
                                           "channel.shadow_sigma_nlos_db", minimum=0),
        indoor_penetration_db=_check_number(ch["indoor_penetration_db"],
                                            "channel.indoor_penetration_db", minimum=0),
        ue_noise_figure_db=_check_number(ch["ue_noise_figure_db"],
                                         "channel.ue_noise_figure_db", minimum=0),
        n_subcarriers=_check_number(ch["n_subcarriers"], "channel.n_subcarriers",
                                    minimum=1, integer=True))

    pl = _merge_section(raw.get("placement", {}), DEFAULT_CONFIG["placement"],
                        "placement")
    heights = pl["aerial_heights_m"]
    if not isinstance(heights, list):
        raise ConfigError(f"placement.aerial_heights_m: expected a list, "
                          f"got {heights!r}")
    for k, h in enumerate(heights):
        _check_number(h, f"placement.aerial_heights_m[{k}]", minimum=1.5,
                      strict=True)
    placement = PlacementSpec(
        indoor=_check_number(pl["indoor"], "placement.indoor", minimum=0,
                             integer=True),
        outdoor=_check_number(pl["outdoor"], "placement.outdoor", minimum=0,
                              integer=True),
        aerial_per_height=_check_number(pl["aerial_per_height"],
                                        "placement.aerial_per_height", minimum=0,
                                        integer=True),
        aerial_heights_m=tuple(float(h) for h in heights),
        min_bs_dist_m=_check_number(pl["min_bs_dist_m"], "placement.min_bs_dist_m",
                                    minimum=0))

    ml = _merge_section(raw.get("ml", {}), DEFAULT_CONFIG["ml"], "ml")
    logistic = LogisticConfig(
        learning_rate=_check_number(ml["learning_rate"], "ml.learning_rate",
                                    minimum=0, strict=True),
        max_iters=_check_number(ml["max_iters"], "ml.max_iters", minimum=1,
                                integer=True),
        tolerance=_check_number(ml["tolerance"], "ml.tolerance", minimum=0),
        l2=_check_number(ml["l2"], "ml.l2", minimum=0))
    tree = TreeConfig(
        max_depth=_check_number(ml["max_depth"], "ml.max_depth", minimum=0,
                                integer=True),
        min_leaf=_check_number(ml["min_leaf"], "ml.min_leaf", minimum=1,
                               integer=True))
    threshold = _check_number(ml["threshold"], "ml.threshold", minimum=0)
    test_fraction = _check_number(ml["test_fraction"], "ml.test_fraction")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"ml.test_fraction: must be in (0, 1), got {test_fraction}")

    gr = _merge_section(raw.get("grid", {}), DEFAULT_CONFIG["grid"], "grid")
    for key in ("rssi_min", "rssi_max", "rsrp_std_min", "rsrp_std_max"):
        _check_number(gr[key], f"grid.{key}")
    if gr["rssi_min"] >= gr["rssi_max"]:
        raise ConfigError("grid.rssi_min must be < grid.rssi_max")
    if gr["rsrp_std_min"] >= gr["rsrp_std_max"]:
        raise ConfigError("grid.rsrp_std_min must be < grid.rsrp_std_max")
    steps_rssi = _check_number(gr["steps_rssi"], "grid.steps_rssi", minimum=2,
                               integer=True)
    steps_std = _check_number(gr["steps_rsrp_std"], "grid.steps_rsrp_std",
                              minimum=2, integer=True)
    bounds = GridBounds(rsrp_std_min=float(gr["rsrp_std_min"]),
                        rsrp_std_max=float(gr["rsrp_std_max"]),
                        rssi_min=float(gr["rssi_min"]),
                        rssi_max=float(gr["rssi_max"]))

    return ExperimentConfig(seed=seed, rings=rings, isd_m=float(isd),
                            bs_height_m=float(bs_h), template=template,
                            channel=channel, placement=placement,
                            logistic=logistic, tree=tree, threshold=threshold,
                            test_fraction=test_fraction, grid_bounds=bounds,
                            grid_steps_rssi=steps_rssi,
                            grid_steps_rsrp_std=steps_std)


def load_config(path):
    """Returns (ExperimentConfig, raw dict as parsed)."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return validate_config(raw), raw


def config_sha256(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode("utf-8")).hexdigest()
