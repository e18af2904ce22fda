"""Per-UE radio measurements: RSRP per cell, wideband RSSI, serving SINR.

The per-cell coupling (pathloss, LOS coin, antenna gain, shadowing) runs in
the kernel backend (compiled or pure, bit-identical). This module assembles
the kernel output into RadioSample records: cells sorted by descending RSRP
with ties broken by ascending cell_id, RSSI as the linear-domain sum of all
cell powers plus thermal noise, and full-buffer wideband SINR where every
non-serving cell interferes.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import log10

import numpy as np

from droneradio import _rng, core
from droneradio.deployment import NetworkLayout, UeClass, UeDrop

_COUPLING_STAGE = "radio.coupling"


@dataclass(frozen=True)
class ChannelParams:
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 6.0
    indoor_penetration_db: float = 20.0
    ue_noise_figure_db: float = 9.0
    n_subcarriers: int = 1200  # RSRP normalization divisor (100 RB x 12)

    def __post_init__(self):
        if self.shadow_sigma_los_db < 0.0 or self.shadow_sigma_nlos_db < 0.0:
            raise ValueError("shadowing sigmas must be >= 0")
        if self.n_subcarriers <= 0:
            raise ValueError(f"n_subcarriers must be > 0, got {self.n_subcarriers}")


@dataclass(frozen=True)
class PerCellMeasurement:
    cell_id: int
    rsrp_dbm: float
    rx_power_dbm: float  # wideband
    los: bool


@dataclass(frozen=True)
class RadioSample:
    drop: UeDrop
    cells: tuple          # PerCellMeasurement, sorted by descending RSRP
    rssi_dbm: float
    serving_cell_id: int
    sinr_db: float


def noise_power_dbm(bw_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise floor over the bandwidth, in dBm."""
    if bw_hz <= 0.0:
        raise ValueError(f"bw_hz must be > 0, got {bw_hz}")
    return -174.0 + 10.0 * log10(bw_hz) + noise_figure_db


def combine_power_dbm(levels_dbm, noise_dbm=None) -> float:
    """Total power of independent dBm components (plus an optional noise
    term), i.e. the RSSI aggregation rule."""
    total = sum(10.0 ** (v / 10.0) for v in levels_dbm)
    if noise_dbm is not None:
        total += 10.0 ** (noise_dbm / 10.0)
    return 10.0 * log10(total)


def _layout_arrays(layout: NetworkLayout):
    n = layout.n_cells
    site_x = np.empty(n)
    site_y = np.empty(n)
    azimuth = np.empty(n)
    downtilt = np.empty(n)
    tx = np.empty(n)
    for i, cell in enumerate(layout.cells):
        if cell.cell_id != i:
            raise ValueError("layout cells must be dense in cell_id order")
        x, y = layout.sites[cell.site_index]
        site_x[i] = x
        site_y[i] = y
        azimuth[i] = cell.azimuth_deg
        downtilt[i] = cell.downtilt_deg
        tx[i] = cell.tx_power_dbm
    return site_x, site_y, azimuth, downtilt, tx


def _assemble(drop, rx, los_flags, noise_dbm, rsrp_offset_db) -> RadioSample:
    n = len(rx)
    rsrp = [rx[i] - rsrp_offset_db for i in range(n)]
    order = sorted(range(n), key=lambda i: (-rsrp[i], i))
    cells = tuple(
        PerCellMeasurement(cell_id=i, rsrp_dbm=rsrp[i], rx_power_dbm=float(rx[i]),
                           los=bool(los_flags[i]))
        for i in order)
    linear = [10.0 ** (float(rx[i]) / 10.0) for i in range(n)]
    noise_lin = 10.0 ** (noise_dbm / 10.0)
    rssi = 10.0 * log10(sum(linear) + noise_lin)
    serving = order[0]
    interference = sum(linear[i] for i in range(n) if i != serving)
    sinr = 10.0 * log10(linear[serving] / (interference + noise_lin))
    return RadioSample(drop=drop, cells=cells, rssi_dbm=rssi,
                       serving_cell_id=serving, sinr_db=sinr)


def compute_samples(layout: NetworkLayout, drops, params: ChannelParams,
                    seed: int, threads: int = 1):
    """RadioSample for each drop, ordered like the input.

    Randomness is keyed per (seed, drop_index, cell_id), so thread count and
    evaluation order never change the result.
    """
    if layout.n_cells == 0:
        raise ValueError("layout has no cells")
    fc = layout.cells[0].fc_ghz
    bw = layout.cells[0].bw_hz
    for cell in layout.cells:
        if cell.fc_ghz != fc or cell.bw_hz != bw:
            raise ValueError("all cells in a layout must share fc_ghz and bw_hz")
    arrays = _layout_arrays(layout)
    noise = noise_power_dbm(bw, params.ue_noise_figure_db)
    rsrp_offset = 10.0 * log10(params.n_subcarriers)

    def run_chunk(chunk):
        site_x, site_y, azimuth, downtilt, tx = arrays
        n = layout.n_cells
        rx = np.empty(n)
        los = np.empty(n, dtype=np.uint8)
        out = []
        for drop in chunk:
            x, y, z = drop.position
            base = _rng.stream_key(seed, _COUPLING_STAGE, drop.drop_index)
            core.cell_rx_powers(x, y, z, drop.ue_class is UeClass.INDOOR,
                                site_x, site_y, azimuth, downtilt, tx,
                                fc, layout.bs_height_m,
                                params.shadow_sigma_los_db,
                                params.shadow_sigma_nlos_db,
                                params.indoor_penetration_db,
                                base, rx, los)
            out.append(_assemble(drop, rx, los, noise, rsrp_offset))
        return out

    drops = list(drops)
    if threads <= 1 or len(drops) <= 1:
        return run_chunk(drops)
    size = (len(drops) + threads - 1) // threads
    chunks = [drops[i:i + size] for i in range(0, len(drops), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run_chunk, chunks))
    return [sample for chunk in results for sample in chunk]


def compute_sample(layout: NetworkLayout, drop: UeDrop, params: ChannelParams,
                   seed: int) -> RadioSample:
    return compute_samples(layout, [drop], params, seed)[0]


def strong_cell_count(sample: RadioSample, margin_db: float = 6.0) -> int:
    """Number of cells within margin_db of the strongest RSRP (serving
    included); a proxy for how crowded the interference picture is."""
    top = sample.cells[0].rsrp_dbm
    return sum(1 for c in sample.cells if c.rsrp_dbm >= top - margin_db)


SAMPLES_CSV_HEADER = (["drop_index", "ue_class", "height_m", "serving_cell_id",
                       "sinr_db", "rssi_dbm"] + [f"rsrp_{k}" for k in range(1, 9)])


def samples_csv_rows(samples):
    """One row per sample; rsrp_1..rsrp_8 are the strongest cells' RSRPs in
    descending order, blank when fewer than 8 cells exist."""
    rows = []
    for s in samples:
        rsrps = [c.rsrp_dbm for c in s.cells[:8]]
        rsrps += [""] * (8 - len(rsrps))
        rows.append([s.drop.drop_index, s.drop.ue_class.value, s.drop.height_m,
                     s.serving_cell_id, s.sinr_db, s.rssi_dbm] + rsrps)
    return rows
