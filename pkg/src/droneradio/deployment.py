"""Hexagonal multi-site network geometry and UE drop placement.

Sites sit on a hexagonal grid around a center site at the origin; each site
carries three sectors with boresights at 0/120/240 degrees. Measured UEs are
placed only in the center serving region (a disc of radius isd/sqrt(3))
while every site transmits, which keeps the geometry simple and avoids
wrap-around bookkeeping.
"""

import enum
from dataclasses import dataclass
from math import atan2, cos, pi, sin, sqrt

from droneradio import _rng

DEFAULT_BS_HEIGHT_M = 25.0


class UeClass(enum.Enum):
    INDOOR = "indoor"
    OUTDOOR = "outdoor"
    AERIAL = "aerial"


@dataclass(frozen=True)
class CellTemplate:
    """Per-cell radio parameters shared by every sector in a layout."""
    tx_power_dbm: float = 46.0
    fc_ghz: float = 2.0
    bw_hz: float = 20e6
    downtilt_deg: float = 6.0


@dataclass(frozen=True)
class Cell:
    cell_id: int
    site_index: int
    azimuth_deg: float
    downtilt_deg: float
    tx_power_dbm: float
    fc_ghz: float
    bw_hz: float


@dataclass(frozen=True)
class NetworkLayout:
    sites: tuple          # ((x_m, y_m), ...)
    isd_m: float
    bs_height_m: float
    cells: tuple          # (Cell, ...), 3 per site, cell_id = site_index*3 + sector
    rings: int

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_cells(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class UeDrop:
    position: tuple       # (x_m, y_m, z_m)
    ue_class: UeClass
    drop_index: int

    @property
    def height_m(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class PlacementSpec:
    """Per-class drop counts; aerial drops get aerial_per_height drops at
    each listed height. min_bs_dist_m keeps drops outside a horizontal
    keep-out disc around every site so the pathloss model's 10 m validity
    floor can never be crossed."""
    indoor: int = 0
    outdoor: int = 0
    aerial_per_height: int = 0
    aerial_heights_m: tuple = ()
    min_bs_dist_m: float = 35.0


def _hex_ring_sites(ring: int, isd_m: float):
    """Axial coordinates at hex distance `ring`, ordered by angle from +x."""
    sites = []
    for q in range(-ring, ring + 1):
        for r in range(-ring, ring + 1):
            s = -q - r
            if max(abs(q), abs(r), abs(s)) != ring:
                continue
            x = isd_m * (q + 0.5 * r)
            y = isd_m * (sqrt(3.0) / 2.0 * r)
            sites.append((x, y))
    sites.sort(key=lambda p: atan2(p[1], p[0]) % (2.0 * pi))
    return sites


def build_hex_layout(rings: int, isd_m: float,
                     template: CellTemplate = CellTemplate(),
                     bs_height_m: float = DEFAULT_BS_HEIGHT_M) -> NetworkLayout:
    """Build 1 + 3*rings*(rings+1) sites, three sectors each.

    Site index increases by ring and then by angle; the center site is
    site 0 at the origin. Pure function: repeated calls are bit-identical.
    """
    if not isinstance(rings, int) or rings < 0:
        raise ValueError(f"rings must be a non-negative integer, got {rings}")
    if isd_m <= 0.0:
        raise ValueError(f"isd_m must be > 0, got {isd_m}")
    if template.tx_power_dbm <= 0.0 or template.fc_ghz <= 0.0 or template.bw_hz <= 0.0:
        raise ValueError("tx_power_dbm, fc_ghz and bw_hz must all be > 0")
    if bs_height_m <= 0.0:
        raise ValueError(f"bs_height_m must be > 0, got {bs_height_m}")

    sites = [(0.0, 0.0)]
    for ring in range(1, rings + 1):
        sites.extend(_hex_ring_sites(ring, isd_m))

    cells = []
    for site_index in range(len(sites)):
        for sector in range(3):
            cells.append(Cell(
                cell_id=site_index * 3 + sector,
                site_index=site_index,
                azimuth_deg=sector * 120.0,
                downtilt_deg=template.downtilt_deg,
                tx_power_dbm=template.tx_power_dbm,
                fc_ghz=template.fc_ghz,
                bw_hz=template.bw_hz,
            ))
    return NetworkLayout(sites=tuple(sites), isd_m=isd_m, bs_height_m=bs_height_m,
                         cells=tuple(cells), rings=rings)


def serving_region_radius_m(layout: NetworkLayout) -> float:
    """Radius of the disc approximating the center site's dominance area."""
    return layout.isd_m / sqrt(3.0)


def place_ues(layout: NetworkLayout, spec: PlacementSpec, seed: int):
    """Drop UEs uniformly over the center serving region.

    Indoor and outdoor drops sit at 1.5 m; aerial drops at each configured
    height. Deterministic for a fixed seed, with drop_index dense from 0 and
    randomness keyed per drop so evaluation order does not matter.
    """
    if layout.n_sites == 0:
        raise ValueError("layout has no sites")
    if spec.indoor < 0 or spec.outdoor < 0 or spec.aerial_per_height < 0:
        raise ValueError("drop counts must be >= 0")
    for h in spec.aerial_heights_m:
        if h <= 1.5:
            raise ValueError(f"aerial heights must be > 1.5 m, got {h}")

    radius = serving_region_radius_m(layout)
    min_dist = spec.min_bs_dist_m
    if min_dist < 0.0 or min_dist >= radius:
        raise ValueError(
            f"min_bs_dist_m must be in [0, {radius}) for this layout, got {min_dist}")
    plan = [(UeClass.INDOOR, 1.5)] * spec.indoor + [(UeClass.OUTDOOR, 1.5)] * spec.outdoor
    for h in spec.aerial_heights_m:
        plan.extend([(UeClass.AERIAL, float(h))] * spec.aerial_per_height)

    drops = []
    for drop_index, (ue_class, z) in enumerate(plan):
        stream = _rng.Stream(_rng.stream_key(seed, "deployment.place", drop_index))
        for _ in range(1000):
            r = radius * sqrt(stream.uniform())
            theta = 2.0 * pi * stream.uniform()
            x, y = r * cos(theta), r * sin(theta)
            if all((x - sx) * (x - sx) + (y - sy) * (y - sy) >= min_dist * min_dist
                   for sx, sy in layout.sites):
                break
        else:
            raise ValueError("could not place a drop outside the site keep-out "
                             "discs; min_bs_dist_m too large for the layout")
        drops.append(UeDrop(position=(x, y, z), ue_class=ue_class,
                            drop_index=drop_index))
    return drops


LAYOUT_CSV_HEADER = ["cell_id", "site_index", "site_x_m", "site_y_m",
                     "azimuth_deg", "downtilt_deg", "tx_power_dbm", "fc_ghz", "bw_hz"]


def layout_csv_rows(layout: NetworkLayout):
    """One row per cell in cell_id order, matching LAYOUT_CSV_HEADER."""
    rows = []
    for cell in layout.cells:
        x, y = layout.sites[cell.site_index]
        rows.append([cell.cell_id, cell.site_index, x, y, cell.azimuth_deg,
                     cell.downtilt_deg, cell.tx_power_dbm, cell.fc_ghz, cell.bw_hz])
    return rows
