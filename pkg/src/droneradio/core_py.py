"""Pure-Python radio kernels (reference implementation and fallback).

These are the hot inner-loop functions: line-of-sight probability, pathloss,
sector antenna gain, and the per-cell coupling loop that combines them with
per-(drop, cell) shadowing draws. The compiled module mirrors this file
operation for operation so both backends produce bit-identical numbers;
keep the two in lockstep when editing either.

Height regimes: terminals at h <= 22.5 m follow the ground urban-macro
forms, 22.5 m < h <= 300 m the aerial forms, and anything at h >= 100 m is
treated as line-of-sight with probability one.
"""

from math import atan2, exp, log10, pi, sqrt

from droneradio import _rng

_RAD2DEG = 180.0 / pi

BACKEND_NAME = "pure"


def los_probability(d2d_m: float, h_ut_m: float) -> float:
    """Probability that the terminal sees the site in line of sight.

    Monotone non-increasing in the ground distance; 1.0 at or above 100 m.
    """
    if h_ut_m < 1.5:
        raise ValueError(f"h_ut_m must be >= 1.5 m, got {h_ut_m}")
    if d2d_m < 0.0:
        raise ValueError(f"d2d_m must be >= 0 m, got {d2d_m}")
    if h_ut_m >= 100.0:
        return 1.0
    if h_ut_m <= 22.5:
        if d2d_m <= 18.0:
            return 1.0
        r = 18.0 / d2d_m
        return r + exp(-d2d_m / 63.0) * (1.0 - r)
    p1 = 4300.0 * log10(h_ut_m) - 3800.0
    d1 = 460.0 * log10(h_ut_m) - 700.0
    if d1 < 18.0:
        d1 = 18.0
    if d2d_m <= d1:
        return 1.0
    r = d1 / d2d_m
    return r + exp(-d2d_m / p1) * (1.0 - r)


def pathloss_db(d3d_m: float, fc_ghz: float, h_ut_m: float, los: bool) -> float:
    """Urban-macro pathloss in dB; the NLOS branch is clamped to never fall
    below the LOS value at the same geometry."""
    if d3d_m < 10.0:
        raise ValueError(f"d3d_m must be >= 10 m (model validity floor), got {d3d_m}")
    if fc_ghz <= 0.0:
        raise ValueError(f"fc_ghz must be > 0, got {fc_ghz}")
    if h_ut_m < 1.5:
        raise ValueError(f"h_ut_m must be >= 1.5 m, got {h_ut_m}")
    pl_los = 28.0 + 22.0 * log10(d3d_m) + 20.0 * log10(fc_ghz)
    if los:
        return pl_los
    if h_ut_m <= 22.5:
        pl = 13.54 + 39.08 * log10(d3d_m) + 20.0 * log10(fc_ghz) - 0.6 * (h_ut_m - 1.5)
    else:
        pl = -17.5 + (46.0 - 7.0 * log10(h_ut_m)) * log10(d3d_m) \
            + 20.0 * log10(40.0 * pi * fc_ghz / 3.0)
    if pl < pl_los:
        pl = pl_los
    return pl


def antenna_gain_dbi(azimuth_off_deg: float, elevation_deg: float,
                     downtilt_deg: float) -> float:
    """Sectorized 3D pattern: 8 dBi boresight, 30 dB floor.

    azimuth_off_deg is the offset from boresight in [-180, 180];
    elevation_deg is the depression angle from the antenna's horizon
    (positive looking down).
    """
    t = azimuth_off_deg / 65.0
    a_h = 12.0 * t * t
    if a_h > 30.0:
        a_h = 30.0
    t = (elevation_deg - downtilt_deg) / 10.0
    a_v = 12.0 * t * t
    if a_v > 30.0:
        a_v = 30.0
    a = a_h + a_v
    if a > 30.0:
        a = 30.0
    return 8.0 - a


def cell_rx_powers(ue_x, ue_y, ue_z, indoor,
                   site_x, site_y, azimuth_deg, downtilt_deg, tx_power_dbm,
                   fc_ghz, bs_height_m,
                   sigma_los_db, sigma_nlos_db, penetration_db,
                   pair_key, out_rx_dbm, out_los):
    """Wideband receive power from every cell for one terminal drop.

    Per cell: the LOS state is a seeded coin against los_probability, the
    shadowing draw is log-normal, and indoor drops are forced NLOS with the
    penetration loss applied. Randomness is keyed by (pair_key, cell index)
    so results do not depend on evaluation order. Writes dBm into out_rx_dbm
    and 0/1 flags into out_los.
    """
    if ue_z < 1.5:
        raise ValueError(f"ue_z must be >= 1.5 m, got {ue_z}")
    if fc_ghz <= 0.0:
        raise ValueError(f"fc_ghz must be > 0, got {fc_ghz}")
    n = len(site_x)
    for i in range(n):
        dx = ue_x - site_x[i]
        dy = ue_y - site_y[i]
        dz = ue_z - bs_height_m
        d2sq = dx * dx + dy * dy
        d2d = sqrt(d2sq)
        d3d = sqrt(d2sq + dz * dz)
        if d3d < 10.0:
            raise ValueError(
                f"d3d_m must be >= 10 m (model validity floor), got {d3d} at cell {i}")
        stream = _rng.Stream(_rng.derive(pair_key, i))
        if indoor:
            los = False
        else:
            p = los_probability(d2d, ue_z)
            los = stream.uniform() < p
        shadow = stream.normal() * (sigma_los_db if los else sigma_nlos_db)
        pl = pathloss_db(d3d, fc_ghz, ue_z, los)
        az = atan2(dy, dx) * _RAD2DEG - azimuth_deg[i]
        while az > 180.0:
            az -= 360.0
        while az < -180.0:
            az += 360.0
        elev = atan2(bs_height_m - ue_z, d2d) * _RAD2DEG
        g = antenna_gain_dbi(az, elev, downtilt_deg[i])
        rx = tx_power_dbm[i] + g - pl - shadow
        if indoor:
            rx -= penetration_db
        out_rx_dbm[i] = rx
        out_los[i] = 1 if los else 0
