# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled radio kernels.

Mirrors core_py.py operation for operation (same expression order, same
libm calls, same SplitMix64 stream arithmetic) so both backends produce
bit-identical numbers; keep the two in lockstep when editing either.
"""

from libc.math cimport M_PI, atan2, cos, exp, log, log10, sqrt

BACKEND_NAME = "compiled"

cdef double _RAD2DEG = 180.0 / M_PI
cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 2.0 * M_PI
cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline unsigned long long _mix(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline unsigned long long _derive(unsigned long long key,
                                       unsigned long long index) noexcept nogil:
    return _mix(key + (index + 1ULL) * _GAMMA)


cdef inline double _stream_uniform(unsigned long long *state) noexcept nogil:
    state[0] = state[0] + _GAMMA
    return <double>(_mix(state[0]) >> 11) * _INV_2_53


cdef inline double _stream_normal(unsigned long long *state) noexcept nogil:
    cdef double u1, u2
    state[0] = state[0] + _GAMMA
    u1 = (<double>(_mix(state[0]) >> 11) + 0.5) * _INV_2_53
    state[0] = state[0] + _GAMMA
    u2 = <double>(_mix(state[0]) >> 11) * _INV_2_53
    return sqrt(-2.0 * log(u1)) * cos(_TWO_PI * u2)


cdef double _los_probability(double d2d_m, double h_ut_m) noexcept nogil:
    cdef double r, p1, d1
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


cdef double _pathloss_db(double d3d_m, double fc_ghz, double h_ut_m,
                         bint los) noexcept nogil:
    cdef double pl_los, pl
    pl_los = 28.0 + 22.0 * log10(d3d_m) + 20.0 * log10(fc_ghz)
    if los:
        return pl_los
    if h_ut_m <= 22.5:
        pl = 13.54 + 39.08 * log10(d3d_m) + 20.0 * log10(fc_ghz) - 0.6 * (h_ut_m - 1.5)
    else:
        pl = -17.5 + (46.0 - 7.0 * log10(h_ut_m)) * log10(d3d_m) \
            + 20.0 * log10(40.0 * M_PI * fc_ghz / 3.0)
    if pl < pl_los:
        pl = pl_los
    return pl


cdef double _antenna_gain_dbi(double azimuth_off_deg, double elevation_deg,
                              double downtilt_deg) noexcept nogil:
    cdef double t, a_h, a_v, a
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


def los_probability(double d2d_m, double h_ut_m):
    if h_ut_m < 1.5:
        raise ValueError(f"h_ut_m must be >= 1.5 m, got {h_ut_m}")
    if d2d_m < 0.0:
        raise ValueError(f"d2d_m must be >= 0 m, got {d2d_m}")
    return _los_probability(d2d_m, h_ut_m)


def pathloss_db(double d3d_m, double fc_ghz, double h_ut_m, bint los):
    if d3d_m < 10.0:
        raise ValueError(f"d3d_m must be >= 10 m (model validity floor), got {d3d_m}")
    if fc_ghz <= 0.0:
        raise ValueError(f"fc_ghz must be > 0, got {fc_ghz}")
    if h_ut_m < 1.5:
        raise ValueError(f"h_ut_m must be >= 1.5 m, got {h_ut_m}")
    return _pathloss_db(d3d_m, fc_ghz, h_ut_m, los)


def antenna_gain_dbi(double azimuth_off_deg, double elevation_deg,
                     double downtilt_deg):
    return _antenna_gain_dbi(azimuth_off_deg, elevation_deg, downtilt_deg)


def cell_rx_powers(double ue_x, double ue_y, double ue_z, bint indoor,
                   double[::1] site_x, double[::1] site_y,
                   double[::1] azimuth_deg, double[::1] downtilt_deg,
                   double[::1] tx_power_dbm,
                   double fc_ghz, double bs_height_m,
                   double sigma_los_db, double sigma_nlos_db,
                   double penetration_db,
                   unsigned long long pair_key,
                   double[::1] out_rx_dbm, unsigned char[::1] out_los):
    """Compiled counterpart of core_py.cell_rx_powers; see there for docs."""
    cdef Py_ssize_t n = site_x.shape[0]
    cdef Py_ssize_t i, bad = -1
    cdef unsigned long long state
    cdef double dx, dy, dz, d2sq, d2d, d3d, bad_d3d = 0.0
    cdef double p, u, shadow, pl, az, elev, g, rx
    cdef bint los
    if ue_z < 1.5:
        raise ValueError(f"ue_z must be >= 1.5 m, got {ue_z}")
    if fc_ghz <= 0.0:
        raise ValueError(f"fc_ghz must be > 0, got {fc_ghz}")
    with nogil:
        for i in range(n):
            dx = ue_x - site_x[i]
            dy = ue_y - site_y[i]
            dz = ue_z - bs_height_m
            d2sq = dx * dx + dy * dy
            d2d = sqrt(d2sq)
            d3d = sqrt(d2sq + dz * dz)
            if d3d < 10.0:
                bad = i
                bad_d3d = d3d
                break
            state = _derive(pair_key, <unsigned long long>i)
            if indoor:
                los = 0
            else:
                p = _los_probability(d2d, ue_z)
                u = _stream_uniform(&state)
                los = u < p
            shadow = _stream_normal(&state) * (sigma_los_db if los else sigma_nlos_db)
            pl = _pathloss_db(d3d, fc_ghz, ue_z, los)
            az = atan2(dy, dx) * _RAD2DEG - azimuth_deg[i]
            while az > 180.0:
                az -= 360.0
            while az < -180.0:
                az += 360.0
            elev = atan2(bs_height_m - ue_z, d2d) * _RAD2DEG
            g = _antenna_gain_dbi(az, elev, downtilt_deg[i])
            rx = tx_power_dbm[i] + g - pl - shadow
            if indoor:
                rx -= penetration_db
            out_rx_dbm[i] = rx
            out_los[i] = 1 if los else 0
    if bad >= 0:
        raise ValueError(
            f"d3d_m must be >= 10 m (model validity floor), got {bad_d3d} at cell {bad}")
