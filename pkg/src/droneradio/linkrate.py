"""SINR-to-throughput mapping and an analytic single-user peak-rate estimate.

The link abstraction is truncated Shannon: capped, attenuated log2(1+SNR).
The peak-rate estimator multiplies bandwidth, layers, modulation bits and a
maximum code rate, then removes a direction-dependent overhead fraction.
The calibrated constant set (CODE_RATE_MAX, PEAK_OVERHEAD_DL,
PEAK_OVERHEAD_UL) folds duplexing duty cycle and control overhead into one
per-direction number; it is a documented fit against the reference 5G rate
table, not a derivation.
"""

from math import log2

SE_ATTENUATION_DEFAULT = 0.75
CODE_RATE_MAX = 0.93
PEAK_OVERHEAD_DL = 0.56
PEAK_OVERHEAD_UL = 0.84


def spectral_efficiency(sinr_db: float, se_max_bps_hz: float,
                        attenuation: float = SE_ATTENUATION_DEFAULT) -> float:
    """min(cap, attenuation * log2(1 + snr)); 0 as sinr_db -> -inf."""
    if se_max_bps_hz <= 0.0:
        raise ValueError(f"se_max_bps_hz must be > 0, got {se_max_bps_hz}")
    if not 0.0 < attenuation <= 1.0:
        raise ValueError(f"attenuation must be in (0, 1], got {attenuation}")
    se = attenuation * log2(1.0 + 10.0 ** (sinr_db / 10.0))
    return min(se_max_bps_hz, se)


def throughput_bps(sinr_db: float, bw_hz: float, layers: int = 1,
                   mod_bits: int = 6, code_rate_max: float = CODE_RATE_MAX,
                   attenuation: float = SE_ATTENUATION_DEFAULT) -> float:
    """layers x bandwidth x spectral efficiency, with the per-layer SE cap
    mod_bits * code_rate_max."""
    if bw_hz <= 0.0:
        raise ValueError(f"bw_hz must be > 0, got {bw_hz}")
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    se_cap = mod_bits * code_rate_max
    return layers * bw_hz * spectral_efficiency(sinr_db, se_cap, attenuation)


def peak_rate_bps(bw_hz: float, layers: int, mod_bits: int,
                  overhead_fraction: float) -> float:
    """Single-user peak rate; pass PEAK_OVERHEAD_DL or PEAK_OVERHEAD_UL (or a
    custom overhead) depending on direction."""
    if mod_bits not in (2, 4, 6, 8):
        raise ValueError(f"mod_bits must be one of 2/4/6/8, got {mod_bits}")
    if not 0.0 <= overhead_fraction < 1.0:
        raise ValueError(
            f"overhead_fraction must be in [0, 1), got {overhead_fraction}")
    if bw_hz < 0.0:
        raise ValueError(f"bw_hz must be >= 0, got {bw_hz}")
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    return bw_hz * layers * mod_bits * CODE_RATE_MAX * (1.0 - overhead_fraction)
