from math import log2

import numpy as np
import pytest

from droneradio.linkrate import (CODE_RATE_MAX, PEAK_OVERHEAD_DL, PEAK_OVERHEAD_UL,
                                 peak_rate_bps, spectral_efficiency, throughput_bps)


def test_se_at_zero_db():
    assert spectral_efficiency(0.0, 10.0, attenuation=1.0) == pytest.approx(1.0,
                                                                            abs=1e-12)


def test_se_cap_binds_at_high_sinr():
    assert spectral_efficiency(100.0, 4.8) == 4.8


def test_se_low_sinr_value():
    expected = log2(1.0 + 10.0 ** (-3.0))
    assert spectral_efficiency(-30.0, 10.0, attenuation=1.0) == pytest.approx(
        expected, abs=1e-9)
    assert spectral_efficiency(-30.0, 10.0, attenuation=1.0) == pytest.approx(
        0.00144, abs=2e-5)


def test_se_vanishes_at_minus_infinity():
    assert spectral_efficiency(float("-inf"), 10.0) == 0.0


def test_se_monotone_in_sinr():
    values = [spectral_efficiency(s, 7.4) for s in np.linspace(-40, 40, 200)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_se_validation():
    with pytest.raises(ValueError):
        spectral_efficiency(0.0, 0.0)
    with pytest.raises(ValueError):
        spectral_efficiency(0.0, 4.0, attenuation=0.0)
    with pytest.raises(ValueError):
        spectral_efficiency(0.0, 4.0, attenuation=1.5)


def test_throughput_reference_point():
    assert throughput_bps(0.0, 20e6, layers=1, attenuation=1.0) == pytest.approx(
        20e6, rel=1e-12)


def test_throughput_linear_in_bandwidth_and_layers():
    base = throughput_bps(5.0, 10e6)
    assert throughput_bps(5.0, 20e6) == pytest.approx(2 * base, rel=1e-12)
    capped = throughput_bps(60.0, 10e6, layers=1)
    assert throughput_bps(60.0, 10e6, layers=4) == pytest.approx(4 * capped,
                                                                 rel=1e-12)


def test_throughput_continuity_at_the_cap():
    # the cap 6*0.93 = 5.58 bps/Hz binds near sinr ~ 17.3 dB; no jumps around it
    grid = np.linspace(15.0, 20.0, 500)
    values = [throughput_bps(s, 20e6) for s in grid]
    steps = np.abs(np.diff(values))
    assert steps.max() < 20e6 * 0.02


def test_throughput_validation():
    with pytest.raises(ValueError):
        throughput_bps(0.0, 0.0)
    with pytest.raises(ValueError):
        throughput_bps(0.0, 1e6, layers=0)


@pytest.mark.parametrize("bw,layers,mod_bits,overhead,target", [
    (100e6, 4, 8, PEAK_OVERHEAD_DL, 1.3e9),    # 3.5 GHz DL
    (100e6, 2, 6, PEAK_OVERHEAD_UL, 175e6),    # 3.5 GHz UL
    (1e9, 4, 8, PEAK_OVERHEAD_DL, 13e9),       # 26 GHz DL, 4 TR
    (1e9, 2, 8, PEAK_OVERHEAD_DL, 6.5e9),      # 26 GHz DL, 2 TR
    (1e9, 2, 6, PEAK_OVERHEAD_UL, 1.75e9),     # 26 GHz UL
])
def test_peak_rate_calibration_within_25_percent(bw, layers, mod_bits, overhead,
                                                 target):
    got = peak_rate_bps(bw, layers, mod_bits, overhead)
    assert abs(got - target) / target < 0.25


def test_peak_rate_zero_bandwidth():
    assert peak_rate_bps(0.0, 4, 8, PEAK_OVERHEAD_DL) == 0.0


def test_peak_rate_formula():
    assert peak_rate_bps(100e6, 4, 8, 0.5) == pytest.approx(
        100e6 * 4 * 8 * CODE_RATE_MAX * 0.5, rel=1e-12)


def test_peak_rate_validation():
    with pytest.raises(ValueError):
        peak_rate_bps(100e6, 4, 5, 0.5)
    with pytest.raises(ValueError):
        peak_rate_bps(100e6, 4, 8, 1.0)
    with pytest.raises(ValueError):
        peak_rate_bps(-1.0, 4, 8, 0.5)
    with pytest.raises(ValueError):
        peak_rate_bps(100e6, 0, 8, 0.5)
