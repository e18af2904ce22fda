"""Kernel backend selection.

The compiled extension is used when it was built, the pure-Python module
otherwise. Both produce bit-identical results, so simulation outputs do not
depend on which backend is active; the compiled one is simply faster.
use_backend() exists for tests and benchmarks, not for configuration.
"""

from droneradio import core_py

try:
    from droneradio import _core
except ImportError:
    _core = None

_DEFAULT = _core if _core is not None else core_py
_active = _DEFAULT


def compiled_available() -> bool:
    return _core is not None


def active_backend() -> str:
    return _active.BACKEND_NAME


def use_backend(name: str) -> None:
    """Select 'pure', 'compiled', or 'auto' (compiled when built)."""
    global _active
    if name == "pure":
        _active = core_py
    elif name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not built in this install")
        _active = _core
    elif name == "auto":
        _active = _DEFAULT
    else:
        raise ValueError(f"unknown backend {name!r}; expected pure/compiled/auto")


def los_probability(d2d_m, h_ut_m):
    return _active.los_probability(d2d_m, h_ut_m)


def pathloss_db(d3d_m, fc_ghz, h_ut_m, los):
    return _active.pathloss_db(d3d_m, fc_ghz, h_ut_m, los)


def antenna_gain_dbi(azimuth_off_deg, elevation_deg, downtilt_deg):
    return _active.antenna_gain_dbi(azimuth_off_deg, elevation_deg, downtilt_deg)


def cell_rx_powers(*args, **kwargs):
    return _active.cell_rx_powers(*args, **kwargs)
