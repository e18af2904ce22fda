#!/usr/bin/env python3
"""Benchmark the per-drop coupling kernel: compiled extension vs pure Python.

The coupling loop (LOS coin, pathloss, antenna gain, shadowing per cell) is
the simulator's hot path; everything else is assembly and bookkeeping.

Usage: python benchmarks/bench_coupling.py [--drops N] [--rings R]
"""

import argparse
import time

import numpy as np

from droneradio import _rng, core, core_py
from droneradio.deployment import PlacementSpec, build_hex_layout, place_ues
from droneradio.features import generate_dataset
from droneradio.radio import ChannelParams


def bench_kernel(kernel, layout, drops, params):
    site_x = np.array([layout.sites[c.site_index][0] for c in layout.cells])
    site_y = np.array([layout.sites[c.site_index][1] for c in layout.cells])
    azimuth = np.array([c.azimuth_deg for c in layout.cells])
    downtilt = np.array([c.downtilt_deg for c in layout.cells])
    tx = np.array([c.tx_power_dbm for c in layout.cells])
    n = layout.n_cells
    rx = np.empty(n)
    los = np.empty(n, dtype=np.uint8)
    start = time.perf_counter()
    for drop in drops:
        x, y, z = drop.position
        key = _rng.stream_key(0, "radio.coupling", drop.drop_index)
        kernel(x, y, z, False, site_x, site_y, azimuth, downtilt, tx,
               2.0, layout.bs_height_m, params.shadow_sigma_los_db,
               params.shadow_sigma_nlos_db, params.indoor_penetration_db,
               key, rx, los)
    return time.perf_counter() - start


def bench_pipeline(backend, layout, spec, params):
    core.use_backend(backend)
    start = time.perf_counter()
    generate_dataset(layout, spec, params, seed=0)
    elapsed = time.perf_counter() - start
    core.use_backend("auto")
    return elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--drops", type=int, default=3000)
    parser.add_argument("--rings", type=int, default=2)
    args = parser.parse_args()

    layout = build_hex_layout(args.rings, 500.0)
    params = ChannelParams()
    per_height = max(args.drops // 6, 1)
    spec = PlacementSpec(indoor=per_height, outdoor=per_height,
                         aerial_per_height=per_height,
                         aerial_heights_m=(15.0, 60.0, 100.0, 300.0))
    drops = place_ues(layout, PlacementSpec(
        outdoor=args.drops, aerial_per_height=0), seed=0)
    pairs = len(drops) * layout.n_cells

    print(f"layout: {layout.n_sites} sites / {layout.n_cells} cells, "
          f"{len(drops)} drops, {pairs} UE-cell pairs")

    t_pure = bench_kernel(core_py.cell_rx_powers, layout, drops, params)
    print(f"kernel  pure      {t_pure * 1e3 :9.1f} ms   "
          f"{pairs / t_pure / 1e6:6.2f} Mpairs/s")
    if core.compiled_available():
        from droneradio import _core
        t_comp = bench_kernel(_core.cell_rx_powers, layout, drops, params)
        print(f"kernel  compiled  {t_comp * 1e3 :9.1f} ms   "
              f"{pairs / t_comp / 1e6:6.2f} Mpairs/s   "
              f"speedup x{t_pure / t_comp:.1f}")
    else:
        print("kernel  compiled  (not built)")

    t_pure = bench_pipeline("pure", layout, spec, params)
    n_samples = spec.indoor + spec.outdoor + spec.aerial_per_height * 4
    print(f"dataset pure      {t_pure * 1e3 :9.1f} ms   "
          f"({n_samples} samples end to end)")
    if core.compiled_available():
        t_comp = bench_pipeline("compiled", layout, spec, params)
        print(f"dataset compiled  {t_comp * 1e3 :9.1f} ms   "
              f"speedup x{t_pure / t_comp:.1f}")


if __name__ == "__main__":
    main()
