"""Key rate versus path length at 1% injection.

Run with ``python3 demos/distance_sweep.py [workers]``.
"""

import sys

import numpy as np

from flqkd import SystemParams, distance_sweep


def main(workers=1):
    rows = distance_sweep(SystemParams(), 0.01, np.geomspace(10, 200, 10), workers=workers)
    print(f"{'L (km)':>8} {'skr (Gb/s)':>11} {'N_S':>8} {'R (Gb/s)':>9} {'ppb_rx':>7} {'bits/mode':>10} {'limit':>7}")
    for row in rows:
        p = row.point
        print(f"{row.value:8.1f} {p.skr_lb / 1e9:11.4f} {p.N_S_opt:8.4f} {p.R_opt / 1e9:9.3f} "
              f"{p.ppb_rx:7.3f} {p.eff_per_mode:10.2e} {p.pirandola_bound:7.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
