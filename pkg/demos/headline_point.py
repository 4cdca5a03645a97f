"""Optimize the default 50 km link and print the operating point.

Run with ``python3 demos/headline_point.py``.
"""

from flqkd import SystemParams, optimize_operating_point


def main():
    point = optimize_operating_point(SystemParams(), f_E=0.01)
    print("Optimized 50 km operating point with 1% injection:")
    for key, value in point.as_dict().items():
        print(f"  {key:16s} {value}")
    print(f"\nThe key rate is {point.skr_lb / 1e9:.2f} Gbit/s, or "
          f"{point.eff_per_mode:.2e} bits per optical mode against a repeaterless "
          f"limit of {point.pirandola_bound:.3f}.")


if __name__ == "__main__":
    main()
