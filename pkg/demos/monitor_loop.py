"""Estimate Eve's injection fraction from coincidence counts.

The analytic rates return the true f_E exactly; a simulated run with about
one million idler detections recovers it within its standard error.
Run with ``python3 demos/monitor_loop.py``.
"""

from flqkd import SystemParams, expected_rates, simulate_events
from flqkd.monitor import duration_for_idler_counts


def main():
    params = SystemParams().with_signal_brightness(0.043)
    duration = duration_for_idler_counts(params, 1e6)
    print(f"Simulated window {duration * 1e6:.1f} us per run")
    print(f"{'f_E':>6} {'analytic':>10} {'simulated':>10} {'std err':>9}")
    for seed, f_E in enumerate((0.0, 0.01, 0.1, 0.5)):
        exact = expected_rates(params, f_E).f_E_hat
        sim = simulate_events(params, f_E, duration, seed)
        print(f"{f_E:6.2f} {exact:10.5f} {sim.f_E_hat:10.5f} {sim.f_E_hat_err:9.5f}")


if __name__ == "__main__":
    main()
