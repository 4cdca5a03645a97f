import math

import numpy as np
import pytest

from flqkd.adversary import holevo_optimum_ub
from flqkd.keyrate import (
    PR_E_MAX,
    distance_sweep,
    fe_sweep,
    holevo_sweep,
    optimize_operating_point,
    pirandola_bound,
    skr_lower_bound,
)
from flqkd.receiver import binary_entropy
from flqkd.terminals import SystemParams

PIRANDOLA_50KM = 0.152003093445049985  # -log2(0.9), mpmath


@pytest.fixture(scope="module")
def headline():
    return optimize_operating_point(SystemParams(), 0.01)


class TestSkrLowerBound:
    def test_assembly(self, params):
        pt = skr_lower_bound(params, 0.01, N_S=0.043, R=10e9)
        assert pt.skr_lb == pytest.approx(max(0.0, params.beta * pt.I_AB - pt.chi_ub))
        assert pt.ppb_rx == pytest.approx(0.86, rel=1e-12)
        assert pt.ppb_tx == pytest.approx(8.6, rel=1e-12)
        assert pt.eff_per_use == pt.skr_lb / 10e9
        assert pt.eff_per_mode == pt.skr_lb / params.W

    def test_floor(self, params):
        pt = skr_lower_bound(params, 0.5, N_S=0.3, R=10e9)
        assert pt.skr_lb == 0.0

    def test_infeasible_flag(self, params):
        pt = skr_lower_bound(params, 0.01, N_S=1e-3, R=10e9)
        assert pt.pr_e > PR_E_MAX and not pt.feasible

    def test_pirandola_value(self):
        assert pirandola_bound(0.1) == pytest.approx(PIRANDOLA_50KM, abs=1e-15)
        assert pirandola_bound(1.0) == math.inf

    def test_folding_leak_raises_chi(self, params):
        plain = skr_lower_bound(params, 0.01, N_S=0.043, R=10e9)
        folded = skr_lower_bound(params, 0.01, N_S=0.043, R=10e9, fold_leak=True)
        assert folded.chi_ub == pytest.approx(plain.chi_ub * plain.leak_ratio)


class TestOptimizer:
    def test_headline(self, headline):
        assert headline.skr_lb == pytest.approx(2e9, rel=0.2)
        assert headline.N_S_opt == pytest.approx(0.043, abs=0.015)
        assert headline.R_opt == 10e9
        assert headline.feasible and headline.status == "ok"

    def test_invariants(self, headline, params):
        assert headline.pr_e <= PR_E_MAX
        assert 0 <= headline.skr_lb <= params.beta * headline.R_opt
        assert headline.eff_per_mode < headline.pirandola_bound

    def test_per_bit_consistency(self, headline, params):
        p = params.with_signal_brightness(headline.N_S_opt)
        chi = holevo_optimum_ub(p, 0.01).per_bit
        per_bit = params.beta * (1 - binary_entropy(headline.pr_e)) - chi
        assert per_bit == pytest.approx(headline.skr_lb / headline.R_opt, rel=0, abs=1e-12)

    def test_deterministic(self, headline):
        assert optimize_operating_point(SystemParams(), 0.01) == headline

    def test_refinement_beats_grid(self, headline, params):
        for ns in np.geomspace(1e-4, 0.5, 60):
            pt = skr_lower_bound(params, 0.01, N_S=ns, R=10e9)
            if pt.feasible:
                assert headline.skr_lb >= pt.skr_lb

    def test_discrete_rates(self, params):
        pt = optimize_operating_point(params, 0.01, r_candidates=[1e9, 2e9, 5e9, 10e9])
        assert pt.R_opt in (1e9, 2e9, 5e9, 10e9)

    def test_rate_dies_at_long_distance(self, params):
        pt = optimize_operating_point(params.replace(L=400.0), 0.01)
        assert pt.skr_lb == 0 and pt.status in ("infeasible", "zero_rate")

    def test_empty_feasible_set(self, params):
        pt = optimize_operating_point(params, 1.0)
        assert pt.skr_lb == 0 and not pt.feasible and pt.status == "infeasible"


class TestSweeps:
    def test_distance(self, headline, params):
        rows = distance_sweep(params, 0.01, [25.0, 50.0, 100.0])
        rates = [r.point.skr_lb for r in rows]
        assert rates[0] >= rates[1] >= rates[2]
        assert rows[1].point == headline
        assert [r.value for r in rows] == [25.0, 50.0, 100.0]

    def test_ascending_required(self, params):
        with pytest.raises(ValueError):
            distance_sweep(params, 0.01, [50.0, 25.0])

    def test_parallel_matches_serial(self, params):
        grid = [0.0, 0.01, 0.05]
        serial = fe_sweep(params, 50.0, grid)
        parallel = fe_sweep(params, 50.0, grid, workers=3)
        assert serial == parallel

    def test_fe_monotone(self, params):
        rows = fe_sweep(params, 50.0, [0.0, 0.01, 0.1, 1.0])
        rates = [r.point.skr_lb for r in rows]
        assert rates == sorted(rates, reverse=True)
        assert rates[-1] == 0

    def test_holevo_table(self, params):
        rows = holevo_sweep(params, 50.0, 0.01, np.geomspace(1e-4, 1, 9))
        for r in rows:
            assert r.passive <= r.optimum
            assert r.active <= r.C_E
            assert all(np.isfinite([r.optimum, r.passive, r.active, r.C_E]))
