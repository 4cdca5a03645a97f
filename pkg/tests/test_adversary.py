import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from flqkd.adversary import (
    HALF_PI,
    BoundMethod,
    InfeasibleAttackError,
    active_covariance,
    attack_from_angles,
    conditional_covariances,
    entanglement_assisted_capacity,
    eve_spdc_brightness,
    holevo_active_ub,
    holevo_asymptotic_ub,
    holevo_optimum_ub,
    monitor_leak_ratio,
    monitor_no_click_brightness,
    optimum_attack,
    passive_ub,
    verify_optimum_angles,
)
from flqkd.gaussian_core import symplectic_eigenvalues, thermal_entropy
from flqkd.terminals import RegimeWarning, SystemParams

# 200 * 0.01 * 0.1 * log2(11), mpmath
ASYMPTOTIC_PASSIVE_EXAMPLE = 0.691886323727459490
# 4.3e-5 / 0.901, mpmath
N_E_EXAMPLE = 4.77247502774694784e-5


def feasible_attacks():
    @st.composite
    def build(draw):
        f_E = draw(st.floats(0, 0.99))
        kS = draw(st.floats(1e-3, 1))
        N_S = draw(st.floats(1e-4, 1))
        cos_max = min(1.0, math.sqrt(f_E * N_S / (1 - f_E)))
        gamma = draw(st.floats(math.acos(cos_max), HALF_PI))
        delta = draw(st.floats(0, HALF_PI))
        return attack_from_angles(f_E, gamma, delta, kS, N_S)
    return build()


class TestAttackParams:
    def test_optimum_corner(self):
        a = optimum_attack(0.01, 0.1, 0.043)
        assert a.v0_mag == 0
        assert a.u0_mag == pytest.approx(math.sqrt(0.099))
        assert a.v_norm_sq == pytest.approx(4.3e-5, rel=1e-12)
        assert a.vu_inner_mag == 0

    def test_u_norm(self):
        # 4.3e-5 + 1 - 0.99 * 0.1
        assert optimum_attack(0.01, 0.1, 0.043).u_norm_sq == pytest.approx(0.901043, rel=1e-12)

    def test_passive_forces_corner(self):
        a = optimum_attack(0.0, 0.1, 0.05)
        assert a.v_norm_sq == 0
        with pytest.raises(InfeasibleAttackError):
            attack_from_angles(0.0, 1.0, HALF_PI, 0.1, 0.05)

    def test_outside_cone(self):
        with pytest.raises(InfeasibleAttackError):
            attack_from_angles(0.01, 0.0, HALF_PI, 0.1, 0.043)

    @given(feasible_attacks())
    def test_constraints_hold(self, a):
        assert max(abs(r) for r in a.constraint_residuals()) < 1e-9
        assert a.vu_inner_mag <= math.sqrt(a.v_norm_sq * a.u_norm_sq) + 1e-15

    @given(feasible_attacks(), st.floats(1, 1e6))
    def test_covariances_physical(self, a, G):
        p = SystemParams(G_B=G, N_B=G)
        for cov in conditional_covariances(a, p):
            assert symplectic_eigenvalues(cov)[-1] >= 0.25 - 1e-9


class TestEveBrightness:
    def test_zero(self):
        assert eve_spdc_brightness(0.0, 0.1, 0.1) == 0

    def test_full_injection(self):
        assert eve_spdc_brightness(1.0, 0.5, 0.1) == pytest.approx(0.05)

    def test_design_point(self):
        assert eve_spdc_brightness(0.01, 0.1, 0.043) == pytest.approx(N_E_EXAMPLE, rel=1e-12)

    def test_lossless_channel(self):
        with pytest.raises(InfeasibleAttackError):
            eve_spdc_brightness(0.0, 1.0, 0.1)


class TestConditionalCovariances:
    def test_passive_cross_block(self, params):
        N_S, kS = 0.05, params.kappa_S
        lam_is, _, _ = conditional_covariances(optimum_attack(0.0, kS, N_S), params)
        expected = 2 * math.sqrt(N_S * (N_S + 1)) * math.sqrt(kS) * np.diag([1.0, -1.0]) / 4
        assert np.allclose(lam_is.block(0, 1), expected, rtol=1e-12)

    def test_dark_input(self, params):
        lam_is, _, _ = conditional_covariances(optimum_attack(0.01, 0.1, 0.0), params)
        assert symplectic_eigenvalues(lam_is) == pytest.approx([0.25, 0.25], abs=1e-12)

    def test_bob_output_thermal_at_optimum(self, params):
        kS, N_S, G = params.kappa_S, 0.043, params.G_B
        _, _, lam_b = conditional_covariances(optimum_attack(0.01, kS, N_S), params)
        expected = (-1 + 2 * G * (kS * N_S + 1)) / 4
        assert np.allclose(lam_b.matrix, expected * np.eye(2), rtol=1e-12)


class TestOptimumBound:
    def test_dark(self, params):
        assert holevo_optimum_ub(params, 0.01, 0.0).per_bit == 0

    def test_design_point_range(self, params):
        b = holevo_optimum_ub(params, 0.01, 0.043)
        assert 0.25 <= b.per_bit <= 0.85
        assert b.method is BoundMethod.EXACT
        assert b.per_mode == pytest.approx(b.per_bit / params.M)

    def test_weak_passive_matches_asymptotic(self, params, quiet):
        exact = holevo_optimum_ub(params, 0.0, 1e-6).per_bit
        asym = holevo_asymptotic_ub(params, 0.0, 1e-6).per_bit
        assert exact < 1e-8
        assert exact == pytest.approx(asym, rel=0.15)

    def test_monotone_in_fE(self, params):
        vals = [holevo_optimum_ub(params, f, 0.043).per_mode_uncapped for f in np.linspace(0, 0.1, 10)]
        assert np.all(np.diff(vals) >= 0)

    def test_cap(self, params):
        b = holevo_optimum_ub(params, 0.1, 0.3)
        assert b.capped and b.per_bit == 1.0

    def test_rate(self, params):
        b = holevo_optimum_ub(params, 0.01, 0.043)
        assert b.rate == pytest.approx(params.R * b.per_bit)


class TestAsymptoticBound:
    def test_passive_example(self):
        p = SystemParams(kappa_S_override=0.1)
        assert holevo_asymptotic_ub(p, 0.0, 0.1).per_bit == pytest.approx(
            ASYMPTOTIC_PASSIVE_EXAMPLE, rel=1e-12)

    def test_full_injection_dark_limit(self, params):
        vals = [holevo_asymptotic_ub(params, 1.0, ns).per_bit for ns in (1e-4, 1e-6, 1e-8)]
        assert vals[0] > vals[1] > vals[2]

    def test_warns_outside_regime(self):
        with pytest.warns(RegimeWarning):
            holevo_asymptotic_ub(SystemParams(kappa_S_override=0.5), 0.01, 0.01)

    @pytest.mark.parametrize("kS", [0.01, 0.05, 0.1])
    @pytest.mark.parametrize("f_E", [0.0, 0.01, 0.1])
    def test_agrees_with_exact(self, kS, f_E):
        p = SystemParams(kappa_S_override=kS)
        for N_S in np.geomspace(0.01, 0.1, 5):
            exact = holevo_optimum_ub(p, f_E, N_S).per_mode_uncapped
            asym = holevo_asymptotic_ub(p, f_E, N_S).per_mode_uncapped
            assert abs(exact - asym) / exact <= 0.15


class TestOptimumAngles:
    def test_design_point(self, params):
        g, d = verify_optimum_angles(params, 0.01, 0.043, grid_points=16)
        assert g == pytest.approx(HALF_PI, abs=1e-3)
        assert d == pytest.approx(HALF_PI, abs=1e-3)

    def test_passive_single_point(self, params):
        g, _ = verify_optimum_angles(params, 0.0, 0.043, grid_points=8)
        assert g == HALF_PI


class TestPassiveAndActive:
    def test_passive_dark(self, params):
        assert passive_ub(params, 0.0).per_bit == 0

    def test_passive_quadratic_scaling(self, params):
        ratio = passive_ub(params, 0.01).per_bit / passive_ub(params, 0.005).per_bit
        assert 3.2 <= ratio <= 4.8

    def test_passive_below_optimum(self, params):
        for N_S in np.geomspace(1e-4, 1, 13):
            assert passive_ub(params, N_S).per_bit <= holevo_optimum_ub(params, 0.01, N_S).per_bit

    def test_active_zero_without_injection(self, params):
        assert holevo_active_ub(params, 0.0, 0.05).per_bit == 0

    def test_active_mixture_zeroes_cross_block(self, params):
        c0 = active_covariance(params, 0.01, 0.043, bit=0).matrix
        c1 = active_covariance(params, 0.01, 0.043, bit=1).matrix
        assert np.allclose((c0 + c1)[:2, 2:], 0)

    def test_active_below_capacity(self, params):
        for N_S in np.geomspace(1e-4, 1, 13):
            assert (holevo_active_ub(params, 0.01, N_S).per_mode_uncapped
                    <= entanglement_assisted_capacity(params, 0.01, N_S))

    def test_active_tracks_optimum_when_dim(self, params):
        opt = holevo_optimum_ub(params, 0.01, 1e-3).per_mode_uncapped
        act = holevo_active_ub(params, 0.01, 1e-3).per_mode_uncapped
        assert abs(act - opt) / opt <= 0.20

    def test_active_minor_when_bright(self, params):
        opt = holevo_optimum_ub(params, 0.01, 0.1).per_mode_uncapped
        act = holevo_active_ub(params, 0.01, 0.1).per_mode_uncapped
        assert act < 0.5 * opt


class TestEntanglementAssistedCapacity:
    def test_no_injection(self, params):
        assert entanglement_assisted_capacity(params, 0.0, 0.05) == pytest.approx(0.0, abs=1e-12)

    def test_noiseless_amplifier(self):
        p = SystemParams(G_B=1.0, N_B=0.0)
        f_E, kS, N_S = 0.01, p.kappa_S, 0.043
        x = (1 - p.kappa_B) * (1 - (1 - f_E) * kS) * eve_spdc_brightness(f_E, kS, N_S)
        assert entanglement_assisted_capacity(p, f_E, N_S) == pytest.approx(2 * thermal_entropy(x))

    def test_above_active_at_design_point(self, params):
        assert (entanglement_assisted_capacity(params, 0.01, 0.043)
                > holevo_active_ub(params, 0.01, 0.043).per_mode_uncapped)


class TestMonitorLeak:
    def test_no_monitor(self, params):
        assert monitor_leak_ratio(params.replace(kappa_B=0.0), 0.01, N_S=0.043) == 1.0

    @given(N_S=st.floats(1e-4, 1), kB=st.floats(1e-3, 1))
    def test_no_click_dimmer(self, N_S, kB):
        p = SystemParams(kappa_B=kB)
        assert monitor_no_click_brightness(p, N_S) < p.kappa_S * N_S

    def test_regime_warning(self, params):
        with pytest.warns(RegimeWarning):
            monitor_leak_ratio(params.replace(kappa_B=0.5), 0.01, N_S=0.5)

    def test_ratio_at_least_one_at_design_point(self, params):
        assert monitor_leak_ratio(params, 0.01, N_S=0.043) > 1.0
