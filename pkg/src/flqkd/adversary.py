"""
Eve's frequency-domain collective Gaussian attack and the information bounds
built on it: the optimum-attack Holevo upper bound (exact and asymptotic),
the passive and active bounds, her entanglement-assisted capacity, and the
correction for what Bob's monitor click times could leak.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gaussian_core import VACUUM_VARIANCE, WignerCov, entropy_from_cov, thermal_entropy
from .search import golden_section_max
from .terminals import RegimeWarning, bob_amplifier_output_brightness

HALF_PI = math.pi / 2
CONSTRAINT_TOL = 1e-9


class InfeasibleAttackError(ValueError):
    pass


class BoundMethod(str, Enum):
    EXACT = "exact_symplectic"
    ASYMPTOTIC_NB = "asymptotic_NB"
    ASYMPTOTIC_KAPPA_S = "asymptotic_kappaS"


@dataclass(frozen=True)
class AttackParams:
    """Magnitudes of Eve's Bogoliubov coefficients for one frequency mode.

    Phases are fixed so that ``u0``, ``v0`` and ``v^dagger u`` are real and
    nonnegative; the displacement is zero.
    """

    f_E: float
    gamma_v: float
    delta: float
    u0_mag: float
    v0_mag: float
    u_norm_sq: float
    v_norm_sq: float
    vu_inner_mag: float
    kappa_S: float
    N_S: float

    @property
    def w(self):
        """``v^dagger u + (2 N_S + 1) v0* u0``."""
        return complex(self.vu_inner_mag + (2.0 * self.N_S + 1.0) * self.v0_mag * self.u0_mag)

    def constraint_residuals(self):
        """(commutator, photon flux, injection fraction) residuals.

        The injection-fraction residual is 0 when ``kappa_S * N_S == 0``.
        """
        u0, v0 = self.u0_mag ** 2, self.v0_mag ** 2
        flux = self.kappa_S * self.N_S
        commutator = u0 - v0 + self.u_norm_sq - self.v_norm_sq - 1.0
        photon = (u0 + v0) * self.N_S + v0 + self.v_norm_sq - flux
        injection = 0.0 if flux == 0 else (v0 + self.v_norm_sq) / flux - self.f_E
        return commutator, photon, injection


@dataclass(frozen=True)
class HolevoBound:
    """Upper bound on Eve's Holevo information about one of Bob's bits.

    ``per_bit`` is capped at one bit; ``per_mode = per_bit / M``.
    ``per_mode_uncapped`` is the bracketed entropy combination before the
    cap, which is what the per-mode curves plot.
    """

    per_bit: float
    per_mode: float
    per_mode_uncapped: float
    capped: bool
    method: BoundMethod
    R: float

    @property
    def rate(self):
        """Bound in bits per second."""
        return self.R * self.per_bit


def _bound_from_per_mode(value, params, method):
    value = max(value, 0.0)
    M = params.M
    raw = M * value
    per_bit = min(raw, 1.0)
    return HolevoBound(
        per_bit=per_bit,
        per_mode=per_bit / M,
        per_mode_uncapped=value,
        capped=raw > 1.0,
        method=method,
        R=params.R,
    )


def _signal(params, N_S):
    return params.N_S if N_S is None else N_S


def attack_from_angles(f_E, gamma_v, delta, kappa_S, N_S):
    """Attack coefficients satisfying the commutator, flux and f_E constraints.

    ``gamma_v`` must lie in the cone ``cos^2(gamma_v) <= f_E N_S / (1 - f_E)``.
    """
    if not 0 <= f_E <= 1:
        raise InfeasibleAttackError(f"f_E must lie in [0, 1], got {f_E!r}")
    for name, ang in (("gamma_v", gamma_v), ("delta", delta)):
        if not -1e-12 <= ang <= HALF_PI + 1e-12:
            raise InfeasibleAttackError(f"{name} must lie in [0, pi/2], got {ang!r}")
    cos_g = math.cos(gamma_v) if gamma_v < HALF_PI else 0.0
    cos_sq = cos_g * cos_g
    if f_E < 1 and cos_sq > f_E * N_S / (1.0 - f_E) + 1e-12:
        raise InfeasibleAttackError(
            f"gamma_v={gamma_v!r} outside the admissible cone for f_E={f_E!r}, N_S={N_S!r}"
        )
    through = (1.0 - f_E) * kappa_S
    injected = f_E * kappa_S * N_S
    v_sq = max(injected - through * cos_sq, 0.0)
    u_sq = injected + 1.0 - through + through * cos_sq
    cos_d = math.cos(delta) if delta < HALF_PI else 0.0
    return AttackParams(
        f_E=f_E,
        gamma_v=gamma_v,
        delta=delta,
        u0_mag=math.sqrt(through) * math.sin(gamma_v),
        v0_mag=math.sqrt(through) * cos_g,
        u_norm_sq=u_sq,
        v_norm_sq=v_sq,
        vu_inner_mag=math.sqrt(v_sq * u_sq) * cos_d,
        kappa_S=kappa_S,
        N_S=N_S,
    )


def optimum_attack(f_E, kappa_S, N_S):
    return attack_from_angles(f_E, HALF_PI, HALF_PI, kappa_S, N_S)


def eve_spdc_brightness(f_E, kappa_S, N_S):
    """Brightness of the SPDC source that realizes the optimum attack."""
    denom = 1.0 - (1.0 - f_E) * kappa_S
    if denom <= 0:
        raise InfeasibleAttackError("lossless channel with f_E = 0 leaves Eve no port")
    return f_E * kappa_S * N_S / denom


def conditional_covariances(attack, params, check=True):
    """Covariances of (idler, a'_S), (idler, n'_B | b=0) and Bob's output a_B.

    Built for the bounding concessions kappa_B = 0 and a quantum-limited
    amplifier, so only ``params.G_B`` enters. ``check=False`` defers the
    Heisenberg check to the entropy evaluation.
    """
    G = params.G_B
    N_S, kS = attack.N_S, attack.kappa_S
    u0, v0, w = attack.u0_mag, attack.v0_mag, attack.w
    flux = kS * N_S
    corr = 2.0 * math.sqrt(N_S * (N_S + 1.0))
    A_S = (2.0 * N_S + 1.0) * np.eye(2)

    B = 0.5 + flux
    B_is = 2.0 * np.array([[B + w.real, w.imag], [w.imag, B - w.real]])
    C_is = corr * np.array([[u0 + v0, 0.0], [0.0, -(u0 - v0)]])
    lam_is = VACUUM_VARIANCE * np.block([[A_S, C_is], [C_is, B_is]])

    Bp = 1.0 + 2.0 * (G - 1.0) * (flux + 1.0)
    x = 2.0 * (G - 1.0) * w
    B_ib = np.array([[Bp + x.real, -x.imag], [-x.imag, Bp - x.real]])
    C_ib = 2.0 * math.sqrt((G - 1.0) * N_S * (N_S + 1.0)) * np.array(
        [[u0 + v0, 0.0], [0.0, u0 - v0]]
    )
    lam_ib = VACUUM_VARIANCE * np.block([[A_S, C_ib], [C_ib, B_ib]])

    Bpp = -1.0 + 2.0 * G * (flux + 1.0)
    lam_b = VACUUM_VARIANCE * np.array(
        [[Bpp + 2.0 * G * w.real, 2.0 * G * w.imag], [2.0 * G * w.imag, Bpp - 2.0 * G * w.real]]
    )
    return (
        WignerCov(lam_is, check_physical=check),
        WignerCov(lam_ib, check_physical=check),
        WignerCov(lam_b, check_physical=check),
    )


def attack_entropy_bound(attack, params):
    """Per-mode ``S(B) + S(IS') - S(IB')`` for a given attack, before any cap."""
    lam_is, lam_ib, lam_b = conditional_covariances(attack, params, check=False)
    return entropy_from_cov(lam_is) + entropy_from_cov(lam_b) - entropy_from_cov(lam_ib)


def holevo_optimum_ub(params, f_E, N_S=None):
    """Exact Holevo upper bound for the optimum frequency-domain collective attack."""
    N_S = _signal(params, N_S)
    if N_S == 0:
        return _bound_from_per_mode(0.0, params, BoundMethod.EXACT)
    attack = optimum_attack(f_E, params.kappa_S, N_S)
    return _bound_from_per_mode(attack_entropy_bound(attack, params), params, BoundMethod.EXACT)


def passive_ub(params, N_S=None):
    """Optimum-attack bound with no injection (pure beam-splitter tap)."""
    return holevo_optimum_ub(params, 0.0, N_S)


def holevo_asymptotic_ub(params, f_E, N_S=None):
    """Leading-order bound for ``kappa_S << 1`` and ``N_B >> 1``.

    ``M kappa_S N_S {f_E [1/ln 2 - log2(f_E kappa_S N_S)] + (1-f_E) N_S log2(1 + 1/N_S)}``
    per bit, capped at one.
    """
    N_S = _signal(params, N_S)
    kS = params.kappa_S
    if kS > 0.3:
        warnings.warn(f"asymptotic bound used at kappa_S={kS:.3g} > 0.3", RegimeWarning, stacklevel=2)
    injected = f_E * kS * N_S
    active = f_E * (1.0 / math.log(2.0) - math.log2(injected)) if injected > 0 else 0.0
    passive = (1.0 - f_E) * N_S * math.log2(1.0 + 1.0 / N_S) if N_S > 0 else 0.0
    return _bound_from_per_mode(kS * N_S * (active + passive), params, BoundMethod.ASYMPTOTIC_KAPPA_S)


def verify_optimum_angles(params, f_E, N_S=None, grid_points=64, tol=1e-4):
    """Numerically maximize the exact bound over Eve's attack angles.

    A ``grid_points x grid_points`` grid over the admissible
    ``(gamma_v, delta)`` rectangle, followed by one golden-section pass on
    each axis around the best cell.

    Returns
    -------
    (gamma_v, delta) : tuple of float
    """
    N_S = _signal(params, N_S)
    kS = params.kappa_S
    if f_E >= 1:
        gamma_lo = 0.0
    else:
        gamma_lo = math.acos(min(1.0, math.sqrt(f_E * N_S / (1.0 - f_E))))
    if gamma_lo >= HALF_PI:
        gammas = np.array([HALF_PI])
    else:
        gammas = np.linspace(gamma_lo, HALF_PI, grid_points)
    deltas = np.linspace(0.0, HALF_PI, grid_points)

    def objective(g, d):
        return attack_entropy_bound(attack_from_angles(f_E, g, d, kS, N_S), params)

    values = np.array([[objective(g, d) for d in deltas] for g in gammas])
    i, j = np.unravel_index(np.argmax(values), values.shape)
    g_best, d_best = float(gammas[i]), float(deltas[j])
    if len(gammas) > 1:
        lo, hi = gammas[max(i - 1, 0)], gammas[min(i + 1, len(gammas) - 1)]
        g_best, _ = golden_section_max(lambda g: objective(g, d_best), lo, hi, tol=tol)
        g_best = min(max(g_best, gamma_lo), HALF_PI)
    lo, hi = deltas[max(j - 1, 0)], deltas[min(j + 1, len(deltas) - 1)]
    d_best, _ = golden_section_max(lambda d: objective(g_best, d), lo, hi, tol=tol)
    return g_best, d_best


def active_covariance(params, f_E, N_S=None, bit=0):
    """Conditional covariance of Eve's retained idler and Bob's output mode.

    The cross term uses the fraction of Eve's SPDC signal that actually
    reaches Bob's amplifier, ``(1 - kappa_B)[1 - (1 - f_E) kappa_S]``, and
    Bob's output carries his full amplified input plus ASE.
    """
    N_S = _signal(params, N_S)
    kS = params.kappa_S
    N_E = eve_spdc_brightness(f_E, kS, N_S)
    reach = (1.0 - params.kappa_B) * (1.0 - (1.0 - f_E) * kS)
    c = 2.0 * math.sqrt(params.G_B * reach * N_E * (N_E + 1.0))
    sign = -1.0 if bit else 1.0
    A_E = (2.0 * N_E + 1.0) * np.eye(2)
    A_B = (2.0 * bob_amplifier_output_brightness(params, kS * N_S) + 1.0) * np.eye(2)
    C = sign * c * np.diag([1.0, -1.0])
    return WignerCov(VACUUM_VARIANCE * np.block([[A_E, C], [C, A_B]]))


def holevo_active_ub(params, f_E, N_S=None):
    """Holevo bound when Eve measures only her idler and Bob's returned light."""
    N_S = _signal(params, N_S)
    if f_E == 0 or N_S == 0:
        return _bound_from_per_mode(0.0, params, BoundMethod.EXACT)
    cond = [active_covariance(params, f_E, N_S, bit=b) for b in (0, 1)]
    mixed = WignerCov(0.5 * (cond[0].matrix + cond[1].matrix))
    value = entropy_from_cov(mixed) - 0.5 * sum(entropy_from_cov(c) for c in cond)
    return _bound_from_per_mode(value, params, BoundMethod.EXACT)


def entanglement_assisted_capacity(params, f_E, N_S=None):
    """Eve's single-mode entanglement-assisted capacity, bits per mode."""
    N_S = _signal(params, N_S)
    N_E = eve_spdc_brightness(f_E, params.kappa_S, N_S)
    x = (1.0 - params.kappa_B) * (1.0 - (1.0 - f_E) * params.kappa_S) * N_E
    G, NB = params.G_B, params.N_B
    return thermal_entropy(x) + thermal_entropy(G * x + NB) - thermal_entropy((1.0 + x) * NB)


def monitor_no_click_brightness(params, N_S=None):
    """Mean photon number entering Bob's modulator given his monitor did not click."""
    N_S = _signal(params, N_S)
    flux = params.kappa_S * N_S
    return (1.0 - params.kappa_B) * flux / (1.0 + params.kappa_B * flux)


def monitor_leak_ratio(params, f_E, per_bit_chi=None, N_S=None):
    """Bound on the relative Holevo increase from Bob's published click times.

    ``chi0/chi + p1 / (M chi)``, with ``p1 = M kappa_B kappa_S N_S`` and the
    conditional-information difference bounded by one bit. ``chi0`` is the
    bound re-evaluated at the reduced no-click brightness. ``per_bit_chi``
    defaults to the exact optimum bound at the same point.
    """
    N_S = _signal(params, N_S)
    kS, kB, M = params.kappa_S, params.kappa_B, params.M
    p1 = M * kB * kS * N_S
    if p1 > 0.1:
        warnings.warn(f"p1 = {p1:.3g} > 0.1; multi-click terms are not negligible",
                      RegimeWarning, stacklevel=2)
    bound = holevo_optimum_ub(params, f_E, N_S)
    chi = bound.per_mode_uncapped
    if chi == 0:
        raise ValueError("Eve's bound is zero; the leak ratio is undefined")
    if kB == 0:
        return 1.0
    if per_bit_chi is None:
        per_bit_chi = bound.per_bit
    N_S_cond = N_S / (1.0 + kB * kS * N_S)
    chi0 = holevo_optimum_ub(params, f_E, N_S_cond).per_mode_uncapped
    # the bound need not be monotone in N_S, so chi0 / chi may exceed 1
    return chi0 / chi + p1 / per_bit_chi
