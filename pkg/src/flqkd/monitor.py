"""
Photon-coincidence channel monitoring.

Expected singles and coincidence rates for Alice's idler monitor (I), her
transmitter tap (A) and Bob's receiver tap (B), the intrusion-parameter
estimator built from them, and an event-level Monte Carlo that produces the
same rates from simulated detection timestamps.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .adversary import conditional_covariances, optimum_attack
from .gaussian_core import (
    VACUUM_VARIANCE,
    WignerCov,
    mean_photon_number,
    phase_sensitive_cross,
    thermal_cov,
    tmsv_cov,
)
from .terminals import RegimeWarning, derive_source

LOW_FLUX_LIMIT = 0.1
MIN_W_TS = 100.0
MIN_TS_OVER_TG = 10.0

# Mode order of the monitor covariance.
IDLER, TAP_A, TAP_B = 0, 1, 2

DETECTORS = ("I", "A", "B")


class MonitorRegimeError(ValueError):
    """Gate timing outside the regime where the closed-form rates hold."""


class UndefinedBaselineError(ValueError):
    """No idler/transmitter-tap excess, so f_E cannot be normalized."""


@dataclass(frozen=True)
class MonitorRates:
    """Singles (counts/s) and gated coincidences (coincidences/s).

    ``*_err`` fields carry counting-statistics standard errors for simulated
    rates and are zero for analytic ones.
    """

    S_I: float
    S_A: float
    S_B: float
    C_IA: float
    C_IA_shifted: float
    C_IB: float
    C_IB_shifted: float
    f_E_hat: float
    f_E_hat_err: float = 0.0
    duration: float = math.inf

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class EventStream:
    """Detection times (seconds, ascending) of one monitor detector."""

    detector: str
    timestamps: np.ndarray
    seed: int


def _beam_splitter(cov, i, j, kappa):
    """Mix modes ``i`` and ``j``: ``i -> sqrt(k) i + sqrt(1-k) j``, ``j -> sqrt(1-k) i - sqrt(k) j``."""
    t, r = math.sqrt(kappa), math.sqrt(1.0 - kappa)
    S = np.eye(cov.shape[0])
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        S[a, a], S[a, b] = t, r
        S[b, a], S[b, b] = r, -t
    return S @ cov @ S.T


def _apply_channel(cov, mode, X, Y):
    """Gaussian channel ``V -> X V X^T + Y`` acting on one mode."""
    idx = slice(2 * mode, 2 * mode + 2)
    T = np.eye(cov.shape[0])
    T[idx, idx] = X
    out = T @ cov @ T.T
    out[idx, idx] += Y
    return out


def _keep(cov, modes):
    idx = np.concatenate([[2 * k, 2 * k + 1] for k in modes])
    return cov[np.ix_(idx, idx)]


def _channel_from_attack(attack, params):
    """(X, Y) of the single-mode channel a_S -> a'_S that Eve's attack induces.

    Read off from the covariance of a'_S with a purification of a_S, so it
    applies equally to Alice's SPDC idler.
    """
    lam_is = conditional_covariances(attack, params)[0].matrix
    u0, v0 = attack.u0_mag, attack.v0_mag
    X = np.diag([u0 + v0, u0 - v0])
    Y = lam_is[2:, 2:] - X @ lam_is[:2, :2] @ X.T
    return X, Y


def monitor_covariance(params, f_E, attack=None):
    """Covariance of the (idler, A-tap, B-tap) monitor inputs, one mode each.

    The SPDC signal is combined with ASE, tapped at Alice, sent through the
    attacked channel and tapped again at Bob. ``attack`` defaults to the
    optimum attack at ``f_E``.
    """
    src = derive_source(params)
    if attack is None:
        attack = optimum_attack(f_E, params.kappa_S, params.N_S)
    # modes: 0 idler, 1 SPDC signal, 2 ASE, 3 vacuum at Alice's tap
    cov = np.zeros((8, 8))
    cov[:4, :4] = np.asarray(tmsv_cov(src.N_SPDC))[[2, 3, 0, 1]][:, [2, 3, 0, 1]]
    cov[4:6, 4:6] = np.asarray(thermal_cov(src.N_ASE))
    cov[6:, 6:] = VACUUM_VARIANCE * np.eye(2)
    cov = _beam_splitter(cov, 1, 2, src.kappa_C)       # 1 -> a_A
    cov = _beam_splitter(cov, 1, 3, 1.0 - params.kappa_A)  # 1 -> a_S, 3 -> A tap
    X, Y = _channel_from_attack(attack, params)
    cov = _apply_channel(cov, 1, X, Y)                 # 1 -> a'_S
    kB = params.kappa_B
    cov = _apply_channel(cov, 1, math.sqrt(kB) * np.eye(2),
                         (1.0 - kB) * VACUUM_VARIANCE * np.eye(2))  # 1 -> B tap
    return WignerCov(_keep(cov, [0, 3, 1]))


def expected_singles(params, src=None, f_E=0.0):
    """Singles rates ``(S_I, S_A, S_B)`` in counts/s.

    Warns with ``RegimeWarning`` when a detector sees more than
    ``LOW_FLUX_LIMIT`` photons per gate, where the rate formulas degrade.
    ``f_E`` does not enter: Eve's flux constraint fixes Bob's received
    brightness at ``kappa_S N_S``.
    """
    if src is None:
        src = derive_source(params)
    W = params.W
    S_I = params.eta_I * src.N_SPDC * W
    S_A = params.eta_A_mon * params.kappa_A * src.N_A * W
    S_B = params.eta_B_mon * params.kappa_B * params.kappa_S * params.N_S * W
    for name, s in (("S_I", S_I), ("S_A", S_A), ("S_B", S_B)):
        if s * params.T_g > LOW_FLUX_LIMIT:
            warnings.warn(f"{name} T_g = {s * params.T_g:.3g} exceeds the low-flux limit "
                          f"{LOW_FLUX_LIMIT}", RegimeWarning, stacklevel=2)
    return S_I, S_A, S_B


def _check_gate_regime(params):
    if params.W * params.T_s < MIN_W_TS:
        raise MonitorRegimeError(f"W T_s = {params.W * params.T_s:.3g} < {MIN_W_TS}")
    if params.T_s < MIN_TS_OVER_TG * params.T_g:
        raise MonitorRegimeError(f"T_s = {params.T_s:.3g} s is not >= {MIN_TS_OVER_TG} T_g")
    if params.T_s >= params.T_R:
        raise MonitorRegimeError("time shift must be much shorter than the protocol duration")


def expected_coincidence_excess(params, pair, f_E, attack=None):
    """True-coincidence rate ``C_IK - C~_IK = eta_I eta_K W |<a_I a_K>|^2``.

    ``pair`` is ``"IA"`` or ``"IB"``. Raises ``MonitorRegimeError`` outside
    ``W T_s >= 100``, ``T_s >= 10 T_g``.
    """
    _check_gate_regime(params)
    k = {"IA": TAP_A, "IB": TAP_B}.get(pair)
    if k is None:
        raise ValueError(f"pair must be 'IA' or 'IB', got {pair!r}")
    eta = params.eta_A_mon if k == TAP_A else params.eta_B_mon
    c = phase_sensitive_cross(monitor_covariance(params, f_E, attack), IDLER, k)
    return params.eta_I * eta * params.W * abs(c) ** 2


def coincidence_excess_double_sum(n_modes, T_R, T_g, T_s, cross_sq, eta_I=1.0, eta_K=1.0):
    """Direct evaluation of the gated double sum over ``n_modes + 1`` Fourier modes.

    Aligned minus shifted gate, with ``R^(1)`` taken from i.i.d. modes of
    phase-sensitive cross moment magnitude squared ``cross_sq``. Only
    practical for small ``n_modes``; used to validate the closed form.
    """
    m = np.arange(-(n_modes // 2), n_modes // 2 + 1)
    k = (m[:, None] - m[None, :]).astype(float)
    x = k * T_g / T_R
    kernel = (T_g / T_R) * np.sinc(x) * (1.0 - np.cos(2.0 * np.pi * k * T_s / T_R))
    return eta_I * eta_K * cross_sq * kernel.sum() / T_R


def estimate_fE(rates):
    """``1 - [(C_IB - C~_IB)/S_B] / [(C_IA - C~_IA)/S_A]``."""
    excess_A = rates.C_IA - rates.C_IA_shifted
    excess_B = rates.C_IB - rates.C_IB_shifted
    if excess_A <= 0 or rates.S_A <= 0:
        raise UndefinedBaselineError("no idler/transmitter-tap excess; f_E is undefined")
    if rates.S_B <= 0:
        raise UndefinedBaselineError("Bob's monitor records no singles; f_E is undefined")
    return 1.0 - (excess_B / rates.S_B) / (excess_A / rates.S_A)


def expected_rates(params, f_E, attack=None):
    """Analytic ``MonitorRates``; accidentals are ``S_I S_K T_g``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        S_I, S_A, S_B = expected_singles(params)
    T_g = params.T_g
    acc_A, acc_B = S_I * S_A * T_g, S_I * S_B * T_g
    ex_A = expected_coincidence_excess(params, "IA", f_E, attack)
    ex_B = expected_coincidence_excess(params, "IB", f_E, attack)
    rates = MonitorRates(S_I, S_A, S_B, acc_A + ex_A, acc_A, acc_B + ex_B, acc_B, math.nan)
    f_hat = estimate_fE(rates) if ex_A > 0 and S_A > 0 and S_B > 0 else math.nan
    return MonitorRates(S_I, S_A, S_B, acc_A + ex_A, acc_A, acc_B + ex_B, acc_B, f_hat)


def _photon_fluxes(params, f_E):
    """Per-second photon fluxes: idler, taps, and I-A, I-B pair rates before detection."""
    cov = monitor_covariance(params, f_E)
    W = params.W
    n = [mean_photon_number(cov, k) for k in (IDLER, TAP_A, TAP_B)]
    pair_A = abs(phase_sensitive_cross(cov, IDLER, TAP_A)) ** 2
    pair_B = abs(phase_sensitive_cross(cov, IDLER, TAP_B)) ** 2
    if pair_A + pair_B > n[0] or pair_A > n[1] or pair_B > n[2]:
        raise MonitorRegimeError("pair flux exceeds singles flux; brightness too high to simulate")
    return W * n[0], W * n[1], W * n[2], W * pair_A, W * pair_B


def simulate_streams(params, f_E, duration, seed):
    """Detection-time streams for the three monitor detectors.

    Idler photons arrive as a Poisson process; each is paired with an A-tap
    photon, a B-tap photon or nothing according to the pair fluxes, and
    the taps receive further unpaired photons at their residual fluxes.
    Paired photons share a timestamp (jitter is absorbed into ``T_g``).
    Detector efficiencies act as independent thinning.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = np.random.default_rng(seed)
    F_I, F_A, F_B, P_A, P_B = _photon_fluxes(params, f_E)
    half = duration / 2.0

    def arrivals(rate):
        count = rng.poisson(rate * duration)
        return rng.uniform(-half, half, count)

    idler = arrivals(F_I)
    label = rng.choice(3, size=idler.size, p=[P_A / F_I, P_B / F_I, 1.0 - (P_A + P_B) / F_I])
    tap_A = np.concatenate([idler[label == 0], arrivals(F_A - P_A)])
    tap_B = np.concatenate([idler[label == 1], arrivals(F_B - P_B)])

    streams = []
    for name, times, eta in (("I", idler, params.eta_I), ("A", tap_A, params.eta_A_mon),
                             ("B", tap_B, params.eta_B_mon)):
        kept = times[rng.random(times.size) < eta]
        streams.append(EventStream(name, np.sort(kept), seed))
    return streams


def _gated_counts(start, partner, offset, T_g):
    lo = np.searchsorted(partner, start + offset - T_g / 2.0, side="left")
    hi = np.searchsorted(partner, start + offset + T_g / 2.0, side="right")
    return int(np.sum(hi - lo))


def rates_from_streams(streams, params, duration):
    """Empirical ``MonitorRates`` with counting-statistics standard errors.

    Idler starts are restricted to a guard window so that aligned and
    shifted gates see the same exposure.
    """
    by_name = {s.detector: s.timestamps for s in streams}
    I, A, B = by_name["I"], by_name["A"], by_name["B"]
    T_g, T_s = params.T_g, params.T_s
    half = duration / 2.0
    lo, hi = -half + T_g, half - T_s - T_g
    if hi <= lo:
        raise ValueError("duration too short for the coincidence time shift")
    starts = I[(I >= lo) & (I <= hi)]
    span = hi - lo

    counts = {}
    for name, partner in (("A", A), ("B", B)):
        counts[name] = (_gated_counts(starts, partner, 0.0, T_g),
                        _gated_counts(starts, partner, T_s, T_g))

    S_I, S_A, S_B = I.size / duration, A.size / duration, B.size / duration
    rates = MonitorRates(
        S_I, S_A, S_B,
        counts["A"][0] / span, counts["A"][1] / span,
        counts["B"][0] / span, counts["B"][1] / span,
        math.nan,
    )
    x_A = counts["A"][0] - counts["A"][1]
    x_B = counts["B"][0] - counts["B"][1]
    try:
        f_hat = estimate_fE(rates)
    except UndefinedBaselineError:
        return MonitorRates(**{**rates.as_dict(), "f_E_hat": math.nan,
                               "f_E_hat_err": math.nan, "duration": duration})
    rel_sq = (sum(counts["A"]) / x_A ** 2 + 1.0 / A.size + 1.0 / B.size)
    ratio = 1.0 - f_hat
    if x_B != 0:
        rel_sq += sum(counts["B"]) / x_B ** 2
        err = abs(ratio) * math.sqrt(rel_sq)
    else:
        # ratio is zero; its spread comes from the B excess alone
        err = math.sqrt(sum(counts["B"])) / span / S_B / ((x_A / span) / S_A)
    return MonitorRates(**{**rates.as_dict(), "f_E_hat": f_hat,
                           "f_E_hat_err": err, "duration": duration})


def simulate_events(params, f_E, duration, seed):
    """Simulate monitor detections for ``duration`` seconds and return empirical rates."""
    streams = simulate_streams(params, f_E, duration, seed)
    return rates_from_streams(streams, params, duration)


def duration_for_idler_counts(params, counts):
    """Duration that yields ``counts`` expected idler detections."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        S_I = expected_singles(params)[0]
    if S_I <= 0:
        raise ValueError("idler detector records nothing")
    return counts / S_I


def write_events(streams, path):
    """Write ``detector_id timestamp_ps`` lines, merged in time order."""
    ids = np.concatenate([np.full(s.timestamps.size, i) for i, s in enumerate(streams)])
    ps = np.concatenate([np.rint(s.timestamps * 1e12).astype(np.int64) for s in streams])
    order = np.lexsort((ids, ps))
    names = np.array([s.detector for s in streams])
    with open(path, "w") as fh:
        for i, t in zip(ids[order], ps[order]):
            fh.write(f"{names[i]} {t}\n")
