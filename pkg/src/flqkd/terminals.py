"""
Alice's composite ASE + SPDC source, her reference storage chain, and Bob's
tap-modulate-amplify terminal.
"""

import math
import warnings
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .gaussian_core import VACUUM_VARIANCE, WignerCov

N_ASE = 1.0
"""Brightness of the ASE portion fed to the combiner (held fixed, << N_LO)."""


class InfeasibleSourceError(ValueError):
    pass


class RegimeWarning(UserWarning):
    """An approximation is being used outside the regime it was derived for."""


@dataclass(frozen=True)
class SystemParams:
    """Protocol and hardware parameters.

    Defaults reproduce the 50 km, 10 Gbps design point: 2 THz source
    bandwidth, 99:1 ASE-to-SPDC ratio, G_B = N_B = 1e4, 1% taps, homodyne
    efficiency 0.9, N_LO = 1e4 and reconciliation efficiency 0.94.
    Brightnesses are photons/s/Hz, rates in bit/s, times in seconds.
    """

    W: float = 2e12
    R: float = 10e9
    L: float = 50.0
    fiber_loss: float = 0.2
    kappa_S_override: Optional[float] = None
    n: float = 99.0
    N_A: float = 0.1
    kappa_A: float = 0.01
    kappa_B: float = 0.01
    G_B: float = 1e4
    N_B: float = 1e4
    eta: float = 0.9
    N_LO: float = 1e4
    G_R: float = 1.0
    kappa_I: float = 1.0
    beta: float = 0.94
    eta_I: float = 1.0
    eta_A_mon: float = 1.0
    eta_B_mon: float = 1.0
    T_g: float = 100e-12
    T_s: float = 10e-9
    T_R: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if self.W <= 0:
            raise ValueError("W must be positive")
        if not 0 < self.R <= self.W:
            raise ValueError(f"need 0 < R <= W, got R={self.R!r}, W={self.W!r}")
        if self.L < 0 or self.fiber_loss < 0:
            raise ValueError("path length and fiber loss must be nonnegative")
        if self.kappa_S_override is not None and not 0 < self.kappa_S_override <= 1:
            raise ValueError("kappa_S_override must lie in (0, 1]")
        for name in ("n", "N_A", "N_B", "N_LO"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("kappa_A", "kappa_B", "eta", "beta", "eta_I", "eta_A_mon", "eta_B_mon"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 < self.kappa_I <= 1:
            raise ValueError("kappa_I must lie in (0, 1]")
        if self.G_R < 1:
            raise ValueError("G_R must be >= 1")
        if self.G_B < 1:
            raise ValueError("G_B must be >= 1")
        if self.N_B < self.G_B - 1 - 1e-9 * self.G_B:
            raise ValueError(f"need N_B >= G_B - 1, got N_B={self.N_B!r}, G_B={self.G_B!r}")
        if min(self.T_g, self.T_s, self.T_R) <= 0:
            raise ValueError("monitor timing parameters must be positive")

    @property
    def M(self):
        """Frequency modes per bit, W / R."""
        return self.W / self.R

    @property
    def kappa_S(self):
        """One-way channel transmissivity."""
        if self.kappa_S_override is not None:
            return self.kappa_S_override
        return 10.0 ** (-self.fiber_loss * self.L / 10.0)

    @property
    def N_S(self):
        """Brightness sent to Bob, (1 - kappa_A) N_A."""
        return (1.0 - self.kappa_A) * self.N_A

    def with_signal_brightness(self, N_S):
        """Copy with N_A chosen so that the transmitted brightness is ``N_S``."""
        return replace(self, N_A=N_S / (1.0 - self.kappa_A))

    def replace(self, **changes):
        return replace(self, **changes)

    def check_monitor_timing(self):
        """Warn when the coincidence timing margins are thinner than assumed."""
        problems = []
        if self.W * self.T_s < 100:
            problems.append(f"W*T_s = {self.W * self.T_s:.3g} < 100")
        if self.T_s < 10 * self.T_g:
            problems.append(f"T_s/T_g = {self.T_s / self.T_g:.3g} < 10")
        if self.T_R < 1e4 * self.T_s:
            problems.append(f"T_R/T_s = {self.T_R / self.T_s:.3g} < 1e4")
        for p in problems:
            warnings.warn(f"monitor timing margin: {p}", RegimeWarning, stacklevel=2)
        return not problems


@dataclass(frozen=True)
class SourceDerived:
    kappa_C: float
    N_SPDC: float
    N_S: float
    M: float
    kappa_S: float
    n: float
    N_A: float
    N_ASE: float = N_ASE

    @property
    def ref_correlation(self):
        """Normalized squared signal-reference correlation before storage."""
        ase = (1.0 - self.kappa_C) * self.N_ASE
        total = self.kappa_C * self.N_SPDC + ase
        if total == 0:
            return 0.0
        return ase / total


def derive_source(params):
    """Combiner transmissivity, SPDC brightness, and channel quantities."""
    N_A, n = params.N_A, params.n
    if N_A >= 1:
        raise InfeasibleSourceError(f"N_A must be < 1, got {N_A!r}")
    if n < 1:
        raise InfeasibleSourceError(f"ASE-to-SPDC ratio n must be >= 1, got {n!r}")
    return SourceDerived(
        kappa_C=1.0 - n * N_A / (n + 1.0),
        N_SPDC=N_A / (n * (1.0 - N_A) + 1.0),
        N_S=params.N_S,
        M=params.M,
        kappa_S=params.kappa_S,
        n=n,
        N_A=N_A,
    )


def source_covariance(src, kappa_A, N_LO):
    """6x6 covariance of the (signal-to-Bob, SPDC idler, ASE reference) triple."""
    I2 = np.eye(2)
    Z = np.zeros((2, 2))
    c_spdc = 2.0 * math.sqrt(src.N_SPDC * (src.N_SPDC + 1.0)) * np.diag([1.0, -1.0])
    c_ase = 2.0 * math.sqrt(src.N_ASE * N_LO) * I2
    a_s = (2.0 * src.N_S + 1.0) * I2
    a_spdc = (2.0 * src.N_SPDC + 1.0) * I2
    a_lo = (2.0 * N_LO + 1.0) * I2
    c_spdc_t = math.sqrt((1.0 - kappa_A) * src.kappa_C) * c_spdc
    c_ase_t = math.sqrt((1.0 - kappa_A) * (1.0 - src.kappa_C)) * c_ase
    m = np.block([
        [a_s, c_spdc_t, c_ase_t],
        [c_spdc_t, a_spdc, Z],
        [c_ase_t, Z, a_lo],
    ])
    return WignerCov(VACUUM_VARIANCE * m)


def reference_storage_fidelity(src, G_R, kappa_I, N_LO, kappa_A=0.0):
    """Brightness and normalized signal correlation of the stored reference.

    The reference is amplified (gain ``G_R``, output ASE ``N_R = G_R``) and
    then stored with transmissivity ``kappa_I``. ``G_R == 1`` means no
    amplifier and contributes no ASE.

    Returns
    -------
    stored_brightness, stored_correlation : float
    """
    if G_R < 1:
        raise ValueError("G_R must be >= 1")
    if not 0 < kappa_I <= 1:
        raise ValueError("kappa_I must lie in (0, 1]")
    N_R = G_R if G_R > 1 else 0.0
    stored = kappa_I * G_R * N_LO + kappa_I * N_R
    signal = (1.0 - kappa_A) * (src.kappa_C * src.N_SPDC + (1.0 - src.kappa_C) * src.N_ASE)
    cross_sq = kappa_I * G_R * (1.0 - kappa_A) * (1.0 - src.kappa_C) * src.N_ASE * N_LO
    if signal == 0 or stored == 0:
        return stored, 0.0
    return stored, cross_sq / (signal * stored)


def bob_amplifier_output_brightness(params, arriving_brightness):
    """Mean photon number per mode leaving Bob's amplifier."""
    if arriving_brightness < 0:
        raise ValueError("arriving brightness must be nonnegative")
    return params.G_B * (1.0 - params.kappa_B) * arriving_brightness + params.N_B
