"""Alice's broadband homodyne receiver: conditional moments, error probability, Shannon rate."""

import math
from dataclasses import dataclass

from .gaussian_core import q_function
from .terminals import derive_source


class DegenerateReceiverError(ValueError):
    pass


@dataclass(frozen=True)
class HomodyneMoments:
    mu0: float
    mu1: float
    sigma0: float
    sigma1: float

    @property
    def degenerate(self):
        return self.sigma0 + self.sigma1 == 0

    @property
    def snr_argument(self):
        """``(mu0 - mu1) / (sigma0 + sigma1)``; zero for a dead receiver."""
        if self.degenerate:
            return 0.0
        return (self.mu0 - self.mu1) / (self.sigma0 + self.sigma1)


@dataclass(frozen=True)
class InfoRates:
    pr_e: float
    I_AB: float
    I_AB_per_bit: float


def received_ase_brightness(params, f_E):
    """ASE brightness of Alice's light that survives into Bob's amplifier."""
    src = derive_source(params)
    return ((1.0 - params.kappa_B) * (1.0 - f_E) * (1.0 - params.kappa_A)
            * (1.0 - src.kappa_C) * src.N_ASE)


def homodyne_moments(params, f_E):
    """Conditional mean and standard deviation of Alice's photon-count difference.

    Assumes perfect reference storage.
    """
    M, eta, kS = params.M, params.eta, params.kappa_S
    G, N_LO = params.G_B, params.N_LO
    n_ase = received_ase_brightness(params, f_E)
    n_ref = kS * G * (1.0 - params.kappa_B) * kS * params.N_S + kS * params.N_B
    n1 = n_ref + N_LO
    mu = 2.0 * M * eta * kS * math.sqrt(G * n_ase * N_LO)
    var = M * (eta * n1 + 2.0 * eta ** 2 * (n_ref * N_LO + kS ** 2 * G * n_ase * N_LO))
    sigma = math.sqrt(var)
    return HomodyneMoments(mu0=mu, mu1=-mu, sigma0=sigma, sigma1=sigma)


def error_probability(m):
    if m.degenerate:
        raise DegenerateReceiverError("zero homodyne variance: receiver carries no information")
    return q_function(m.snr_argument)


def asymptotic_error_probability(params, f_E):
    """Large N_B, N_LO limit ``Q(sqrt(2 M kappa_S G_B N'_ASE / N_B))``."""
    n_ase = received_ase_brightness(params, f_E)
    return q_function(math.sqrt(2.0 * params.M * params.kappa_S * params.G_B * n_ase / params.N_B))


def binary_entropy(p):
    if not 0 <= p <= 1:
        raise ValueError(f"probability out of range: {p!r}")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def shannon_rate(pr_e, R):
    """Alice-Bob Shannon information rate ``R (1 - h2(pr_e))`` in bits/s."""
    if not 0 <= pr_e <= 0.5:
        raise ValueError(f"pr_e must lie in [0, 0.5]; relabel bits above 0.5 (got {pr_e!r})")
    return R * (1.0 - binary_entropy(pr_e))


def info_rates(params, f_E):
    pr_e = error_probability(homodyne_moments(params, f_E))
    per_bit = 1.0 - binary_entropy(pr_e)
    return InfoRates(pr_e=pr_e, I_AB=params.R * per_bit, I_AB_per_bit=per_bit)
