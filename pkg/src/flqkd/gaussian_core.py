"""
Gaussian-state numerics in the quarter-vacuum convention.

Covariance matrices are real, symmetric, and ordered (q1, p1, q2, p2, ...).
A vacuum mode has covariance I/4, a thermal mode of mean photon number N has
(2N + 1) I / 4, and symplectic eigenvalues are bounded below by 1/4.
"""

import math

import numpy as np
from scipy.special import erfc

VACUUM_VARIANCE = 0.25

SYMMETRY_RTOL = 1e-12
HEISENBERG_TOL = 1e-9
CLUSTER_TOL = 1e-9


class InvalidCovarianceError(ValueError):
    """Matrix is not a valid Wigner covariance."""


def symplectic_form(n_modes):
    """Block-diagonal symplectic form for ``n_modes`` interleaved modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class WignerCov:
    """Real symmetric covariance matrix of a zero-mean Gaussian state.

    Parameters
    ----------
    matrix : array_like
        ``2n x 2n`` covariance in the quarter-vacuum convention.
    check_physical : bool
        Also enforce the Heisenberg bound on the symplectic spectrum.

    Raises
    ------
    InvalidCovarianceError
        Odd or non-square shape, asymmetry beyond ``SYMMETRY_RTOL``, or a
        symplectic eigenvalue below ``1/4 - HEISENBERG_TOL``.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix, check_physical=True):
        m = np.array(matrix, dtype=float)
        _check_shape_and_symmetry(m)
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        self._matrix = m
        if check_physical:
            low = float(symplectic_eigenvalues(self)[-1])
            if low < VACUUM_VARIANCE - HEISENBERG_TOL:
                raise InvalidCovarianceError(
                    f"symplectic eigenvalue {low!r} violates the 1/4 bound"
                )

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @property
    def n_modes(self):
        return self.dim // 2

    def block(self, i, j):
        """2x2 block between modes ``i`` and ``j``."""
        return self._matrix[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def submatrix(self, modes):
        """Reduced covariance of the listed modes, in the given order."""
        idx = np.concatenate([[2 * k, 2 * k + 1] for k in modes])
        return WignerCov(self._matrix[np.ix_(idx, idx)], check_physical=False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._matrix, dtype=dtype)

    def __repr__(self):
        return f"WignerCov(n_modes={self.n_modes})"


def _check_shape_and_symmetry(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidCovarianceError(f"covariance must be square, got {m.shape}")
    if m.shape[0] == 0 or m.shape[0] % 2:
        raise InvalidCovarianceError(f"covariance dimension must be even, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise InvalidCovarianceError("covariance has non-finite entries")
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
        raise InvalidCovarianceError("covariance is not symmetric")


def _as_matrix(cov):
    if isinstance(cov, WignerCov):
        return cov.matrix
    m = np.asarray(cov, dtype=float)
    _check_shape_and_symmetry(m)
    return m


def symplectic_eigenvalues(cov):
    """Symplectic spectrum of ``cov``, sorted descending, one value per mode.

    The eigenvalues of ``i Omega cov`` come in +/- pairs; their moduli are
    sorted and clustered pairwise. A pair whose two members differ by more
    than ``CLUSTER_TOL`` (relative) indicates a numerically broken input.
    """
    m = _as_matrix(cov)
    n = m.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ m))
    ev = np.sort(ev)[::-1]
    pairs = ev.reshape(n, 2)
    spread = np.abs(pairs[:, 0] - pairs[:, 1])
    if np.any(spread > CLUSTER_TOL * np.maximum(1.0, pairs[:, 0])):
        raise InvalidCovarianceError("symplectic eigenvalues do not pair up")
    return pairs.mean(axis=1)


def thermal_entropy(x):
    """Von Neumann entropy in bits of a thermal state with mean photon number x.

    ``g(x) = (x+1) log2(x+1) - x log2(x)``, with ``g(x) = 0`` for ``x < 1e-12``.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"thermal entropy needs x >= 0, got {x!r}")
    tiny = arr < 1e-12
    safe = np.where(tiny, 1.0, arr)
    out = np.where(tiny, 0.0, (safe + 1.0) * np.log2(safe + 1.0) - safe * np.log2(safe))
    if out.ndim == 0:
        return float(out)
    return out


def _mean_photon(xi):
    # rounding can push a pure-state eigenvalue a hair below 1/4
    return max((4.0 * xi - 1.0) / 2.0, 0.0)


def entropy_from_cov(cov):
    """Von Neumann entropy (bits) of the Gaussian state with covariance ``cov``.

    Raises ``InvalidCovarianceError`` if the spectrum violates the 1/4 bound,
    so unchecked ``WignerCov`` instances are still validated here.
    """
    spectrum = symplectic_eigenvalues(cov)
    if spectrum[-1] < VACUUM_VARIANCE - HEISENBERG_TOL:
        raise InvalidCovarianceError(
            f"symplectic eigenvalue {spectrum[-1]!r} violates the 1/4 bound"
        )
    return float(sum(thermal_entropy(_mean_photon(xi)) for xi in spectrum))


def q_function(x):
    """Gaussian upper-tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def vacuum_cov(n_modes=1):
    return WignerCov(VACUUM_VARIANCE * np.eye(2 * n_modes), check_physical=False)


def thermal_cov(mean_photons):
    return WignerCov((2.0 * mean_photons + 1.0) * VACUUM_VARIANCE * np.eye(2))


def tmsv_cov(mean_photons):
    """Two-mode squeezed vacuum with per-mode brightness ``mean_photons``."""
    a = (2.0 * mean_photons + 1.0) * np.eye(2)
    c = 2.0 * math.sqrt(mean_photons * (mean_photons + 1.0)) * np.diag([1.0, -1.0])
    return WignerCov(VACUUM_VARIANCE * np.block([[a, c], [c, a]]))


def phase_sensitive_cross(cov, i, j):
    """``<a_i a_j>`` for modes ``i != j`` of a zero-mean Gaussian state.

    With ``a = q + i p`` and vacuum quadrature variance 1/4,
    ``<a_i a_j> = <q_i q_j> - <p_i p_j> + i (<q_i p_j> + <p_i q_j>)``.
    """
    m = _as_matrix(cov)
    qi, pi_, qj, pj = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
    return complex(m[qi, qj] - m[pi_, pj], m[qi, pj] + m[pi_, qj])


def mean_photon_number(cov, i):
    """``<a_i^dagger a_i>`` from the diagonal block of mode ``i``."""
    m = _as_matrix(cov)
    return float(m[2 * i, 2 * i] + m[2 * i + 1, 2 * i + 1] - 0.5)
