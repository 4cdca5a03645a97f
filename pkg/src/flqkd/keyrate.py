"""
Secret-key-rate lower bound, operating-point optimization and the sweeps
behind the rate-vs-distance, rate-vs-f_E and Holevo-per-mode tables.
"""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial

import numpy as np

from .adversary import (
    entanglement_assisted_capacity,
    holevo_active_ub,
    holevo_asymptotic_ub,
    holevo_optimum_ub,
    monitor_leak_ratio,
    passive_ub,
)
from .receiver import binary_entropy, error_probability, homodyne_moments
from .search import grid_then_golden
from .terminals import RegimeWarning

PR_E_MAX = 0.1
R_MAX = 10e9
R_MIN = 1e6
NS_BOUNDS = (1e-4, 0.5)
NS_GRID_POINTS = 60
R_POINTS_PER_DECADE = 6
NS_REL_TOL = 1e-4

# How the qualitative Holevo-curve statements are quantified.
HOLEVO_THRESHOLDS = {
    "active_vs_optimum_max_rel_gap": 0.25,
    "active_vs_optimum_at_N_S": 1e-3,
    "passive_over_optimum_min": 0.7,
    "passive_over_optimum_at_N_S": 0.1,
}

_INFEASIBLE = -1.0


@dataclass(frozen=True)
class OperatingPoint:
    L: float
    f_E: float
    kappa_S: float
    N_S_opt: float
    R_opt: float
    pr_e: float
    I_AB: float
    chi_ub: float
    chi_ub_asym: float
    skr_lb: float
    ppb_tx: float
    ppb_rx: float
    eff_per_use: float
    eff_per_mode: float
    pirandola_bound: float
    leak_ratio: float
    feasible: bool
    status: str = "ok"

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    point: OperatingPoint


@dataclass(frozen=True)
class HolevoRow:
    """Per-mode bounds (before the one-bit cap) at one signal brightness."""

    N_S: float
    optimum: float
    passive: float
    active: float
    C_E: float
    optimum_capped: bool
    passive_capped: bool
    active_capped: bool


def pirandola_bound(kappa_S):
    """Repeaterless secret-key capacity of a pure-loss channel, bits per mode."""
    if kappa_S >= 1:
        return math.inf
    return -math.log2(1.0 - kappa_S)


def _leak_ratio_or_nan(params, f_E):
    if params.N_S == 0:
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        try:
            return monitor_leak_ratio(params, f_E)
        except ValueError:
            return 1.0


def skr_lower_bound(params, f_E, N_S=None, R=None, fold_leak=False, pr_e_max=PR_E_MAX):
    """Evaluate the key-rate lower bound ``max(0, beta I_AB - chi_UB)`` at one point.

    ``N_S`` and ``R`` override the corresponding fields of ``params``. The
    returned point is flagged infeasible when ``pr_e > pr_e_max`` but its
    rate is still reported.
    """
    if N_S is not None:
        params = params.with_signal_brightness(N_S)
    if R is not None:
        params = params.replace(R=R)
    N_S, R, W, kS, M = params.N_S, params.R, params.W, params.kappa_S, params.M

    pr_e = error_probability(homodyne_moments(params, f_E))
    I_AB = R * (1.0 - binary_entropy(pr_e))
    chi = holevo_optimum_ub(params, f_E).rate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        chi_asym = holevo_asymptotic_ub(params, f_E).rate
    leak = _leak_ratio_or_nan(params, f_E)
    if fold_leak:
        chi = min(chi * leak, R)
    skr = max(0.0, params.beta * I_AB - chi)
    feasible = pr_e <= pr_e_max
    return OperatingPoint(
        L=params.L,
        f_E=f_E,
        kappa_S=kS,
        N_S_opt=N_S,
        R_opt=R,
        pr_e=pr_e,
        I_AB=I_AB,
        chi_ub=chi,
        chi_ub_asym=chi_asym,
        skr_lb=skr,
        ppb_tx=N_S * M,
        ppb_rx=kS * N_S * M,
        eff_per_use=skr / R,
        eff_per_mode=skr / W,
        pirandola_bound=pirandola_bound(kS),
        leak_ratio=leak,
        feasible=feasible,
        status="ok" if feasible else "pr_e_constraint",
    )


def _rate_objective(params, f_E, R, log_ns, pr_e_max, fold_leak):
    p = params.with_signal_brightness(math.exp(log_ns)).replace(R=R)
    pr_e = error_probability(homodyne_moments(p, f_E))
    if pr_e > pr_e_max:
        return _INFEASIBLE
    chi = holevo_optimum_ub(p, f_E).rate
    if fold_leak:
        chi = min(chi * _leak_ratio_or_nan(p, f_E), R)
    return max(0.0, p.beta * R * (1.0 - binary_entropy(pr_e)) - chi)


def _best_brightness(params, f_E, R, ns_grid, pr_e_max, fold_leak):
    """Maximize the rate over N_S at fixed R; returns (N_S, rate)."""
    f = partial(_rate_objective, params, f_E, R, pr_e_max=pr_e_max, fold_leak=fold_leak)
    x, y = grid_then_golden(f, list(np.log(ns_grid)), tol=NS_REL_TOL)
    if y == _INFEASIBLE:
        return None, _INFEASIBLE
    return math.exp(x), y


def _r_grid(params, r_candidates, r_bounds):
    if r_candidates is not None:
        grid = sorted(float(r) for r in r_candidates if 0 < r <= params.W)
        if not grid:
            raise ValueError("no admissible bit rate among the candidates")
        return grid
    lo, hi = r_bounds[0], min(r_bounds[1], params.W)
    n = max(2, int(math.ceil(math.log10(hi / lo) * R_POINTS_PER_DECADE)) + 1)
    return [float(r) for r in np.geomspace(lo, hi, n)]


def optimize_operating_point(
    params,
    f_E,
    r_candidates=None,
    r_bounds=(R_MIN, R_MAX),
    pr_e_max=PR_E_MAX,
    ns_bounds=NS_BOUNDS,
    ns_points=NS_GRID_POINTS,
    fold_leak=False,
):
    """Choose (N_S, R) to maximize the key-rate lower bound subject to Pr(e) <= pr_e_max.

    N_S is searched on a ``ns_points`` log grid over ``ns_bounds`` and then
    refined by golden section in log N_S. R is taken from the discrete
    ``r_candidates`` when given; otherwise it is searched on a log grid over
    ``r_bounds`` (clipped to R <= W) and refined the same way in log R.

    An empty feasible set yields a zero-rate point with ``feasible=False``.
    """
    ns_grid = np.geomspace(ns_bounds[0], ns_bounds[1], ns_points)
    inner = partial(_best_brightness, params, f_E, ns_grid=ns_grid,
                    pr_e_max=pr_e_max, fold_leak=fold_leak)
    r_grid = _r_grid(params, r_candidates, r_bounds)

    cache = {}

    def outer(log_r):
        if log_r not in cache:
            cache[log_r] = inner(math.exp(log_r))
        return cache[log_r][1]

    log_grid = [math.log(r) for r in r_grid]
    if r_candidates is None:
        log_r, best = grid_then_golden(outer, log_grid, tol=NS_REL_TOL)
    else:
        log_r = max(log_grid, key=outer)
        best = outer(log_r)

    if best == _INFEASIBLE:
        point = skr_lower_bound(params, f_E, N_S=ns_bounds[0], R=r_grid[0],
                                fold_leak=fold_leak, pr_e_max=pr_e_max)
        return _zeroed(point, feasible=False, status="infeasible")

    R = r_grid[log_grid.index(log_r)] if log_r in log_grid else math.exp(log_r)
    point = skr_lower_bound(params, f_E, N_S=cache[log_r][0], R=R,
                            fold_leak=fold_leak, pr_e_max=pr_e_max)
    if point.skr_lb == 0:
        return replace(point, status="zero_rate")
    return point


def _zeroed(point, **changes):
    return replace(point, skr_lb=0.0, eff_per_use=0.0, eff_per_mode=0.0, **changes)


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _distance_point(params, f_E, opt_kwargs, L):
    return optimize_operating_point(params.replace(L=float(L)), f_E, **opt_kwargs)


def _fe_point(params, opt_kwargs, f_E):
    return optimize_operating_point(params, float(f_E), **opt_kwargs)


def distance_sweep(params, f_E, L_grid, workers=1, **opt_kwargs):
    """One optimized operating point per path length (km)."""
    L_grid = [float(x) for x in L_grid]
    if any(b < a for a, b in zip(L_grid, L_grid[1:])):
        raise ValueError("L_grid must be ascending")
    points = _map(partial(_distance_point, params, f_E, opt_kwargs), L_grid, workers)
    return [SweepRow("L_km", L, p) for L, p in zip(L_grid, points)]


def fe_sweep(params, L, fE_grid, workers=1, **opt_kwargs):
    """One optimized operating point per injection fraction at fixed path length."""
    fE_grid = [float(x) for x in fE_grid]
    if any(b < a for a, b in zip(fE_grid, fE_grid[1:])):
        raise ValueError("fE_grid must be ascending")
    p = params.replace(L=float(L))
    points = _map(partial(_fe_point, p, opt_kwargs), fE_grid, workers)
    return [SweepRow("f_E", fE, pt) for fE, pt in zip(fE_grid, points)]


def _holevo_row(params, f_E, N_S):
    opt = holevo_optimum_ub(params, f_E, N_S)
    pas = passive_ub(params, N_S)
    act = holevo_active_ub(params, f_E, N_S)
    return HolevoRow(
        N_S=N_S,
        optimum=opt.per_mode_uncapped,
        passive=pas.per_mode_uncapped,
        active=act.per_mode_uncapped,
        C_E=entanglement_assisted_capacity(params, f_E, N_S),
        optimum_capped=opt.capped,
        passive_capped=pas.capped,
        active_capped=act.capped,
    )


def holevo_sweep(params, L, f_E, NS_grid, workers=1):
    """Per-mode optimum, passive, active bounds and C_E over signal brightness."""
    NS_grid = [float(x) for x in NS_grid]
    if any(b < a for a, b in zip(NS_grid, NS_grid[1:])):
        raise ValueError("NS_grid must be ascending")
    p = params.replace(L=float(L))
    return _map(partial(_holevo_row, p, f_E), NS_grid, workers)
