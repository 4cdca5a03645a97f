"""Floodlight quantum key distribution: key-rate bounds, Eve's Holevo bounds and channel monitoring."""

from .adversary import (
    AttackParams,
    BoundMethod,
    HolevoBound,
    InfeasibleAttackError,
    attack_from_angles,
    conditional_covariances,
    entanglement_assisted_capacity,
    eve_spdc_brightness,
    holevo_active_ub,
    holevo_asymptotic_ub,
    holevo_optimum_ub,
    monitor_leak_ratio,
    optimum_attack,
    passive_ub,
    verify_optimum_angles,
)
from .gaussian_core import (
    InvalidCovarianceError,
    WignerCov,
    entropy_from_cov,
    q_function,
    symplectic_eigenvalues,
    thermal_entropy,
)
from .keyrate import (
    HolevoRow,
    OperatingPoint,
    SweepRow,
    distance_sweep,
    fe_sweep,
    holevo_sweep,
    optimize_operating_point,
    pirandola_bound,
    skr_lower_bound,
)
from .monitor import (
    EventStream,
    MonitorRates,
    estimate_fE,
    expected_coincidence_excess,
    expected_rates,
    expected_singles,
    simulate_events,
)
from .receiver import HomodyneMoments, InfoRates, error_probability, homodyne_moments, shannon_rate
from .terminals import RegimeWarning, SourceDerived, SystemParams, derive_source, source_covariance
