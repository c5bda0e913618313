"""Capacity, outage, and diversity analysis of a full-duplex cooperative
NOMA downlink with a device-to-device side link, validated end-to-end by a
seeded Monte Carlo engine."""

from .analytic import (
    AsymptoticOutage,
    DerivedConstants,
    cdf_high_snr_bottleneck,
    cdf_min_sinr_s3,
    cdf_q,
    derive_constants,
    diversity_order,
    ec_d1_asymptotic,
    ec_d1_exact,
    ec_u1_asymptotic,
    ec_u1_exact,
    ec_u3_asymptotic,
    ec_u3_asymptotic_integral,
    ec_u3_exact,
    esc,
    esc_asymptotic,
    op_asymptotic,
    op_d1,
    op_d1_joint,
    op_u1,
    op_u3,
)
from .experiments import (
    ComparisonRow,
    ResultRow,
    SweepSpec,
    baseline_config,
    emit_comparison,
    emit_results,
    parse_results,
    run_baseline_comparison,
    run_checks,
    run_sweep,
)
from .model import (
    ChannelSample,
    ConfigError,
    RateSet,
    SinrSet,
    SystemConfig,
    compute_rates,
    compute_sinrs,
    config_from_dict,
    db_to_linear,
    linear_to_db,
    load_config,
    min_s3_sinr,
    sample_channels,
)
from .montecarlo import (
    CapacityEstimates,
    EstimateWithCI,
    OutageEstimates,
    SimulationPlan,
    estimate_ergodic_capacities,
    estimate_outage,
)
from .numerics import (
    QuadratureError,
    QuadratureSpec,
    exp_integral_ei,
    exp_scaled_e1,
    integrate_adaptive,
)

__version__ = "0.1.0"
