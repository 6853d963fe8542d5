"""Constructive free interpolation and ODE oscillation in the unit disc."""

from .geometry import (
    DiscPoint,
    DiscSequence,
    GeometryError,
    mobius_factor,
    pseudo_disc_radius,
    pseudo_dist,
)
from .growth import ClassRReport, GrowthError, GrowthFunction, class_R_check, polya_order_estimate
from .counting import (
    ConditionReport,
    CountingError,
    carleson_delta,
    check_concentration,
    check_korenblum_sum,
    concentration_korenblum_comparison,
    counting_N,
    counting_n,
    counting_sandwich_check,
    seip_density_estimate,
    separation,
    sigma_log_comparison,
)
from .products import (
    CanonicalProduct,
    LogComplex,
    ProductsError,
    factor_sum_growth_check,
    index_cancellation_check,
    prime_counting_criteria_check,
    weierstrass_E,
)
from .interpolation import (
    CoefficientLadder,
    Interpolant,
    InterpolationError,
    LadderError,
    TargetData,
    build_interpolant,
    build_ladder,
    growth_report,
    ladder_for_sequence,
    max_term_bound_report,
    select_exponents,
)
from .oscillation import (
    OscillationError,
    OscillationSolution,
    SharpnessSequence,
    build_coefficient,
    osc_targets,
    sharpness_counting_check,
    sharpness_growth_witness,
    sharpness_sequence,
)
from .harness import ConfigError, Scenario, generate_sequence, generate_targets, run_scenario

__version__ = "0.1.0"
